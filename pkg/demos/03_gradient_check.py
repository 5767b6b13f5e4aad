"""Analytic loss gradients against central finite differences.

The training loss is the mean negative log of the class conditional.  Its
gradient has a closed form in terms of the per-unit mean states; here we
probe every parameter entry of a random instance with central differences
and report the worst relative disagreement per parameter block.
"""

import numpy as np

from drbm import DrbmParams, StateSet, gradient
from drbm.verify import finite_difference_gradient

rng = np.random.default_rng(3)
n_inputs, n_hidden, n_classes, n_examples = 6, 4, 3, 3

params = DrbmParams(
    rng.normal(size=(n_inputs, n_hidden)),
    rng.normal(size=(n_classes, n_hidden)),
    rng.normal(size=n_hidden),
    rng.normal(size=n_classes),
)
X = rng.uniform(0, 1, (n_examples, n_inputs))
y = rng.integers(0, n_classes, n_examples)

for ss in (StateSet.bernoulli(), StateSet.bipolar(), StateSet.binomial(4)):
    analytic = gradient(params, ss, X, y)
    numeric = finite_difference_gradient(params, ss, X, y)
    print(f"{ss.kind.value}")
    for block in ("w_input", "w_class", "h_bias", "y_bias"):
        a = getattr(analytic, block)
        f = getattr(numeric, block)
        rel = np.max(np.abs(a - f) / np.maximum(np.maximum(np.abs(a), np.abs(f)), 1e-4))
        print(f"  {block:<8} worst relative error {rel:.2e}")

# the rectified-linear variant needs every pre-activation negative, so shift
# the hidden biases below the largest activation first
ss = StateSet.rectified_linear()
peak = (X @ params.w_input).max(axis=0) + params.w_class.max(axis=0) + params.h_bias
relu_params = DrbmParams(
    params.w_input, params.w_class, params.h_bias - peak - 1.0, params.y_bias
)
analytic = gradient(relu_params, ss, X, y)
numeric = finite_difference_gradient(relu_params, ss, X, y)
worst = max(
    np.max(
        np.abs(getattr(analytic, b) - getattr(numeric, b))
        / np.maximum(np.maximum(np.abs(getattr(analytic, b)), np.abs(getattr(numeric, b))), 1e-4)
    )
    for b in ("w_input", "w_class", "h_bias", "y_bias")
)
print(f"{ss.kind.value}\n  worst relative error over all blocks {worst:.2e}")
