"""Tour of the four hidden-unit state sets.

Each hidden unit contributes log(sum_k exp(s_k * a)) to a class score, where
a is its pre-activation.  This script prints that log-partition term and its
derivative (the expected unit state) across a wide range of pre-activations,
including magnitudes that would overflow a naive implementation.
"""

import numpy as np

from drbm import StateSet, log_state_sum, mean_state

state_sets = {
    "bernoulli {0,1}": StateSet.bernoulli(),
    "bipolar {-1,+1}": StateSet.bipolar(),
    "binomial 0..8": StateSet.binomial(8),
    "rectified-linear": StateSet.rectified_linear(),
}

alphas = np.array([-700.0, -30.0, -2.0, -0.5, -1e-6, 0.0, 0.5, 2.0, 30.0, 700.0])

for name, ss in state_sets.items():
    print(f"\n{name}")
    print(f"  {'alpha':>10} {'log_state_sum':>16} {'mean_state':>14}")
    for a in alphas:
        if ss.kind.value == "rectified_linear" and a >= 0:
            print(f"  {a:>10.3g} {'(diverges)':>16} {'(diverges)':>14}")
            continue
        print(f"  {a:>10.3g} {log_state_sum(ss, a):>16.8g} {mean_state(ss, a):>14.8g}")

# the mean is exactly the slope of the log-partition term; check one point
# per state set with a central difference
print("\nderivative identity at alpha = -0.8 (central difference, step 1e-6):")
for name, ss in state_sets.items():
    h = 1e-6
    fd = (log_state_sum(ss, -0.8 + h) - log_state_sum(ss, -0.8 - h)) / (2 * h)
    print(f"  {name:<18} mean={mean_state(ss, -0.8):.12f}  fd={fd:.12f}")

# binomial with a single bin is exactly the bernoulli unit
grid = np.linspace(-20, 20, 9)
gap = np.max(
    np.abs(
        log_state_sum(StateSet.binomial(1), grid)
        - log_state_sum(StateSet.bernoulli(), grid)
    )
)
print(f"\nbinomial(n_bins=1) vs bernoulli, max |difference| on a grid: {gap:.2e}")
