"""Full pipeline on real data: the bundled scikit-learn digits.

1,797 8x8 handwritten digits, ten classes.  We rescale pixels to [0, 1],
carve train/validation/test splits, run the full protocol with per-example
SGD for two state-set variants, and score the held-out split.

Requires scikit-learn (`pip install drbm[demos]`).
"""

import time

import numpy as np
from sklearn.datasets import load_digits

from drbm import Dataset, StateSet, TrainConfig, average_loss, predict_batch, train

bunch = load_digits()
features = bunch.data / 16.0
labels = bunch.target
order = np.random.default_rng(0).permutation(len(features))
features, labels = features[order], labels[order]

train_ds = Dataset(features[:1200], labels[:1200], 10, "train")
valid_ds = Dataset(features[1200:1500], labels[1200:1500], 10, "valid")
test_ds = Dataset(features[1500:], labels[1500:], 10, "test")
print(f"splits: {len(train_ds)} train / {len(valid_ds)} valid / {len(test_ds)} test")

for ss in (StateSet.bernoulli(), StateSet.binomial(8)):
    start = time.perf_counter()
    cfg = TrainConfig(variant=ss, n_hid=50, eta_init=0.01, batch_size=1, seed=0)
    report = train(cfg, train_ds, valid_ds)
    loss = average_loss(
        predict_batch(report.final_params, ss, test_ds.features), test_ds.labels
    )
    print(
        f"{ss.kind.value:<12} test loss {100 * loss:5.2f}%  "
        f"(best validation {100 * min(report.val_loss_history):5.2f}%, "
        f"{report.epochs_run} epochs, {time.perf_counter() - start:.0f}s)"
    )
