"""A small hyperparameter grid on the bundled digits data.

Every (learning rate, hidden size) cell trains once per seed; the cell with
the lowest mean validation loss wins and its test losses are aggregated as
mean +- population standard deviation.  Test labels play no part in the
selection.

Requires scikit-learn (`pip install drbm[demos]`).  Takes a few minutes.
"""

import numpy as np
from sklearn.datasets import load_digits

from drbm import Dataset, GridSpec, StateKind, grid_search
from drbm.evaluate import summary_table

bunch = load_digits()
features = bunch.data / 16.0
labels = bunch.target
order = np.random.default_rng(0).permutation(len(features))
features, labels = features[order], labels[order]

train_ds = Dataset(features[:1200], labels[:1200], 10, "train")
valid_ds = Dataset(features[1200:1500], labels[1200:1500], 10, "valid")
test_ds = Dataset(features[1500:], labels[1500:], 10, "test")

grid = GridSpec(etas=(0.001, 0.01), hidden_sizes=(20, 50), seeds=(0, 1))
results, best = grid_search(
    grid,
    StateKind.BERNOULLI01,
    train_ds,
    valid_ds,
    test_ds,
    batch_size=1,
    max_epochs=60,
)

print(summary_table(results))
print(
    f"\nselected eta={best.config.eta_init}, n_hid={best.config.n_hid}: "
    f"test loss {100 * best.mean_loss:.2f}% +- {100 * best.std_loss:.2f} "
    f"over seeds {best.seeds}"
)
