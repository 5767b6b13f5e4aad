"""End-to-end sanity on real handwritten digits (the small bundled set)."""

import numpy as np
import pytest

sklearn_datasets = pytest.importorskip("sklearn.datasets")

from drbm.activations import StateSet
from drbm.data import Dataset
from drbm.evaluate import average_loss
from drbm.model import predict_batch
from drbm.training import TrainConfig, init_params, sgd_epoch


@pytest.fixture(scope="module")
def digits_splits():
    bunch = sklearn_datasets.load_digits()
    features = bunch.data / 16.0
    labels = bunch.target
    order = np.random.default_rng(0).permutation(len(features))
    features, labels = features[order], labels[order]
    return (
        Dataset(features[:1400], labels[:1400], 10, "train"),
        Dataset(features[1400:], labels[1400:], 10, "test"),
    )


def test_digit_classification_beats_90_percent(digits_splits):
    train_ds, test_ds = digits_splits
    cfg = TrainConfig(
        variant=StateSet.bernoulli(), n_hid=30, eta_init=0.01, batch_size=1, seed=0
    )
    rng = np.random.default_rng(cfg.seed)
    params = init_params(cfg, train_ds.features.shape[1], 10, rng)
    for _ in range(25):
        params = sgd_epoch(params, cfg.variant, train_ds, cfg.eta_init, 1, rng)
    loss = average_loss(
        predict_batch(params, cfg.variant, test_ds.features), test_ds.labels
    )
    assert loss < 0.10
