"""The 0-1 average loss, hyperparameter grid search, and seed aggregation.

Grid search trains every (learning rate, hidden size[, bin count]) cell for
every seed, scores each trained model on the validation and test splits, and
selects the cell with the lowest mean validation loss.  Test data never
influences selection.  Failed cells are recorded with their error instead of
being silently dropped.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .activations import StateKind, StateSet
from .data import Dataset
from .model import predict_batch
from .training import TrainConfig, train

GRID_RECORDS_FORMAT = "drbm-grid-records"
GRID_RECORDS_VERSION = 1


def average_loss(predicted, truth) -> float:
    """Mean 0-1 misclassification rate between two label vectors."""
    p = np.asarray(predicted)
    t = np.asarray(truth)
    if p.shape != t.shape or p.ndim != 1:
        raise ValueError(f"label vectors must match: {p.shape} vs {t.shape}")
    if p.size == 0:
        raise ValueError("label vectors must be non-empty")
    return float(np.mean(p != t))


def aggregate_seeds(losses) -> tuple:
    """(mean, population standard deviation) over per-seed losses."""
    arr = np.asarray(losses, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("need a non-empty list of losses")
    return float(arr.mean()), float(arr.std())


@dataclass(frozen=True)
class GridSpec:
    """The search grid.  Defaults are the full benchmark protocol; shrink
    them for quick runs."""

    etas: tuple = (0.0001, 0.001, 0.01)
    hidden_sizes: tuple = (50, 100, 500, 1000)
    bin_counts: tuple = (2, 4, 8)  # binomial only
    seeds: tuple = tuple(range(10))

    def __post_init__(self):
        for name in ("etas", "hidden_sizes", "bin_counts", "seeds"):
            values = tuple(getattr(self, name))
            if not values:
                raise ValueError(f"{name} must be non-empty")
            object.__setattr__(self, name, values)


@dataclass(eq=False)
class ExperimentResult:
    """One grid cell: its config (seed field holds the first seed), the
    per-seed losses, and their aggregate."""

    config: TrainConfig
    seeds: tuple = ()
    per_seed_val_losses: list = field(default_factory=list)
    per_seed_test_losses: list = field(default_factory=list)
    mean_loss: float = math.nan
    std_loss: float = math.nan
    selected_on_validation: bool = False
    error: str | None = None

    @property
    def mean_val_loss(self) -> float:
        return float(np.mean(self.per_seed_val_losses)) if self.per_seed_val_losses else math.nan


def _cells(grid: GridSpec, kind: StateKind):
    bins = grid.bin_counts if kind is StateKind.BINOMIAL else (None,)
    for eta in grid.etas:
        for n_hid in grid.hidden_sizes:
            for n_bins in bins:
                yield eta, n_hid, n_bins


def grid_search(
    grid: GridSpec,
    kind: StateKind,
    train_ds: Dataset,
    valid_ds: Dataset,
    test_ds: Dataset,
    *,
    batch_size: int = 100,
    max_epochs: int = 2000,
    patience: int = 10,
    max_reductions: int = 5,
    init_scale: float = 0.01,
):
    """(results, best): every cell trained over every seed.

    Selection is by mean validation loss; ties break toward the lower
    learning rate, then fewer hidden units, then fewer bins.  ``best`` is
    None when every cell failed.
    """
    results = []
    for eta, n_hid, n_bins in _cells(grid, kind):
        variant = StateSet(kind, n_bins) if n_bins is not None else StateSet(kind)
        result = ExperimentResult(
            config=TrainConfig(
                variant=variant,
                n_hid=n_hid,
                eta_init=eta,
                batch_size=batch_size,
                max_epochs=max_epochs,
                patience=patience,
                max_reductions=max_reductions,
                seed=grid.seeds[0],
                init_scale=init_scale,
            ),
            seeds=tuple(grid.seeds),
        )
        try:
            for seed in grid.seeds:
                cfg = TrainConfig(
                    variant=variant,
                    n_hid=n_hid,
                    eta_init=eta,
                    batch_size=batch_size,
                    max_epochs=max_epochs,
                    patience=patience,
                    max_reductions=max_reductions,
                    seed=seed,
                    init_scale=init_scale,
                )
                report = train(cfg, train_ds, valid_ds)
                params = report.final_params
                result.per_seed_val_losses.append(
                    average_loss(predict_batch(params, variant, valid_ds.features), valid_ds.labels)
                )
                result.per_seed_test_losses.append(
                    average_loss(predict_batch(params, variant, test_ds.features), test_ds.labels)
                )
            result.mean_loss, result.std_loss = aggregate_seeds(result.per_seed_test_losses)
        except Exception as exc:  # record the failed cell, keep searching
            result.error = f"{type(exc).__name__}: {exc}"
        results.append(result)

    viable = [r for r in results if r.error is None]
    best = None
    if viable:
        best = min(
            viable,
            key=lambda r: (
                r.mean_val_loss,
                r.config.eta_init,
                r.config.n_hid,
                r.config.variant.n_bins,
            ),
        )
        best.selected_on_validation = True
    return results, best


def write_grid_records(results, path) -> None:
    """Line-delimited JSON, one record per (cell, seed), with a versioned
    header record.  Losses are written both as fractions and percentages."""
    lines = [
        json.dumps(
            {"format": GRID_RECORDS_FORMAT, "version": GRID_RECORDS_VERSION},
            sort_keys=True,
        )
    ]
    for r in results:
        base = {
            "variant": r.config.variant.kind.value,
            "n_bins": r.config.variant.n_bins
            if r.config.variant.kind is StateKind.BINOMIAL
            else None,
            "eta_init": r.config.eta_init,
            "n_hid": r.config.n_hid,
        }
        if r.error is not None:
            lines.append(json.dumps({**base, "error": r.error}, sort_keys=True))
            continue
        for i in range(len(r.per_seed_test_losses)):
            lines.append(
                json.dumps(
                    {
                        **base,
                        "seed": r.seeds[i],
                        "val_loss": r.per_seed_val_losses[i],
                        "val_loss_pct": 100.0 * r.per_seed_val_losses[i],
                        "test_loss": r.per_seed_test_losses[i],
                        "test_loss_pct": 100.0 * r.per_seed_test_losses[i],
                    },
                    sort_keys=True,
                )
            )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def summary_table(results) -> str:
    """Human-readable per-cell summary, best cell marked with '*'."""
    header = f"{'':2}{'eta':>8} {'n_hid':>6} {'n_bins':>6} {'val mean':>10} {'test mean +- std (%)':>24}"
    rows = [header]
    for r in results:
        mark = "* " if r.selected_on_validation else "  "
        bins = str(r.config.variant.n_bins) if r.config.variant.kind is StateKind.BINOMIAL else "-"
        if r.error is not None:
            rows.append(
                f"{mark}{r.config.eta_init:>8g} {r.config.n_hid:>6} {bins:>6} "
                f"{'failed:':>10} {r.error}"
            )
        else:
            rows.append(
                f"{mark}{r.config.eta_init:>8g} {r.config.n_hid:>6} {bins:>6} "
                f"{r.mean_val_loss:>10.4f} "
                f"{100 * r.mean_loss:>12.2f} +- {100 * r.std_loss:<8.2f}"
            )
    return "\n".join(rows)
