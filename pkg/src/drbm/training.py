"""Stochastic gradient descent with validation-driven learning-rate control.

One training run is a loop of full SGD epochs.  After every epoch the 0-1
average loss on the validation split is measured; whenever it fails to beat
the best loss seen so far for ``patience`` consecutive epochs, the parameters
revert to the best snapshot and the learning rate drops to ``eta_init / 2``,
then ``eta_init / 3``, and so on.  The run stops on the ``max_reductions``-th
such event (or at ``max_epochs``), and the final parameters are always the
best snapshot, never the last epoch's.

All randomness (initial weights, per-epoch shuffles) flows from one seed
through a single numpy PCG64 generator, so a run is a pure function of its
config and data.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .activations import StateKind, StateSet
from .data import Dataset
from .model import DrbmParams, gradient, predict_batch

RNG_ALGORITHM = "numpy.random.PCG64"  # recorded in outputs; part of the contract


class NumericError(ArithmeticError):
    """Training produced non-finite parameters or losses."""


class Action(enum.Enum):
    CONTINUE = "continue"
    REVERT_AND_REDUCE = "revert_and_reduce"
    TERMINATE = "terminate"


class TerminationReason(enum.Enum):
    REDUCTIONS_EXHAUSTED = "reductions_exhausted"
    MAX_EPOCHS = "max_epochs"


@dataclass(frozen=True)
class TrainConfig:
    variant: StateSet
    n_hid: int
    eta_init: float
    batch_size: int = 100
    max_epochs: int = 2000
    patience: int = 10
    max_reductions: int = 5
    seed: int = 0
    init_scale: float = 0.01

    def __post_init__(self):
        if not isinstance(self.variant, StateSet):
            raise TypeError("variant must be a StateSet")
        for name in ("n_hid", "batch_size", "max_epochs", "patience", "max_reductions"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if not self.eta_init > 0:
            raise ValueError("eta_init must be positive")
        if self.init_scale < 0:
            raise ValueError("init_scale must be non-negative")


@dataclass
class ScheduleState:
    """Early-stopping bookkeeping for one run."""

    eta_init: float
    best_val_loss: float = math.inf
    best_params: DrbmParams | None = None
    consecutive_worse: int = 0
    reduction_count: int = 0
    current_lr: float = field(default=0.0)

    def __post_init__(self):
        if self.current_lr == 0.0:
            self.current_lr = self.eta_init


@dataclass(frozen=True, eq=False)
class TrainReport:
    final_params: DrbmParams
    epochs_run: int
    val_loss_history: list
    reduction_epochs: list
    termination_reason: TerminationReason
    config: TrainConfig


def init_params(cfg: TrainConfig, n_inputs: int, n_classes: int, rng=None) -> DrbmParams:
    """Gaussian(0, init_scale) weights, zero biases, drawn from the seeded
    generator (w_input first, then w_class).

    The rectified-linear variant instead starts its hidden biases at -1 so
    that every pre-activation begins inside the convergent domain alpha < 0.
    """
    if n_inputs < 1 or n_classes < 2:
        raise ValueError("need n_inputs >= 1 and n_classes >= 2")
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    w_input = rng.normal(0.0, cfg.init_scale, size=(n_inputs, cfg.n_hid))
    w_class = rng.normal(0.0, cfg.init_scale, size=(n_classes, cfg.n_hid))
    if cfg.variant.kind is StateKind.RECTIFIED_LINEAR:
        h_bias = np.full(cfg.n_hid, -1.0)
    else:
        h_bias = np.zeros(cfg.n_hid)
    return DrbmParams(w_input, w_class, h_bias, np.zeros(n_classes))


def _descend(params: DrbmParams, grad: DrbmParams, lr: float) -> DrbmParams:
    return DrbmParams(
        params.w_input - lr * grad.w_input,
        params.w_class - lr * grad.w_class,
        params.h_bias - lr * grad.h_bias,
        params.y_bias - lr * grad.y_bias,
    )


def sgd_epoch(
    params: DrbmParams,
    state_set: StateSet,
    train: Dataset,
    lr: float,
    batch_size: int,
    rng,
) -> DrbmParams:
    """One full pass: shuffle, split into consecutive batches (the last may
    be short), and take a descent step per batch.  Returns new parameters."""
    n = train.features.shape[0]
    if n == 0:
        raise ValueError("training split is empty")
    if not lr >= 0:
        raise ValueError("lr must be non-negative")
    order = rng.permutation(n)
    for lo in range(0, n, batch_size):
        idx = order[lo : lo + batch_size]
        grad = gradient(params, state_set, train.features[idx], train.labels[idx])
        params = _descend(params, grad, lr)
    return params


def early_stopping_step(
    st: ScheduleState, val_loss: float, cfg: TrainConfig, params: DrbmParams | None = None
) -> Action:
    """Advance the schedule by one epoch's validation loss.

    An epoch counts as worse unless it strictly beats the best loss so far;
    the worse-counter resets both on improvement and after each reduction,
    and improvement is always judged against the global best.  When
    ``params`` is given, an improving epoch snapshots it as the best.
    """
    if not math.isfinite(val_loss):
        raise NumericError(f"validation loss is {val_loss}")
    if val_loss < st.best_val_loss:
        st.best_val_loss = val_loss
        st.consecutive_worse = 0
        if params is not None:
            st.best_params = params
        return Action.CONTINUE
    st.consecutive_worse += 1
    if st.consecutive_worse < cfg.patience:
        return Action.CONTINUE
    st.reduction_count += 1
    st.consecutive_worse = 0
    if st.reduction_count >= cfg.max_reductions:
        return Action.TERMINATE
    st.current_lr = cfg.eta_init / (st.reduction_count + 1)
    return Action.REVERT_AND_REDUCE


def _validation_loss(params, state_set, dataset) -> float:
    from .evaluate import average_loss  # evaluate sits above training

    return average_loss(predict_batch(params, state_set, dataset.features), dataset.labels)


def _check_finite(params):
    for name in ("w_input", "w_class", "h_bias", "y_bias"):
        if not np.all(np.isfinite(getattr(params, name))):
            raise NumericError(f"non-finite values in {name} after update")


def train(cfg: TrainConfig, train_ds: Dataset, valid_ds: Dataset) -> TrainReport:
    """Run the full protocol and return the best-snapshot parameters."""
    if train_ds.features.shape[1] != valid_ds.features.shape[1]:
        raise ValueError("train and validation splits disagree on input width")
    if train_ds.n_classes != valid_ds.n_classes:
        raise ValueError("train and validation splits disagree on class count")

    rng = np.random.default_rng(cfg.seed)
    params = init_params(cfg, train_ds.features.shape[1], train_ds.n_classes, rng)
    st = ScheduleState(eta_init=cfg.eta_init)

    history = []
    reduction_epochs = []
    reason = TerminationReason.MAX_EPOCHS
    epochs_run = 0
    for epoch in range(1, cfg.max_epochs + 1):
        params = sgd_epoch(params, cfg.variant, train_ds, st.current_lr, cfg.batch_size, rng)
        _check_finite(params)
        val_loss = _validation_loss(params, cfg.variant, valid_ds)
        epochs_run = epoch
        history.append(val_loss)
        action = early_stopping_step(st, val_loss, cfg, params)
        if action is Action.REVERT_AND_REDUCE:
            params = st.best_params
            reduction_epochs.append(epoch)
        elif action is Action.TERMINATE:
            reason = TerminationReason.REDUCTIONS_EXHAUSTED
            break
    return TrainReport(
        final_params=st.best_params,
        epochs_run=epochs_run,
        val_loss_history=history,
        reduction_epochs=reduction_epochs,
        termination_reason=reason,
        config=cfg,
    )


REPORT_HEADER = "# drbm-train-report v1"


def save_train_report(report: TrainReport, path) -> None:
    """Write the per-epoch trace as TSV: epoch, validation loss, learning
    rate, event flag (one of '-', 'reduce', 'terminate')."""
    lines = [REPORT_HEADER, "# epoch\tval_loss\tlr\tevent"]
    reductions = set(report.reduction_epochs)
    n_before = 0
    for epoch, loss in enumerate(report.val_loss_history, start=1):
        lr = report.config.eta_init / (n_before + 1)
        if epoch in reductions:
            event = "reduce"
            n_before += 1
        elif (
            epoch == report.epochs_run
            and report.termination_reason is TerminationReason.REDUCTIONS_EXHAUSTED
        ):
            event = "terminate"
        else:
            event = "-"
        lines.append(f"{epoch}\t{loss!r}\t{lr!r}\t{event}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_train_report_rows(path) -> list:
    """Parse a report file back into (epoch, val_loss, lr, event) tuples."""
    rows = []
    with open(path) as fh:
        first = fh.readline().rstrip("\n")
        if first != REPORT_HEADER:
            raise ValueError(f"{path}: unrecognised report header {first!r}")
        for line in fh:
            if line.startswith("#") or not line.strip():
                continue
            epoch, loss, lr, event = line.rstrip("\n").split("\t")
            rows.append((int(epoch), float(loss), float(lr), event))
    return rows
