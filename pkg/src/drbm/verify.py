"""Randomised differential checks: closed forms against brute force.

Two suites, both over freshly drawn small instances:

* conditional equivalence: the vectorised class conditional must match the
  enumeration oracle to 1e-10 on log-probabilities;
* gradient correctness: the analytic gradient must match central finite
  differences of the loss to a relative error of 1e-5.

Each instance is derived from (master seed, index), so any violation can be
replayed exactly from the numbers in the report.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import model
from .activations import StateKind, StateSet
from .model import DrbmParams
from .oracle import JointRbmView, log_conditional_by_enumeration

CONDITIONAL_TOL = 1e-10  # max |log P_model - log P_oracle| per class
GRADIENT_TOL = 1e-5  # max relative error vs central finite differences
FD_STEP = 1e-5
_REL_FLOOR = 1e-4  # entries below this magnitude are judged near-absolutely
# (the finite-difference noise floor is ~1e-10 here)

FINITE_KINDS = (StateKind.BERNOULLI01, StateKind.BIPOLAR_PM1, StateKind.BINOMIAL)
ALL_KINDS = FINITE_KINDS + (StateKind.RECTIFIED_LINEAR,)
DEFAULT_BIN_CHOICES = (1, 2, 4, 8)


@dataclass(frozen=True)
class CheckReport:
    check: str
    variant: str
    instances: int
    max_err: float
    tol: float
    master_seed: int
    worst_index: int
    elapsed_s: float

    @property
    def passed(self) -> bool:
        return self.max_err < self.tol

    def line(self) -> str:
        status = "ok" if self.passed else "FAIL"
        out = (
            f"{self.check:<12} {self.variant:<16} n={self.instances:<5} "
            f"max_err={self.max_err:.3e} tol={self.tol:.0e} "
            f"[{self.elapsed_s:.2f}s] {status}"
        )
        if not self.passed:
            out += f"  (replay: seed={self.master_seed} index={self.worst_index})"
        return out


def _draw_instance(kind, rng, bin_choices):
    n_inputs = int(rng.integers(1, 7))
    n_classes = int(rng.integers(2, 5))
    n_hidden = int(rng.integers(1, 5))
    if kind is StateKind.BINOMIAL:
        state_set = StateSet(kind, int(rng.choice(bin_choices)))
    else:
        state_set = StateSet(kind)
    params = DrbmParams(
        rng.normal(size=(n_inputs, n_hidden)),
        rng.normal(size=(n_classes, n_hidden)),
        rng.normal(size=n_hidden),
        rng.normal(size=n_classes),
    )
    return state_set, params


def _force_negative_preactivations(params, X, margin=1.0):
    # shift each hidden bias so every alpha_yj stays below -margin; keeps
    # rectified-linear instances inside their domain, with room for the
    # finite-difference probes
    alpha = X @ params.w_input  # (n, n_h)
    peak = alpha.max(axis=0) + params.w_class.max(axis=0) + params.h_bias
    return DrbmParams(
        params.w_input,
        params.w_class,
        params.h_bias - peak - margin,
        params.y_bias,
    )


def conditional_equivalence_check(
    kind: StateKind,
    n_instances: int,
    master_seed: int,
    bin_choices=DEFAULT_BIN_CHOICES,
) -> CheckReport:
    """Compare predict_log_proba with the enumeration oracle."""
    if kind is StateKind.RECTIFIED_LINEAR:
        raise ValueError("rectified_linear has no finite enumeration to check against")
    start = time.perf_counter()
    max_err = -1.0
    worst = -1
    for index in range(n_instances):
        rng = np.random.default_rng(np.random.SeedSequence([master_seed, index]))
        state_set, params = _draw_instance(kind, rng, bin_choices)
        x = rng.uniform(0.0, 1.0, size=params.n_inputs)
        got = model.predict_log_proba(params, state_set, x).log_proba
        view = JointRbmView.from_params(params, state_set)
        want = np.asarray(log_conditional_by_enumeration(view, x))
        err = float(np.max(np.abs(got - want)))
        if err > max_err:
            max_err, worst = err, index
    return CheckReport(
        check="conditional",
        variant=kind.value,
        instances=n_instances,
        max_err=max_err,
        tol=CONDITIONAL_TOL,
        master_seed=master_seed,
        worst_index=worst,
        elapsed_s=time.perf_counter() - start,
    )


def finite_difference_gradient(params, state_set, X, y, step=FD_STEP) -> DrbmParams:
    """Central finite differences of the mean negative log-likelihood, one
    loss evaluation pair per parameter entry."""
    arrays = {
        name: np.array(getattr(params, name))
        for name in ("w_input", "w_class", "h_bias", "y_bias")
    }

    def loss_with(name, flat_index, delta):
        probe = {k: v.copy() for k, v in arrays.items()}
        probe[name].flat[flat_index] += delta
        p = DrbmParams(probe["w_input"], probe["w_class"], probe["h_bias"], probe["y_bias"])
        return model.nll(p, state_set, X, y)

    grads = {}
    for name, arr in arrays.items():
        g = np.empty_like(arr)
        for flat_index in range(arr.size):
            up = loss_with(name, flat_index, step)
            down = loss_with(name, flat_index, -step)
            g.flat[flat_index] = (up - down) / (2.0 * step)
        grads[name] = g
    return DrbmParams(grads["w_input"], grads["w_class"], grads["h_bias"], grads["y_bias"])


def relative_gradient_error(analytic: DrbmParams, numeric: DrbmParams) -> float:
    """Max over entries of |a - f| / max(|a|, |f|, floor)."""
    worst = 0.0
    for name in ("w_input", "w_class", "h_bias", "y_bias"):
        a = getattr(analytic, name)
        f = getattr(numeric, name)
        denom = np.maximum(np.maximum(np.abs(a), np.abs(f)), _REL_FLOOR)
        worst = max(worst, float(np.max(np.abs(a - f) / denom)))
    return worst


def gradient_check(
    kind: StateKind,
    n_instances: int,
    master_seed: int,
    bin_choices=DEFAULT_BIN_CHOICES,
) -> CheckReport:
    """Compare the analytic gradient with central finite differences."""
    start = time.perf_counter()
    max_err = -1.0
    worst = -1
    for index in range(n_instances):
        rng = np.random.default_rng(np.random.SeedSequence([master_seed, index]))
        state_set, params = _draw_instance(kind, rng, bin_choices)
        n = int(rng.integers(1, 4))
        X = rng.uniform(0.0, 1.0, size=(n, params.n_inputs))
        y = rng.integers(0, params.n_classes, size=n)
        if kind is StateKind.RECTIFIED_LINEAR:
            params = _force_negative_preactivations(params, X)
        analytic = model.gradient(params, state_set, X, y)
        numeric = finite_difference_gradient(params, state_set, X, y)
        err = relative_gradient_error(analytic, numeric)
        if err > max_err:
            max_err, worst = err, index
    return CheckReport(
        check="gradient",
        variant=kind.value,
        instances=n_instances,
        max_err=max_err,
        tol=GRADIENT_TOL,
        master_seed=master_seed,
        worst_index=worst,
        elapsed_s=time.perf_counter() - start,
    )


def run_all_checks(n_instances: int, master_seed: int) -> list:
    """The full differential suite: conditionals for every finite variant,
    gradients for all four."""
    reports = [
        conditional_equivalence_check(kind, n_instances, master_seed)
        for kind in FINITE_KINDS
    ]
    reports += [gradient_check(kind, n_instances, master_seed) for kind in ALL_KINDS]
    return reports
