"""Hidden-unit state sets and their per-unit log-partition / mean-state forms.

Every hidden unit of the classifier contributes a factor ``sum_k exp(s_k * a)``
to a class score, where ``{s_k}`` is the set of values the unit may take and
``a`` is its pre-activation.  Four state sets are supported:

* ``bernoulli01``        states {0, 1}
* ``bipolar_pm1``        states {-1, +1}
* ``binomial``           integer states 0..N (N = ``n_bins``)
* ``rectified_linear``   integer states 0, 1, 2, ... (convergent only for a < 0)

This module evaluates ``log sum_k exp(s_k * a)`` and its derivative in ``a``
(the expected unit state) in closed form, entirely in the log domain, so that
pre-activations of any magnitude neither overflow nor underflow.  All
functions accept scalars or numpy arrays and are elementwise over arrays.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

_LN2 = math.log(2.0)


class DomainError(ValueError):
    """An argument lies outside the valid domain of a state-set form."""


class StateKind(enum.Enum):
    BERNOULLI01 = "bernoulli01"
    BIPOLAR_PM1 = "bipolar_pm1"
    BINOMIAL = "binomial"
    RECTIFIED_LINEAR = "rectified_linear"


_KIND_NAMES = {
    "bernoulli": StateKind.BERNOULLI01,
    "bernoulli01": StateKind.BERNOULLI01,
    "bipolar": StateKind.BIPOLAR_PM1,
    "bipolar_pm1": StateKind.BIPOLAR_PM1,
    "binomial": StateKind.BINOMIAL,
    "relu": StateKind.RECTIFIED_LINEAR,
    "rectified_linear": StateKind.RECTIFIED_LINEAR,
}


@dataclass(frozen=True)
class StateSet:
    """The set of values a hidden unit may take; selects the model variant.

    ``n_bins`` is the largest state value N of the binomial variant (states
    are the integers 0..N inclusive, so N + 1 of them).  The other variants
    ignore it.
    """

    kind: StateKind
    n_bins: int = 1

    def __post_init__(self):
        if not isinstance(self.kind, StateKind):
            raise TypeError(f"kind must be a StateKind, got {self.kind!r}")
        if self.kind is StateKind.BINOMIAL:
            if not isinstance(self.n_bins, (int, np.integer)) or self.n_bins < 1:
                raise ValueError(
                    f"binomial state sets need integer n_bins >= 1, got {self.n_bins!r}"
                )

    @classmethod
    def bernoulli(cls) -> "StateSet":
        return cls(StateKind.BERNOULLI01)

    @classmethod
    def bipolar(cls) -> "StateSet":
        return cls(StateKind.BIPOLAR_PM1)

    @classmethod
    def binomial(cls, n_bins: int) -> "StateSet":
        return cls(StateKind.BINOMIAL, int(n_bins))

    @classmethod
    def rectified_linear(cls) -> "StateSet":
        return cls(StateKind.RECTIFIED_LINEAR)

    @classmethod
    def from_name(cls, name: str, n_bins: int | None = None) -> "StateSet":
        """Build from a CLI/config name: bernoulli, bipolar, binomial, relu."""
        try:
            kind = _KIND_NAMES[name.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown variant name {name!r}") from None
        if kind is StateKind.BINOMIAL:
            if n_bins is None:
                raise ValueError("binomial variant requires n_bins")
            return cls(kind, int(n_bins))
        return cls(kind)

    @property
    def is_finite(self) -> bool:
        return self.kind is not StateKind.RECTIFIED_LINEAR

    @property
    def num_states(self) -> int:
        if self.kind is StateKind.BINOMIAL:
            return self.n_bins + 1
        if self.kind is StateKind.RECTIFIED_LINEAR:
            raise DomainError("rectified_linear has no finite state count")
        return 2

    @property
    def min_state(self) -> float:
        return -1.0 if self.kind is StateKind.BIPOLAR_PM1 else 0.0

    @property
    def max_state(self) -> float:
        if self.kind is StateKind.BINOMIAL:
            return float(self.n_bins)
        if self.kind is StateKind.RECTIFIED_LINEAR:
            return math.inf
        return 1.0


def enumerate_states(state_set: StateSet) -> np.ndarray:
    """The exact ordered state values of a finite state set.

    Raises DomainError for the rectified-linear set, which has no finite
    enumeration.
    """
    kind = state_set.kind
    if kind is StateKind.BERNOULLI01:
        return np.array([0.0, 1.0])
    if kind is StateKind.BIPOLAR_PM1:
        return np.array([-1.0, 1.0])
    if kind is StateKind.BINOMIAL:
        return np.arange(state_set.n_bins + 1, dtype=np.float64)
    raise DomainError("rectified_linear states cannot be enumerated (infinite set)")


def _log1mexp(x):
    # log(1 - e^x) for x < 0.  Two forms, switched at -ln 2 so each is used
    # where it keeps full relative precision; the min/max clamps keep the
    # discarded branch well-defined under np.where's eager evaluation.
    return np.where(
        x < -_LN2,
        np.log1p(-np.exp(np.minimum(x, -_LN2))),
        np.log(-np.expm1(np.maximum(x, -_LN2))),
    )


def _binomial_log_sum(a, n_bins):
    # log sum_{s=0}^{N} e^{s a} = log((1 - e^{(N+1)a}) / (1 - e^a)).
    # Both logs are taken through _log1mexp; for a > 0 the dominant term
    # e^{N a} is factored out first so nothing ever overflows.
    shape = a.shape
    a = np.atleast_1d(a)
    m = n_bins + 1
    out = np.empty_like(a)
    zero = a == 0.0
    neg = a < 0.0
    pos = a > 0.0
    out[zero] = math.log(m)
    an = a[neg]
    out[neg] = _log1mexp(m * an) - _log1mexp(an)
    ap = a[pos]
    out[pos] = n_bins * ap + _log1mexp(-m * ap) - _log1mexp(-ap)
    return out.reshape(shape)


def _binomial_mean(a, n_bins):
    # d/da of _binomial_log_sum: 1/expm1(-a) - (N+1)/expm1(-(N+1)a).
    # The two poles at a = 0 cancel analytically but not in floating point:
    # the closed form loses ~eps/|a| absolutely.  Inside |a|(N+1) < 1 the
    # mean is instead taken as the exact weighted average over the N+1
    # states (no exp there can exceed e, so the ratio is benign).  For very
    # wide state sets that average would be a large temporary, and the
    # cancellation is milder anyway, so a short odd Taylor series covers the
    # immediate neighbourhood of 0 and the closed form the rest.
    shape = a.shape
    a = np.atleast_1d(a)
    m = n_bins + 1
    out = np.empty_like(a)
    if m <= 64:
        near = np.abs(a) * m < 1.0
        if np.any(near):
            states = np.arange(m, dtype=np.float64)
            weights = np.exp(states[:, None] * a[near][None, :])
            out[near] = (states[:, None] * weights).sum(axis=0) / weights.sum(axis=0)
    else:
        near = np.abs(a) * m < 1e-3
        s = a[near]
        out[near] = (
            n_bins / 2.0 + (m * m - 1.0) / 12.0 * s - (m**4 - 1.0) / 720.0 * s**3
        )
    b = a[~near]
    with np.errstate(over="ignore"):
        # expm1 overflows to inf beyond ~709; 1/inf -> 0 is the right limit.
        out[~near] = 1.0 / np.expm1(-b) - m / np.expm1(-m * b)
    return np.clip(out, 0.0, float(n_bins)).reshape(shape)


def _check_alpha(state_set, a):
    if not np.all(np.isfinite(a)):
        raise DomainError("alpha must be finite")
    if state_set.kind is StateKind.RECTIFIED_LINEAR and np.any(a >= 0.0):
        raise DomainError(
            "rectified_linear forms require alpha < 0 (the state sum diverges "
            "for alpha >= 0)"
        )


def log_state_sum(state_set: StateSet, alpha):
    """log sum_k exp(s_k * alpha) over the unit's states, evaluated stably.

    For rectified_linear this is the geometric-series limit -log(1 - e^alpha),
    defined only for alpha < 0; alpha >= 0 raises DomainError.
    """
    a = np.asarray(alpha, dtype=np.float64)
    _check_alpha(state_set, a)
    kind = state_set.kind
    if kind is StateKind.BERNOULLI01:
        out = np.logaddexp(0.0, a)
    elif kind is StateKind.BIPOLAR_PM1:
        out = np.logaddexp(a, -a)
    elif kind is StateKind.BINOMIAL:
        out = _binomial_log_sum(a, state_set.n_bins)
    else:
        out = -_log1mexp(a)
    return out if isinstance(alpha, np.ndarray) else float(out)


def mean_state(state_set: StateSet, alpha):
    """Expected unit state under p(s_k) proportional to exp(s_k * alpha).

    This is the derivative of :func:`log_state_sum` in alpha: the logistic
    sigmoid for {0,1} units, tanh for {-1,+1}, and the corresponding closed
    forms for the binomial and rectified-linear sets.
    """
    a = np.asarray(alpha, dtype=np.float64)
    _check_alpha(state_set, a)
    kind = state_set.kind
    if kind is StateKind.BERNOULLI01:
        out = expit(a)
    elif kind is StateKind.BIPOLAR_PM1:
        out = np.tanh(a)
    elif kind is StateKind.BINOMIAL:
        out = _binomial_mean(a, state_set.n_bins)
    else:
        with np.errstate(over="ignore"):
            out = 1.0 / np.expm1(-a)
    return out if isinstance(alpha, np.ndarray) else float(out)
