"""Brute-force ground truth by exhaustive enumeration.

Everything here works on plain Python floats with explicit loops and shares
no code with the vectorised model: joint energies are summed term by term,
and free energies, conditionals, and the partition function are obtained by
enumerating every hidden (and, where asked, visible) configuration.  That
independence is the point; these routines exist to check the closed forms,
not to be fast.

Enumeration refuses to run when the configuration count exceeds ``cap``
rather than silently truncating.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .activations import StateSet, enumerate_states


class EnumerationCapError(RuntimeError):
    """Enumeration would exceed the configured cap."""

    def __init__(self, required: int, cap: int):
        super().__init__(
            f"enumeration needs {required} configurations, cap is {cap}"
        )
        self.required = required
        self.cap = cap


def _as_matrix(a, rows, cols, name):
    m = [[float(v) for v in row] for row in a]
    if len(m) != rows or any(len(r) != cols for r in m):
        raise ValueError(f"{name} must be {rows} x {cols}")
    return m


def _as_vector(a, length, name):
    v = [float(x) for x in a]
    if len(v) != length:
        raise ValueError(f"{name} must have length {length}")
    return v


@dataclass
class JointRbmView:
    """A joint energy view over (x, y, h) for tiny models.

    Mirrors the classifier parameters plus an explicit input bias (which the
    class conditional must not depend on; tests rely on that).  All values
    are kept as nested lists of Python floats.
    """

    w_input: list  # n_i x n_h
    w_class: list  # n_c x n_h
    h_bias: list  # n_h
    y_bias: list  # n_c
    in_bias: list  # n_i
    states: tuple  # hidden unit state values
    cap: int = 1_000_000

    def __post_init__(self):
        self.n_hidden = len(self.h_bias)
        self.n_inputs = len(self.w_input)
        self.n_classes = len(self.w_class)
        self.w_input = _as_matrix(self.w_input, self.n_inputs, self.n_hidden, "w_input")
        self.w_class = _as_matrix(self.w_class, self.n_classes, self.n_hidden, "w_class")
        self.h_bias = _as_vector(self.h_bias, self.n_hidden, "h_bias")
        self.y_bias = _as_vector(self.y_bias, self.n_classes, "y_bias")
        self.in_bias = _as_vector(self.in_bias, self.n_inputs, "in_bias")
        self.states = tuple(float(s) for s in self.states)

    @classmethod
    def from_params(cls, params, state_set: StateSet, in_bias=None, cap=1_000_000):
        states = tuple(float(s) for s in enumerate_states(state_set))
        return cls(
            w_input=[list(row) for row in params.w_input],
            w_class=[list(row) for row in params.w_class],
            h_bias=list(params.h_bias),
            y_bias=list(params.y_bias),
            in_bias=[0.0] * params.n_inputs if in_bias is None else list(in_bias),
            states=states,
            cap=cap,
        )

    def _check_cap(self, required: int):
        if required > self.cap:
            raise EnumerationCapError(required, self.cap)

    def _hidden_configs(self):
        self._check_cap(len(self.states) ** self.n_hidden)
        return itertools.product(self.states, repeat=self.n_hidden)


def energy(view: JointRbmView, x, y_onehot, h) -> float:
    """Joint energy of one full configuration.

    E = -in_bias.x - y_bias.y - h_bias.h - x W_in h - y W_cls h
    with y the one-hot class vector and every h entry drawn from the state
    set.
    """
    x = _as_vector(x, view.n_inputs, "x")
    y = _as_vector(y_onehot, view.n_classes, "y_onehot")
    h = _as_vector(h, view.n_hidden, "h")
    if sorted(y) != [0.0] * (view.n_classes - 1) + [1.0]:
        raise ValueError("y_onehot must have a single 1 and zeros elsewhere")
    for value in h:
        if value not in view.states:
            raise ValueError(f"hidden value {value!r} is not in {view.states}")
    return _energy_raw(view, x, y.index(1.0), h)


def _energy_raw(view, x, y_index, h):
    total = 0.0
    for i in range(view.n_inputs):
        total -= view.in_bias[i] * x[i]
    total -= view.y_bias[y_index]
    for j in range(view.n_hidden):
        total -= view.h_bias[j] * h[j]
    for i in range(view.n_inputs):
        xi = x[i]
        if xi != 0.0:
            row = view.w_input[i]
            for j in range(view.n_hidden):
                total -= xi * row[j] * h[j]
    row = view.w_class[y_index]
    for j in range(view.n_hidden):
        total -= row[j] * h[j]
    return total


def _log_sum_exp(values) -> float:
    m = max(values)
    return m + math.log(math.fsum(math.exp(v - m) for v in values))


def free_energy(view: JointRbmView, x, y_index: int) -> float:
    """-log sum_h exp(-E(x, y, h)) by explicit enumeration."""
    x = _as_vector(x, view.n_inputs, "x")
    if not 0 <= y_index < view.n_classes:
        raise ValueError(f"class index {y_index} out of range")
    neg_energies = [
        -_energy_raw(view, x, y_index, h) for h in view._hidden_configs()
    ]
    return -_log_sum_exp(neg_energies)


def log_conditional_by_enumeration(view: JointRbmView, x) -> list:
    """log P(y|x) per class, every term enumerated; input bias cancels."""
    scores = [-free_energy(view, x, y) for y in range(view.n_classes)]
    norm = _log_sum_exp(scores)
    return [s - norm for s in scores]


def conditional_by_enumeration(view: JointRbmView, x) -> list:
    """P(y|x) per class by brute force."""
    return [math.exp(v) for v in log_conditional_by_enumeration(view, x)]


def partition_function(view: JointRbmView) -> float:
    """log Z over binary inputs, one-hot classes, and all hidden configs.

    Exposed so tests can confirm the normaliser genuinely cancels out of the
    conditional.
    """
    n_states = len(view.states)
    required = (2**view.n_inputs) * view.n_classes * (n_states**view.n_hidden)
    view._check_cap(required)
    neg_energies = []
    for x in itertools.product((0.0, 1.0), repeat=view.n_inputs):
        for y_index in range(view.n_classes):
            for h in itertools.product(view.states, repeat=view.n_hidden):
                neg_energies.append(-_energy_raw(view, list(x), y_index, h))
    return _log_sum_exp(neg_energies)
