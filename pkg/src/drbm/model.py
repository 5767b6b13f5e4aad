"""Classifier parameters, exact class conditionals, and analytic gradients.

The model scores class ``y`` on input ``x`` as

    score(y, x) = y_bias[y] + sum_j log_state_sum(alpha_yj)
    alpha_yj    = h_bias[j] + x . w_input[:, j] + w_class[y, j]

and the class conditional is the softmax of the scores.  Everything here is
computed in the log domain; probabilities are only exponentiated after
normalisation.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from dataclasses import dataclass

import numpy as np

from .activations import StateKind, StateSet, log_state_sum, mean_state

_CHUNK = 1024  # rows scored per slice; bounds the (n, n_c, n_h) temporaries

MODEL_MAGIC = b"DRBMMODL"
MODEL_FORMAT_VERSION = 1

_KIND_CODES = {
    StateKind.BERNOULLI01: 0,
    StateKind.BIPOLAR_PM1: 1,
    StateKind.BINOMIAL: 2,
    StateKind.RECTIFIED_LINEAR: 3,
}
_CODE_KINDS = {v: k for k, v in _KIND_CODES.items()}


class ModelFormatError(ValueError):
    """A model file does not match the documented layout."""


def _frozen(arr, ndim, name):
    a = np.asarray(arr, dtype=np.float64)
    if a.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {a.shape}")
    if not (a.flags.c_contiguous and a.flags.owndata):
        a = np.array(a, dtype=np.float64, order="C")
    a.setflags(write=False)  # freeze in place; construction takes ownership
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


@dataclass(frozen=True, eq=False)
class DrbmParams:
    """The trainable parameter set.

    w_input : (n_inputs, n_hidden)  input-to-hidden weights
    w_class : (n_classes, n_hidden) class-to-hidden weights
    h_bias  : (n_hidden,)           hidden biases
    y_bias  : (n_classes,)          class biases

    Arrays are stored as read-only float64; instances never mutate.  There is
    no input-side bias: it multiplies numerator and denominator of the class
    conditional identically, so it is unidentifiable under discriminative
    training and storing it would only add dead state.
    """

    w_input: np.ndarray
    w_class: np.ndarray
    h_bias: np.ndarray
    y_bias: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "w_input", _frozen(self.w_input, 2, "w_input"))
        object.__setattr__(self, "w_class", _frozen(self.w_class, 2, "w_class"))
        object.__setattr__(self, "h_bias", _frozen(self.h_bias, 1, "h_bias"))
        object.__setattr__(self, "y_bias", _frozen(self.y_bias, 1, "y_bias"))
        n_i, n_h = self.w_input.shape
        n_c = self.w_class.shape[0]
        if n_i < 1 or n_h < 1 or n_c < 2:
            raise ValueError(
                f"need n_inputs >= 1, n_hidden >= 1, n_classes >= 2; got "
                f"({n_i}, {n_h}, {n_c})"
            )
        if self.w_class.shape[1] != n_h:
            raise ValueError(
                f"w_class width {self.w_class.shape[1]} != n_hidden {n_h}"
            )
        if self.h_bias.shape != (n_h,):
            raise ValueError(f"h_bias shape {self.h_bias.shape} != ({n_h},)")
        if self.y_bias.shape != (n_c,):
            raise ValueError(f"y_bias shape {self.y_bias.shape} != ({n_c},)")

    @property
    def n_inputs(self) -> int:
        return self.w_input.shape[0]

    @property
    def n_hidden(self) -> int:
        return self.w_input.shape[1]

    @property
    def n_classes(self) -> int:
        return self.w_class.shape[0]

    @classmethod
    def zeros(cls, n_inputs: int, n_hidden: int, n_classes: int) -> "DrbmParams":
        return cls(
            np.zeros((n_inputs, n_hidden)),
            np.zeros((n_classes, n_hidden)),
            np.zeros(n_hidden),
            np.zeros(n_classes),
        )


@dataclass(frozen=True, eq=False)
class ClassConditional:
    """Log class probabilities for one input and the argmax label.

    Ties in the argmax resolve to the lowest class index.
    """

    log_proba: np.ndarray
    predicted: int


def _check_x(params, x):
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (params.n_inputs,):
        raise ValueError(f"x shape {x.shape} != ({params.n_inputs},)")
    return x


def _check_batch(params, features, labels):
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels)
    if X.ndim != 2 or X.shape[1] != params.n_inputs:
        raise ValueError(
            f"features must be (n, {params.n_inputs}), got {X.shape}"
        )
    if y.shape != (X.shape[0],):
        raise ValueError(f"labels shape {y.shape} != ({X.shape[0]},)")
    if X.shape[0] == 0:
        raise ValueError("batch must be non-empty")
    y = y.astype(np.intp)
    if np.any(y < 0) or np.any(y >= params.n_classes):
        raise ValueError(f"labels must lie in [0, {params.n_classes})")
    return X, y


def activations(params: DrbmParams, x, y: int) -> np.ndarray:
    """Per-hidden-unit pre-activations alpha_yj for a single (x, y)."""
    x = _check_x(params, x)
    if not 0 <= y < params.n_classes:
        raise ValueError(f"class index {y} out of range [0, {params.n_classes})")
    return params.h_bias + x @ params.w_input + params.w_class[y]


def _alpha_all_classes(params, X):
    # (n, n_c, n_h): alpha for every class at once
    xr = X @ params.w_input
    return xr[:, None, :] + params.w_class[None, :, :] + params.h_bias


def _log_softmax_rows(scores):
    # max-shifted; the shifted sum is always >= 1, so the log is safe
    shift = scores - scores.max(axis=1, keepdims=True)
    return shift - np.log(np.exp(shift).sum(axis=1, keepdims=True))


def class_log_scores(params: DrbmParams, state_set: StateSet, x) -> np.ndarray:
    """Unnormalised log score per class: y_bias + sum_j log_state_sum."""
    x = _check_x(params, x)
    alpha = _alpha_all_classes(params, x[None, :])[0]
    return params.y_bias + log_state_sum(state_set, alpha).sum(axis=1)


def log_proba_batch(params: DrbmParams, state_set: StateSet, features) -> np.ndarray:
    """Log class conditionals, one row per input row."""
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != params.n_inputs:
        raise ValueError(f"features must be (n, {params.n_inputs}), got {X.shape}")
    out = np.empty((X.shape[0], params.n_classes))
    for lo in range(0, X.shape[0], _CHUNK):
        chunk = X[lo : lo + _CHUNK]
        alpha = _alpha_all_classes(params, chunk)
        scores = params.y_bias + log_state_sum(state_set, alpha).sum(axis=2)
        out[lo : lo + chunk.shape[0]] = _log_softmax_rows(scores)
    return out


def predict_log_proba(params: DrbmParams, state_set: StateSet, x) -> ClassConditional:
    """Exact class conditional for one input."""
    x = _check_x(params, x)
    log_proba = log_proba_batch(params, state_set, x[None, :])[0]
    return ClassConditional(log_proba=log_proba, predicted=int(np.argmax(log_proba)))


def predict_batch(params: DrbmParams, state_set: StateSet, features) -> np.ndarray:
    """Argmax labels for each input row (lowest index on ties)."""
    return np.argmax(log_proba_batch(params, state_set, features), axis=1)


def nll(params: DrbmParams, state_set: StateSet, features, labels) -> float:
    """Mean negative log-likelihood -log P(y|x) over the batch."""
    X, y = _check_batch(params, features, labels)
    log_proba = log_proba_batch(params, state_set, X)
    return float(-log_proba[np.arange(len(y)), y].mean())


def gradient(params: DrbmParams, state_set: StateSet, features, labels) -> DrbmParams:
    """Analytic gradient of the mean negative log-likelihood.

    Per example, with mu_yj = mean_state(alpha_yj) and pi_y = P(y|x):

        d/d h_bias_j    = -(mu_{t j} - sum_y pi_y mu_{y j})        (t = true class)
        d/d w_input_ij  = -x_i (mu_{t j} - sum_y pi_y mu_{y j})
        d/d w_class_yj  = -(1[y = t] mu_{t j} - pi_y mu_{y j})
        d/d y_bias_y    = -(1[y = t] - pi_y)

    averaged over the batch.  The sign convention is the gradient of the
    loss: descent subtracts it.
    """
    X, y = _check_batch(params, features, labels)
    n = X.shape[0]
    n_c = params.n_classes

    alpha = _alpha_all_classes(params, X)  # (n, n_c, n_h)
    scores = params.y_bias + log_state_sum(state_set, alpha).sum(axis=2)
    pi = np.exp(_log_softmax_rows(scores))  # (n, n_c)
    mu = mean_state(state_set, alpha)  # (n, n_c, n_h)

    rows = np.arange(n)
    onehot = np.zeros((n, n_c))
    onehot[rows, y] = 1.0
    mu_true = mu[rows, y, :]  # (n, n_h)
    mu_avg = np.einsum("ny,nyj->nj", pi, mu)  # (n, n_h)

    diff = mu_true - mu_avg
    g_h_bias = -diff.mean(axis=0)
    g_w_input = -(X.T @ diff) / n
    g_w_class = -(onehot.T @ mu_true - np.einsum("ny,nyj->yj", pi, mu)) / n
    g_y_bias = -(onehot.sum(axis=0) - pi.sum(axis=0)) / n

    return DrbmParams(g_w_input, g_w_class, g_h_bias, g_y_bias)


@dataclass(frozen=True, eq=False)
class SavedModel:
    params: DrbmParams
    state_set: StateSet
    seed: int
    config: dict


def _atomic_write(path, payload: bytes):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_model(
    path,
    params: DrbmParams,
    state_set: StateSet,
    *,
    seed: int = 0,
    config: dict | None = None,
) -> None:
    """Write the model file (see README "Model file format" for the layout).

    The write is atomic (temp file + rename) and the encoding is canonical,
    so identical inputs always produce byte-identical files.
    """
    blob = json.dumps(
        config or {}, sort_keys=True, separators=(",", ":"), ensure_ascii=True
    ).encode("ascii")
    header = MODEL_MAGIC + struct.pack(
        "<IIIIIIQI",
        MODEL_FORMAT_VERSION,
        _KIND_CODES[state_set.kind],
        state_set.n_bins if state_set.kind is StateKind.BINOMIAL else 0,
        params.n_inputs,
        params.n_hidden,
        params.n_classes,
        int(seed) & 0xFFFFFFFFFFFFFFFF,
        len(blob),
    )
    body = b"".join(
        np.ascontiguousarray(a).astype("<f8").tobytes()
        for a in (params.w_input, params.w_class, params.h_bias, params.y_bias)
    )
    _atomic_write(path, header + blob + body)


def load_model(path) -> SavedModel:
    """Read a model file back; the round trip is bit-exact."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[: len(MODEL_MAGIC)] != MODEL_MAGIC:
        raise ModelFormatError(f"{path}: not a model file (bad magic)")
    off = len(MODEL_MAGIC)
    version, kind_code, n_bins, n_i, n_h, n_c, seed, blob_len = struct.unpack_from(
        "<IIIIIIQI", raw, off
    )
    if version != MODEL_FORMAT_VERSION:
        raise ModelFormatError(f"{path}: unsupported model format version {version}")
    if kind_code not in _CODE_KINDS:
        raise ModelFormatError(f"{path}: unknown variant code {kind_code}")
    off += struct.calcsize("<IIIIIIQI")
    config = json.loads(raw[off : off + blob_len].decode("ascii")) if blob_len else {}
    off += blob_len

    def take(count, shape):
        nonlocal off
        nbytes = count * 8
        if off + nbytes > len(raw):
            raise ModelFormatError(f"{path}: truncated at byte {len(raw)}")
        arr = np.frombuffer(raw, dtype="<f8", count=count, offset=off).reshape(shape)
        off += nbytes
        return arr

    w_input = take(n_i * n_h, (n_i, n_h))
    w_class = take(n_c * n_h, (n_c, n_h))
    h_bias = take(n_h, (n_h,))
    y_bias = take(n_c, (n_c,))
    if off != len(raw):
        raise ModelFormatError(f"{path}: {len(raw) - off} trailing bytes")
    kind = _CODE_KINDS[kind_code]
    state_set = (
        StateSet(kind, n_bins) if kind is StateKind.BINOMIAL else StateSet(kind)
    )
    return SavedModel(
        params=DrbmParams(w_input, w_class, h_bias, y_bias),
        state_set=state_set,
        seed=seed,
        config=config,
    )
