import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drbm.activations import (
    DomainError,
    StateKind,
    StateSet,
    enumerate_states,
    log_state_sum,
    mean_state,
)

BERNOULLI = StateSet.bernoulli()
BIPOLAR = StateSet.bipolar()
RELU = StateSet.rectified_linear()

FINITE_SETS = [
    BERNOULLI,
    BIPOLAR,
    StateSet.binomial(1),
    StateSet.binomial(2),
    StateSet.binomial(4),
    StateSet.binomial(8),
]


def direct_log_sum(state_set, alpha):
    # independent oracle: plain summation over the enumerated states at 200
    # significant digits, then the log
    mp.mp.dps = 200
    total = mp.fsum(mp.e ** (mp.mpf(float(s)) * mp.mpf(alpha)) for s in enumerate_states(state_set))
    return float(mp.log(total))


def central_difference(state_set, alpha, step=1e-6):
    up = log_state_sum(state_set, alpha + step)
    down = log_state_sum(state_set, alpha - step)
    return (up - down) / (2.0 * step)


class TestStateSet:
    def test_factories_and_names(self):
        assert StateSet.from_name("bernoulli") == BERNOULLI
        assert StateSet.from_name("bipolar") == BIPOLAR
        assert StateSet.from_name("relu") == RELU
        assert StateSet.from_name("binomial", 8) == StateSet.binomial(8)

    def test_binomial_requires_bins(self):
        with pytest.raises(ValueError):
            StateSet.from_name("binomial")
        with pytest.raises(ValueError):
            StateSet(StateKind.BINOMIAL, 0)

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            StateSet.from_name("gaussian")


class TestEnumerateStates:
    def test_bernoulli(self):
        assert list(enumerate_states(BERNOULLI)) == [0.0, 1.0]

    def test_bipolar(self):
        assert list(enumerate_states(BIPOLAR)) == [-1.0, 1.0]

    def test_binomial(self):
        assert list(enumerate_states(StateSet.binomial(2))) == [0.0, 1.0, 2.0]

    def test_relu_not_enumerable(self):
        with pytest.raises(DomainError):
            enumerate_states(RELU)


class TestLogStateSum:
    def test_bernoulli_at_zero(self):
        assert log_state_sum(BERNOULLI, 0.0) == pytest.approx(math.log(2), rel=1e-15)

    def test_binomial_at_zero(self):
        assert log_state_sum(StateSet.binomial(3), 0.0) == pytest.approx(
            math.log(4), rel=1e-15
        )

    def test_bipolar_at_zero(self):
        assert log_state_sum(BIPOLAR, 0.0) == pytest.approx(math.log(2), rel=1e-15)

    def test_binomial_frozen_oracle_value(self):
        # direct 5-term summation of e^(0.7 s), s = 0..4, at 50 digits
        assert log_state_sum(StateSet.binomial(4), 0.7) == pytest.approx(
            3.455678286552925476, abs=1e-14
        )

    def test_bernoulli_no_overflow(self):
        assert log_state_sum(BERNOULLI, 1000.0) == 1000.0

    def test_relu_closed_form(self):
        assert log_state_sum(RELU, -0.5) == pytest.approx(
            -math.log(1.0 - math.exp(-0.5)), rel=1e-14
        )

    def test_relu_rejects_nonnegative(self):
        with pytest.raises(DomainError):
            log_state_sum(RELU, 0.0)
        with pytest.raises(DomainError):
            log_state_sum(RELU, 2.5)
        with pytest.raises(DomainError):
            log_state_sum(RELU, np.array([-1.0, 0.5]))

    @pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
    def test_rejects_nonfinite(self, bad):
        with pytest.raises(DomainError):
            log_state_sum(BERNOULLI, bad)

    def test_array_shape_passthrough(self):
        a = np.array([[0.0, 1.0], [-2.0, 3.0]])
        out = log_state_sum(StateSet.binomial(2), a)
        assert out.shape == a.shape
        assert out[0, 0] == pytest.approx(math.log(3), rel=1e-15)


class TestMeanState:
    def test_bernoulli_at_zero(self):
        assert mean_state(BERNOULLI, 0.0) == 0.5

    def test_binomial_uniform(self):
        assert mean_state(StateSet.binomial(6), 0.0) == 3.0

    def test_binomial_matches_central_difference(self):
        s = StateSet.binomial(3)
        assert mean_state(s, -0.4) == pytest.approx(
            central_difference(s, -0.4), abs=1e-8
        )

    def test_bipolar_saturates(self):
        assert mean_state(BIPOLAR, 50.0) == pytest.approx(1.0, abs=1e-12)

    def test_relu_rejects_nonnegative(self):
        with pytest.raises(DomainError):
            mean_state(RELU, 0.0)


# ---------------------------------------------------------------------------
# invariants

@pytest.mark.parametrize("state_set", FINITE_SETS, ids=str)
@given(alpha=st.floats(min_value=-30.0, max_value=30.0))
def test_consistency_with_direct_summation(state_set, alpha):
    got = log_state_sum(state_set, alpha)
    want = direct_log_sum(state_set, alpha)
    assert abs(got - want) <= 1e-12 * max(abs(want), 1e-300)


@pytest.mark.parametrize("state_set", FINITE_SETS, ids=str)
@given(alpha=st.floats(min_value=-10.0, max_value=10.0))
def test_mean_is_derivative_of_log_sum(state_set, alpha):
    assert mean_state(state_set, alpha) == pytest.approx(
        central_difference(state_set, alpha), abs=1e-7
    )


@given(alpha=st.floats(min_value=-10.0, max_value=-0.1))
def test_relu_mean_is_derivative_of_log_sum(alpha):
    assert mean_state(RELU, alpha) == pytest.approx(
        central_difference(RELU, alpha), abs=1e-7
    )


@pytest.mark.parametrize(
    "state_set, lo, hi",
    [(s, -30.0, 30.0) for s in FINITE_SETS] + [(RELU, -30.0, -0.2)],
    ids=str,
)
def test_log_sum_is_convex(state_set, lo, hi):
    h = 0.05
    a = np.linspace(lo, hi, 1501)
    second = (
        log_state_sum(state_set, a + h)
        - 2.0 * log_state_sum(state_set, a)
        + log_state_sum(state_set, a - h)
    )
    assert second.min() >= -1e-9


@pytest.mark.parametrize("state_set", FINITE_SETS, ids=str)
@given(alpha=st.floats(min_value=-700.0, max_value=700.0))
def test_mean_within_state_bounds(state_set, alpha):
    value = mean_state(state_set, alpha)
    assert state_set.min_state <= value <= state_set.max_state


@pytest.mark.parametrize("state_set", FINITE_SETS + [RELU], ids=str)
def test_mean_is_nondecreasing(state_set):
    if state_set.kind is StateKind.RECTIFIED_LINEAR:
        a = -np.logspace(math.log10(700.0), -9, 2000)
    else:
        a = np.concatenate([np.linspace(-700.0, 700.0, 3001), [-1e-9, 0.0, 1e-9]])
        a = np.sort(a)
    values = mean_state(state_set, a)
    assert np.all(np.diff(values) >= -1e-12)


def test_binomial_one_reduces_to_bernoulli():
    grid = np.sort(
        np.concatenate(
            [
                np.linspace(-30.0, 30.0, 2001),
                [10.0**k for k in range(-9, 3)],
                [-(10.0**k) for k in range(-9, 3)],
                [0.0, -700.0, 700.0],
            ]
        )
    )
    b1 = StateSet.binomial(1)
    assert np.max(np.abs(log_state_sum(b1, grid) - log_state_sum(BERNOULLI, grid))) < 1e-14
    assert np.max(np.abs(mean_state(b1, grid) - mean_state(BERNOULLI, grid))) < 1e-14


# ---------------------------------------------------------------------------
# extreme-magnitude behaviour

@pytest.mark.parametrize("state_set", FINITE_SETS, ids=str)
def test_finite_up_to_700(state_set):
    a = np.concatenate([np.linspace(-700.0, 700.0, 1401), [-700.0, 700.0]])
    assert np.all(np.isfinite(log_state_sum(state_set, a)))
    assert np.all(np.isfinite(mean_state(state_set, a)))


def test_relu_finite_up_to_700():
    a = -np.logspace(math.log10(700.0), -12, 500)
    assert np.all(np.isfinite(log_state_sum(RELU, a)))
    assert np.all(np.isfinite(mean_state(RELU, a)))


def test_saturation_limits():
    assert log_state_sum(BIPOLAR, 700.0) == 700.0
    assert log_state_sum(BIPOLAR, -700.0) == 700.0
    assert mean_state(BIPOLAR, 700.0) == 1.0
    assert mean_state(BIPOLAR, -700.0) == -1.0
    assert mean_state(BERNOULLI, 700.0) == 1.0
    assert mean_state(BERNOULLI, -700.0) == pytest.approx(0.0, abs=1e-300)
    n8 = StateSet.binomial(8)
    assert log_state_sum(n8, 700.0) == pytest.approx(5600.0, rel=1e-15)
    assert mean_state(n8, 700.0) == 8.0
    assert mean_state(n8, -700.0) == pytest.approx(0.0, abs=1e-300)
