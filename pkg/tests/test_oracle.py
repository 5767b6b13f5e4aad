import math

import numpy as np
import pytest

from drbm.activations import StateSet, log_state_sum
from drbm.model import DrbmParams, predict_log_proba
from drbm.oracle import (
    EnumerationCapError,
    JointRbmView,
    conditional_by_enumeration,
    energy,
    free_energy,
    log_conditional_by_enumeration,
    partition_function,
)

BERNOULLI = StateSet.bernoulli()


def random_params(rng, n_inputs, n_hidden, n_classes):
    return DrbmParams(
        rng.normal(size=(n_inputs, n_hidden)),
        rng.normal(size=(n_classes, n_hidden)),
        rng.normal(size=n_hidden),
        rng.normal(size=n_classes),
    )


def zero_view(n_inputs, n_hidden, n_classes, state_set=BERNOULLI, **kwargs):
    return JointRbmView.from_params(
        DrbmParams.zeros(n_inputs, n_hidden, n_classes), state_set, **kwargs
    )


class TestEnergy:
    def test_all_zero_params(self):
        view = zero_view(2, 3, 2)
        assert energy(view, [1.0, 0.0], [0.0, 1.0], [1.0, 0.0, 1.0]) == 0.0

    def test_single_weight_term(self):
        params = DrbmParams(
            np.array([[2.0, 0.0], [0.0, 0.0]]),
            np.zeros((2, 2)),
            np.zeros(2),
            np.zeros(2),
        )
        view = JointRbmView.from_params(params, BERNOULLI)
        assert energy(view, [1.0, 0.0], [1.0, 0.0], [1.0, 0.0]) == -2.0

    def test_matches_independent_triple_loop(self):
        rng = np.random.default_rng(2)
        params = random_params(rng, 3, 2, 2)
        in_bias = rng.normal(size=3)
        view = JointRbmView.from_params(params, BERNOULLI, in_bias=in_bias)
        x = rng.uniform(0, 1, 3)
        h = [1.0, 0.0]
        y = 1
        expected = -sum(in_bias[i] * x[i] for i in range(3))
        expected -= params.y_bias[y]
        expected -= sum(params.h_bias[j] * h[j] for j in range(2))
        expected -= sum(
            x[i] * params.w_input[i, j] * h[j] for i in range(3) for j in range(2)
        )
        expected -= sum(params.w_class[y, j] * h[j] for j in range(2))
        got = energy(view, x, [0.0, 1.0], h)
        assert got == pytest.approx(expected, rel=1e-12)

    def test_rejects_invalid_hidden_state(self):
        view = zero_view(2, 2, 2)
        with pytest.raises(ValueError):
            energy(view, [0.0, 0.0], [1.0, 0.0], [0.5, 0.0])

    def test_rejects_bad_onehot(self):
        view = zero_view(2, 2, 2)
        with pytest.raises(ValueError):
            energy(view, [0.0, 0.0], [1.0, 1.0], [0.0, 0.0])


class TestFreeEnergy:
    def test_all_zero_params(self):
        view = zero_view(2, 3, 2)
        assert free_energy(view, [0.5, 0.5], 0) == pytest.approx(
            -3 * math.log(2), rel=1e-14
        )

    def test_single_unit_two_terms(self):
        rng = np.random.default_rng(3)
        params = random_params(rng, 2, 1, 2)
        view = JointRbmView.from_params(params, BERNOULLI)
        x = [0.3, 0.9]
        e0 = energy(view, x, [1.0, 0.0], [0.0])
        e1 = energy(view, x, [1.0, 0.0], [1.0])
        expected = -math.log(math.exp(-e0) + math.exp(-e1))
        assert free_energy(view, x, 0) == pytest.approx(expected, rel=1e-13)

    @pytest.mark.parametrize(
        "state_set", [BERNOULLI, StateSet.bipolar(), StateSet.binomial(4)], ids=str
    )
    def test_factorised_identity(self, state_set):
        rng = np.random.default_rng(4)
        params = random_params(rng, 4, 3, 3)
        in_bias = rng.normal(size=4)
        view = JointRbmView.from_params(params, state_set, in_bias=in_bias)
        x = rng.uniform(0, 1, 4)
        for y in range(3):
            alpha = params.h_bias + x @ params.w_input + params.w_class[y]
            factored = -(
                params.y_bias[y] + log_state_sum(state_set, alpha).sum()
            ) - float(in_bias @ x)
            assert free_energy(view, x, y) == pytest.approx(factored, abs=1e-10)

    def test_cap_refusal_names_count(self):
        view = zero_view(2, 8, 2, StateSet.binomial(8), cap=1000)
        with pytest.raises(EnumerationCapError) as err:
            free_energy(view, [0.0, 0.0], 0)
        assert err.value.required == 9**8
        assert str(9**8) in str(err.value)

    def test_class_log_scores_are_negated_free_energies(self):
        from drbm.model import class_log_scores

        rng = np.random.default_rng(10)
        params = random_params(rng, 4, 3, 3)
        view = JointRbmView.from_params(params, BERNOULLI)  # zero input bias
        x = rng.uniform(0, 1, 4)
        scores = class_log_scores(params, BERNOULLI, x)
        for y in range(3):
            assert scores[y] == pytest.approx(-free_energy(view, x, y), abs=1e-10)


class TestConditional:
    def test_uniform_for_zero_params(self):
        view = zero_view(3, 2, 4)
        probas = conditional_by_enumeration(view, [0.1, 0.5, 0.9])
        assert probas == pytest.approx([0.25] * 4, abs=1e-14)

    def test_bias_only_softmax(self):
        params = DrbmParams(
            np.zeros((2, 1)),
            np.zeros((2, 1)),
            np.zeros(1),
            np.array([math.log(3.0), 0.0]),
        )
        view = JointRbmView.from_params(params, BERNOULLI)
        # hidden factor is identical across classes, so only the biases count
        assert conditional_by_enumeration(view, [0.0, 0.0]) == pytest.approx(
            [0.75, 0.25], abs=1e-14
        )

    @pytest.mark.parametrize(
        "state_set",
        [BERNOULLI, StateSet.bipolar(), StateSet.binomial(1), StateSet.binomial(8)],
        ids=str,
    )
    def test_matches_model(self, state_set):
        rng = np.random.default_rng(5)
        for _ in range(10):
            params = random_params(rng, 4, 3, 3)
            view = JointRbmView.from_params(params, state_set)
            x = rng.uniform(0, 1, 4)
            want = np.asarray(log_conditional_by_enumeration(view, x))
            got = predict_log_proba(params, state_set, x).log_proba
            assert np.max(np.abs(got - want)) < 1e-10

    def test_input_bias_cancels(self):
        rng = np.random.default_rng(6)
        params = random_params(rng, 3, 2, 3)
        x = rng.uniform(0, 1, 3)
        base = np.asarray(
            conditional_by_enumeration(JointRbmView.from_params(params, BERNOULLI), x)
        )
        for _ in range(5):
            biased = JointRbmView.from_params(
                params, BERNOULLI, in_bias=rng.normal(size=3)
            )
            got = np.asarray(conditional_by_enumeration(biased, x))
            assert np.max(np.abs(got - base)) < 1e-12

    def test_state_order_does_not_matter(self):
        rng = np.random.default_rng(7)
        params = random_params(rng, 3, 3, 3)
        x = rng.uniform(0, 1, 3)
        view = JointRbmView.from_params(params, StateSet.binomial(3))
        base = np.asarray(log_conditional_by_enumeration(view, x))
        view.states = tuple(reversed(view.states))
        flipped = np.asarray(log_conditional_by_enumeration(view, x))
        assert np.max(np.abs(base - flipped)) < 1e-13


class TestPartitionFunction:
    def test_all_zero_params(self):
        view = zero_view(2, 1, 2)
        assert partition_function(view) == pytest.approx(math.log(16), rel=1e-14)

    def test_single_unit_hand_sum(self):
        params = DrbmParams(
            np.array([[1.5]]),
            np.zeros((2, 1)),
            np.zeros(1),
            np.zeros(2),
        )
        view = JointRbmView.from_params(params, BERNOULLI)
        # configurations: x in {0,1}, y in {0,1}, h in {0,1}
        total = sum(
            math.exp(x * 1.5 * h) for x in (0, 1) for _ in (0, 1) for h in (0, 1)
        )
        assert partition_function(view) == pytest.approx(math.log(total), rel=1e-13)

    def test_joint_probabilities_sum_to_one(self):
        rng = np.random.default_rng(8)
        params = random_params(rng, 3, 2, 3)
        view = JointRbmView.from_params(params, StateSet.binomial(2))
        log_z = partition_function(view)
        total = 0.0
        import itertools

        for x in itertools.product((0.0, 1.0), repeat=3):
            for y in range(3):
                onehot = [1.0 if k == y else 0.0 for k in range(3)]
                for h in itertools.product(view.states, repeat=2):
                    total += math.exp(-energy(view, list(x), onehot, list(h)) - log_z)
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_free_energy_consistency(self):
        rng = np.random.default_rng(9)
        params = random_params(rng, 3, 2, 2)
        view = JointRbmView.from_params(params, BERNOULLI)
        log_z = partition_function(view)
        total = 0.0
        import itertools

        for x in itertools.product((0.0, 1.0), repeat=3):
            for y in range(2):
                total += math.exp(-free_energy(view, list(x), y) - log_z)
        assert total == pytest.approx(1.0, abs=1e-10)

    def test_cap_refusal(self):
        view = zero_view(10, 4, 3, cap=100)
        with pytest.raises(EnumerationCapError):
            partition_function(view)
