import numpy as np
import pytest

from markov.order.constants import LISTEN
from markov.order.envs import Policy, TigerConfig, TigerEnv, simulate, tabular_tiger_mdp
from markov.order.errors import ConfigError, CoverageError, PolicyError
from markov.order.regress import RegressorSpec
from markov.order.rl import (
    QFunction,
    RlConfig,
    dp_policy_value,
    estimate_tabular_mdp,
    fqe,
    fqi,
    order_return_study,
    policy_table,
    value_iteration
)

TABULAR = RegressorSpec(kind='tabular')


class TestDynamicProgramming:

    def test_always_listen(self):
        mdp = tabular_tiger_mdp()
        result = dp_policy_value(mdp, Policy.fixed(LISTEN, 3), gamma=0.9)
        np.testing.assert_allclose(result.values, [-10.0, -10.0], atol=1e-8)
        assert result.J == pytest.approx(-10.0, abs=1e-8)

    def test_always_open_left(self):
        result = dp_policy_value(tabular_tiger_mdp(), Policy.fixed(0, 3), gamma=0.9)
        assert result.J == pytest.approx(-450.0, abs=1e-6)
        assert result.values[1] - result.values[0] == pytest.approx(110.0)

    def test_value_iteration(self):
        result = value_iteration(tabular_tiger_mdp(), gamma=0.9)
        assert result.J == pytest.approx(100.0, abs=1e-6)
        np.testing.assert_array_equal(result.policy, [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0]])

    def test_policy_table_checks_shape(self):
        with pytest.raises(PolicyError):
            policy_table(np.ones((2, 2)) / 2, tabular_tiger_mdp())


class TestEmpiricalMdp:

    def test_rows(self, revealed_tiger_data):
        mdp = estimate_tabular_mdp(revealed_tiger_data)
        assert mdp.n_states == 6
        sums = mdp.transitions.sum(axis=2)
        assert np.all((np.abs(sums - 1.0) < 1e-12) | (sums == 0.0))
        assert mdp.initial.sum() == pytest.approx(1.0)

    def test_close_to_truth(self, revealed_tiger_data):
        mdp = estimate_tabular_mdp(revealed_tiger_data)
        truth = tabular_tiger_mdp(include_signal=True)
        # empirical states are sorted by (signal, tiger)
        order = [0, 1, 4, 5, 2, 3]
        np.testing.assert_allclose(mdp.transitions[LISTEN], truth.transitions[LISTEN][order][:, order], atol=0.06)


class TestFittedEvaluation:

    def test_fqe_matches_dp_on_empirical_model(self, revealed_tiger_data):
        policy = Policy.epsilon_listen()
        _, value = fqe(revealed_tiger_data, policy, RlConfig(gamma=0.9, iterations=300, regressor=TABULAR))
        exact = dp_policy_value(estimate_tabular_mdp(revealed_tiger_data), policy, gamma=0.9)
        assert value == pytest.approx(exact.J, abs=1e-6)

    def test_fqi_opens_the_empty_door(self, revealed_tiger_data):
        q, policy = fqi(revealed_tiger_data, RlConfig(gamma=0.9, iterations=100, regressor=TABULAR))
        probs = policy.probabilities([[0.5, 0.0], [0.5, 1.0]])
        np.testing.assert_array_equal(probs, [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0]])
        assert q.action_count == 3

    def test_missing_action(self):
        ds = simulate(TigerEnv(), Policy.fixed(LISTEN, 3), 3, 5, seed=0)
        with pytest.raises(CoverageError):
            fqi(ds, RlConfig(iterations=2))

    def test_policy_size_mismatch(self, tiger_data):
        with pytest.raises(PolicyError):
            fqe(tiger_data, Policy.uniform(2), RlConfig(iterations=2))

    def test_q_function_reloads(self, tiger_data):
        q, _ = fqi(tiger_data, RlConfig(iterations=3, regressor=RegressorSpec(num_features=20)))
        clone = QFunction.from_dict(q.to_dict())
        obs = tiger_data.episodes[0].observations
        np.testing.assert_array_equal(clone.values(obs), q.values(obs))

    def test_from_table(self):
        mdp = tabular_tiger_mdp()
        q = QFunction.from_table(mdp, [[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
        np.testing.assert_array_equal(q.values([[0.5, 1.0]]), [[4.0, 5.0, 6.0]])
        assert Policy.greedy(q).probabilities([[0.5, 0.0]])[0, 2] == 1.0

    def test_invalid_config(self):
        with pytest.raises(ConfigError):
            RlConfig(gamma=1.0)


class TestOrderReturnStudy:

    def test_report(self, linear_data):
        cfg = RlConfig(iterations=3, regressor=RegressorSpec(num_features=30, seed=1))
        report = order_return_study(linear_data, [1, 2], n_splits=3, cfg=cfg, seed=2)
        assert report.returns.shape == (3, 2)
        assert report.compare == (2, 1)
        assert report.trials <= 3 and 0 <= report.wins <= report.trials
        assert 0.0 < report.sign_test_p <= 1.0
        assert report.best_order in (1, 2)

    def test_deterministic(self, linear_data):
        cfg = RlConfig(iterations=2, regressor=RegressorSpec(num_features=20))
        first = order_return_study(linear_data, [1, 2], n_splits=2, cfg=cfg, seed=5)
        second = order_return_study(linear_data, [1, 2], n_splits=2, cfg=cfg, seed=5)
        np.testing.assert_array_equal(first.returns, second.returns)

    def test_bad_compare(self, linear_data):
        with pytest.raises(ConfigError):
            order_return_study(linear_data, [1, 2], n_splits=1, compare=(3, 1))


class TestPolicyImprovement:

    def test_greedy_policy_beats_the_logger(self, revealed_tiger_data):
        mdp = tabular_tiger_mdp(include_signal=True)
        _, greedy = fqi(revealed_tiger_data, RlConfig(gamma=0.9, iterations=100, regressor=TABULAR))
        logger_value = dp_policy_value(mdp, Policy.epsilon_listen(), gamma=0.9)
        greedy_value = dp_policy_value(mdp, greedy, gamma=0.9)
        assert greedy_value.J >= logger_value.J - 0.05 * np.ptp(logger_value.values)
        assert greedy_value.J == pytest.approx(value_iteration(mdp, gamma=0.9).J, abs=1e-6)
