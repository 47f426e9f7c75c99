import numpy as np
import pytest
from sklearn.kernel_approximation import RBFSampler

from markov.order.constants import LISTEN
from markov.order.envs import Policy, TigerConfig, TigerEnv, simulate, tabular_tiger_mdp
from markov.order.errors import ConfigError, CoverageError
from markov.order.ope import (
    OpeConfig,
    cross_fit_ope,
    dr_estimate,
    fit_behavior,
    floor_probabilities,
    wald_ci,
    zero_q
)
from markov.order.regress import RegressorSpec
from markov.order.rl import QFunction, RlConfig, dp_policy_value, fqe


def signal_policy():
    """ Opens left after a left signal 30% of the time and always listens after a right one. """

    mdp = tabular_tiger_mdp(include_signal=True)
    rows = []
    for signal, _ in mdp.state_observations:
        if signal == 0.0:
            rows.append([0.3, 0.0, 0.7])
        elif signal == 1.0:
            rows.append([0.0, 0.0, 1.0])
        else:
            rows.append([0.1, 0.1, 0.8])
    return Policy.tabular(mdp.state_observations, rows)


def discounted_return(episode, gamma):
    return float(np.sum(gamma ** np.arange(episode.horizon) * episode.rewards))


@pytest.fixture
def on_policy(tiger_data):
    policy = Policy.epsilon_listen()
    behavior = fit_behavior(tiger_data, kind='policy', policy=policy)
    return tiger_data, policy, behavior


class TestFloor:

    def test_mass_is_moved_to_small_entries(self):
        out = floor_probabilities([[1.0, 0.0, 0.0]], 0.1)
        np.testing.assert_allclose(out, [[0.8, 0.1, 0.1]])

    def test_rows_stay_distributions(self):
        probs = np.random.default_rng(0).dirichlet([0.2] * 4, size=50)
        out = floor_probabilities(probs, 0.05)
        np.testing.assert_allclose(out.sum(axis=1), 1.0)
        assert out.min() >= 0.05 - 1e-12

    def test_untouched_when_above_floor(self):
        np.testing.assert_allclose(floor_probabilities([[0.5, 0.5]], 0.2), [[0.5, 0.5]])


class TestWald:

    def test_interval(self):
        low, high = wald_ci(1.0, 0.5, 0.05)
        assert high - 1.0 == pytest.approx(1.959964 * 0.5, rel=1e-6)
        assert 1.0 - low == pytest.approx(high - 1.0)

    def test_invalid(self):
        with pytest.raises(ConfigError):
            wald_ci(0.0, -1.0)


class TestEstimators:

    def test_importance_sampling_on_policy_is_the_return(self, on_policy):
        ds, policy, behavior = on_policy
        report = dr_estimate(ds, policy, zero_q(ds.obs_dim, 3), behavior, gamma=0.9, method='is')
        expected = [discounted_return(e, 0.9) for e in ds.episodes]
        np.testing.assert_allclose(report.scores, expected)
        assert report.clip_fraction == 0.0

    def test_doubly_robust_with_zero_q_is_importance_sampling(self, tiger_data):
        behavior = fit_behavior(tiger_data, kind='uniform')
        policy = Policy.epsilon_listen(listen_prob=0.6)
        q = zero_q(tiger_data.obs_dim, 3)
        dr = dr_estimate(tiger_data, policy, q, behavior, gamma=0.9, method='dr')
        is_ = dr_estimate(tiger_data, policy, q, behavior, gamma=0.9, method='is')
        np.testing.assert_allclose(dr.scores, is_.scores)

    def test_direct_method(self, on_policy):
        ds, policy, behavior = on_policy
        q, value = fqe(ds, policy, RlConfig(iterations=5, regressor=RegressorSpec(num_features=20)))
        report = dr_estimate(ds, policy, q, behavior, gamma=0.9, method='dm')
        assert report.estimate == pytest.approx(value)

    def test_interval_from_scores(self, on_policy):
        ds, policy, behavior = on_policy
        report = dr_estimate(ds, policy, zero_q(ds.obs_dim, 3), behavior, gamma=0.9, alpha=0.1)
        se = np.std(report.scores, ddof=1) / np.sqrt(ds.n_episodes)
        assert report.se == pytest.approx(se)
        assert report.ci == pytest.approx(wald_ci(report.estimate, se, 0.1))

    def test_ratio_clipping(self, tiger_data):
        behavior = fit_behavior(tiger_data, kind='uniform')
        report = dr_estimate(
            tiger_data, Policy.fixed(LISTEN, 3), zero_q(tiger_data.obs_dim, 3), behavior,
            gamma=0.9, method='is', ratio_clip=10.0
        )
        assert report.clip_fraction > 0
        assert any('clipped' in w for w in report.warnings)

    def test_single_episode(self, on_policy):
        ds, policy, behavior = on_policy
        report = dr_estimate(ds.subset([0]), policy, zero_q(ds.obs_dim, 3), behavior, gamma=0.9)
        assert report.se == 0.0 and report.warnings

    def test_unknown_method(self, on_policy):
        ds, policy, behavior = on_policy
        with pytest.raises(ConfigError):
            dr_estimate(ds, policy, zero_q(ds.obs_dim, 3), behavior, method='wis')


class TestBehavior:

    def test_tabular_recovers_frequencies(self):
        ds = simulate(TigerEnv(), Policy.epsilon_listen(), 50, 60, seed=1)
        model = fit_behavior(ds, kind='tabular', floor=0.0)
        probs = model.probabilities(np.array([[0.0], [1.0], [0.5]]))
        np.testing.assert_allclose(probs[:, LISTEN], 0.8, atol=0.05)

    def test_logistic_is_a_distribution(self, tiger_data):
        model = fit_behavior(tiger_data, kind='logistic', spec=RegressorSpec(num_features=20))
        probs = model.probabilities(tiger_data.episodes[0].observations)
        np.testing.assert_allclose(probs.sum(axis=1), 1.0)
        assert probs.min() >= 0.01 - 1e-12
        assert model.calibration > 1.0 / 3

    def test_missing_action(self):
        ds = simulate(TigerEnv(), Policy.fixed(LISTEN, 3), 3, 5, seed=0)
        with pytest.raises(CoverageError):
            fit_behavior(ds, kind='tabular')

    @pytest.mark.parametrize('kwargs', [
        {'kind': 'knn'},
        {'kind': 'tabular', 'floor': 0.5},
        {'kind': 'policy'}
    ])
    def test_invalid(self, tiger_data, kwargs):
        with pytest.raises(ConfigError):
            fit_behavior(tiger_data, **kwargs)


class TestCrossFit:

    def test_report(self, revealed_tiger_data):
        cfg = OpeConfig(behavior='tabular', rl=RlConfig(iterations=60, regressor=RegressorSpec(kind='tabular')))
        report = cross_fit_ope(revealed_tiger_data, Policy.epsilon_listen(), cfg)
        assert report.n_episodes == revealed_tiger_data.n_episodes
        assert report.ci[0] < report.estimate < report.ci[1]
        assert report.config['behavior'] == 'tabular'

    def test_in_sample(self, on_policy):
        ds, policy, _ = on_policy
        cfg = OpeConfig(K=1, q_kind='zero', behavior='policy')
        report = cross_fit_ope(ds, policy, cfg, behavior_policy=policy)
        expected = np.mean([discounted_return(e, cfg.gamma) for e in ds.episodes])
        assert report.estimate == pytest.approx(expected)

    def test_invalid_config(self):
        with pytest.raises(ConfigError):
            OpeConfig(method='magic')
        with pytest.raises(ConfigError):
            OpeConfig(ratio_clip=0.5)


class TestDoubleRobustness:

    GAMMA = 0.5

    @pytest.fixture(scope='class')
    def truth(self):
        return dp_policy_value(tabular_tiger_mdp(include_signal=True), signal_policy(), gamma=self.GAMMA)

    def revealed(self, n, seed):
        return simulate(TigerEnv(TigerConfig(reveal_state=True)), Policy.epsilon_listen(), n, 30, seed=seed)

    @pytest.mark.parametrize('n', [100, 400])
    def test_exact_q_with_uniform_behavior_model(self, truth, n):
        ds = self.revealed(n, seed=n)
        q = QFunction.from_table(tabular_tiger_mdp(include_signal=True), truth.q)
        report = dr_estimate(ds, signal_policy(), q, fit_behavior(ds, kind='uniform'), gamma=self.GAMMA)
        assert abs(report.estimate - truth.J) <= 3 * report.se

    @pytest.mark.parametrize('n', [100, 400])
    def test_zero_q_with_exact_behavior_model(self, truth, n):
        ds = self.revealed(n, seed=n + 1)
        behavior = fit_behavior(ds, kind='policy', policy=Policy.epsilon_listen())
        report = dr_estimate(ds, signal_policy(), zero_q(ds.obs_dim, 3), behavior, gamma=self.GAMMA)
        assert abs(report.estimate - truth.J) <= 3 * report.se


class TestLogisticFeatures:

    def test_random_features_feed_the_classifier(self, tiger_data):
        model = fit_behavior(tiger_data, kind='logistic', spec=RegressorSpec(num_features=20, bandwidth=1.0))
        sampler = model.estimator.steps[0][1]
        assert isinstance(sampler, RBFSampler)
        assert sampler.n_components == 20
        assert sampler.gamma == pytest.approx(0.5)
