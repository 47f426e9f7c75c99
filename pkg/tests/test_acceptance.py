"""
Monte Carlo acceptance checks. Each takes minutes; run them with
`pytest -m slow`.
"""

import numpy as np
import pytest

from markov.order.bench import BenchSpec, error_bar, run_bench
from markov.order.constants import LISTEN, OPEN_LEFT, OPEN_RIGHT, TIGER_SENTINEL
from markov.order.envs import (
    LinearHmdpConfig,
    Policy,
    TigerConfig,
    TigerEnv,
    linear_hmdp_simulate,
    simulate,
    tabular_tiger_mdp
)
from markov.order.regress import RegressorSpec
from markov.order.rl import RlConfig, dp_policy_value, fqe, order_return_study

pytestmark = pytest.mark.slow

TEST = {'Q': 4, 'J': 8, 'L': 8, 'B': 500, 'regressor': {'num_features': 100}}
WORKERS = 8
ALPHA = 0.05


def within_three_sigma(p, R, target=ALPHA):
    return abs(p - target) <= 3 * np.sqrt(target * (1 - target) / R)


def rejection(R, seed, orders=(1,), test=TEST, **kwargs):
    spec = BenchSpec(kind='rejection', replications=R, orders=orders, test=test, seed=seed, workers=WORKERS, **kwargs)
    return run_bench(spec).summary


def test_size_on_order_one_linear_mdp():
    summary = rejection(200, seed=1, env='linear-hmdp', env_config={'order': 1}, n_episodes=100, horizon=100)
    assert 0.02 <= summary['1']['proportion'] <= 0.09


def test_power_on_hidden_tiger():
    summary = rejection(100, seed=2, orders=(1, 2, 3), n_episodes=100, horizon=50)
    for k in ('1', '2', '3'):
        assert summary[k]['proportion'] >= 0.8


def test_size_on_revealed_tiger():
    summary = rejection(
        100, seed=3, orders=(1, 2, 3), n_episodes=100, horizon=50, env_config={'reveal_state': True}
    )
    for k in ('1', '2', '3'):
        assert within_three_sigma(summary[k]['proportion'], 100)


def test_order_three_is_selected():
    spec = BenchSpec(
        kind='order-selection', replications=50, env='linear-hmdp', env_config={'order': 3},
        n_episodes=200, horizon=100, K_max=4, test=TEST, seed=4, workers=WORKERS
    )
    summary = run_bench(spec).summary
    assert summary['modal'] == '3'
    assert summary['frequencies']['3'] >= 0.6


@pytest.mark.parametrize('learner', ['forward_learner', 'backward_learner'])
def test_one_constant_nuisance_keeps_size(learner):
    test = dict(TEST, **{learner: 'constant'})
    summary = rejection(
        100, seed=5, test=test, env='linear-hmdp', env_config={'order': 1}, n_episodes=100, horizon=50
    )
    assert summary['1']['proportion'] <= 0.10


def test_power_grows_with_sample_size():
    powers = [
        rejection(50, seed=6, env='linear-hmdp', env_config={'order': 2}, n_episodes=n, horizon=30)['1']['proportion']
        for n in (50, 100, 200)
    ]
    for smaller, larger in zip(powers, powers[1:]):
        assert smaller <= larger + error_bar(larger, 50)


def test_fqe_with_random_features_matches_dp():
    # listen while the tiger is hidden behind a signal, open the empty door right after a reset
    mdp = tabular_tiger_mdp(include_signal=True)
    table = []
    for signal, tiger in mdp.state_observations:
        row = np.zeros(3)
        if signal == TIGER_SENTINEL:
            row[OPEN_RIGHT if tiger == 0.0 else OPEN_LEFT] = 1.0
        else:
            row[LISTEN] = 1.0
        table.append(row)
    policy = Policy.tabular(mdp.state_observations, table)

    exact = dp_policy_value(mdp, policy, gamma=0.9)
    ds = simulate(TigerEnv(TigerConfig(reveal_state=True)), Policy.epsilon_listen(), 200, 50, seed=7)
    _, value = fqe(ds, policy, RlConfig(gamma=0.9, iterations=150, regressor=RegressorSpec(ridge=1e-6, seed=1)))

    assert abs(value - exact.J) <= 0.05 * np.ptp(exact.values)


def coverage(R, n, seed):
    spec = BenchSpec(
        kind='coverage', replications=R, n_episodes=n, horizon=30,
        env_config={'reveal_state': True},
        ope={'behavior': 'tabular', 'rl': {'iterations': 100, 'regressor': {'kind': 'tabular'}}},
        seed=seed, workers=WORKERS
    )
    return run_bench(spec).summary


def test_interval_coverage():
    assert coverage(200, 200, seed=8)['proportion'] >= 0.90


def test_interval_shrinks_with_sample_size():
    ratio = coverage(20, 100, seed=9)['mean_half_width'] / coverage(20, 400, seed=10)['mean_half_width']
    assert 1.3 <= ratio <= 3.1


def test_correct_order_earns_more_return():
    # only the third lag drives the next observation, so O_t alone cannot anticipate it
    cfg = LinearHmdpConfig(
        order=3, obs_dim=1, action_count=2,
        coefficients=[[[0.0]], [[0.0]], [[0.9]]],
        action_effects=[[[-2.0], [2.0]], [[0.0], [0.0]], [[0.0], [0.0]]],
        reward_kind='negative-abs'
    )
    ds = linear_hmdp_simulate(cfg, Policy.uniform(2), n=200, T=50, seed=11)
    rl = RlConfig(gamma=0.9, iterations=50, regressor=RegressorSpec(seed=2))
    report = order_return_study(ds, [1, 3], n_splits=20, cfg=rl, seed=12)
    assert report.means[3] > report.means[1]
    assert report.sign_test_p < 0.05
