import pytest

from markov.order.bench import BenchSpec, error_bar, run_bench
from markov.order.constants import ORDER_INCONCLUSIVE, POMDP_SUSPECT
from markov.order.errors import ConfigError

TEST = {'Q': 3, 'J': 3, 'L': 3, 'B': 200, 'regressor': {'num_features': 30}}


def test_error_bar():
    assert error_bar(0.5, 100) == pytest.approx(0.1)
    assert error_bar(0.0, 100) == 0.0


class TestRuns:

    def test_rejection(self):
        spec = BenchSpec(kind='rejection', replications=2, n_episodes=10, horizon=10, orders=(1, 2), test=TEST)
        report = run_bench(spec)
        assert set(report.summary) == {'1', '2'}
        for cell in report.summary.values():
            assert cell['proportion'] in (0.0, 0.5, 1.0)
            assert cell['lower'] <= cell['proportion'] <= cell['upper']
        assert len(report.outcomes) == 2

    def test_order_selection(self):
        spec = BenchSpec(kind='order-selection', replications=2, n_episodes=10, horizon=10, K_max=2, test=TEST)
        summary = run_bench(spec).summary
        assert sum(summary['frequencies'].values()) == pytest.approx(1.0)
        assert summary['modal'] in ('1', '2', POMDP_SUSPECT, ORDER_INCONCLUSIVE)

    def test_coverage(self):
        spec = BenchSpec(
            kind='coverage', replications=2, n_episodes=30, horizon=20,
            env_config={'reveal_state': True},
            ope={'behavior': 'tabular', 'rl': {'iterations': 40, 'regressor': {'kind': 'tabular'}}}
        )
        report = run_bench(spec)
        assert report.summary['proportion'] in (0.0, 0.5, 1.0)
        assert report.summary['mean_half_width'] > 0
        assert all(o['truth'] == report.summary['truth'] for o in report.outcomes)

    def test_coverage_needs_revealed_tiger(self):
        spec = BenchSpec(kind='coverage', replications=1, n_episodes=5, horizon=5)
        with pytest.raises(ConfigError):
            run_bench(spec)

    def test_order_return(self):
        spec = BenchSpec(
            kind='order-return', replications=1, env='linear-hmdp', n_episodes=10, horizon=10,
            orders=(1, 2), n_splits=2, rl={'iterations': 2, 'regressor': {'num_features': 20}}
        )
        summary = run_bench(spec).summary
        assert set(summary['means']) == {'1', '2'}
        assert summary['best'] in ('1', '2')

    def test_independent_of_workers(self):
        base = dict(kind='rejection', replications=3, n_episodes=8, horizon=8, test=TEST)
        serial = run_bench(BenchSpec(workers=1, **base))
        parallel = run_bench(BenchSpec(workers=2, **base))
        assert serial.outcomes == parallel.outcomes
        assert serial.summary == parallel.summary


@pytest.mark.parametrize('kwargs', [
    {'kind': 'power'},
    {'env': 'gridworld'},
    {'replications': 0},
    {'orders': ()},
    {'test': {'Q': 1}}
])
def test_invalid_spec(kwargs):
    with pytest.raises(ConfigError):
        BenchSpec(**kwargs)
