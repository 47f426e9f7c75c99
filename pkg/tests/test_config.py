import pytest

from markov.order.config import RunConfig, SimulateConfig, load_run_config
from markov.order.errors import ConfigError
from markov.order.serializer import write_json


class TestRunConfig:

    def test_defaults(self):
        run = RunConfig()
        assert run.orders == [1]
        assert run.test.seed == 0
        assert run.simulate.env == 'tiger'

    def test_root_seed_and_workers_reach_every_section(self):
        run = RunConfig.from_dict({'seed': 7, 'workers': 3})
        assert run.test.seed == 7 and run.test.workers == 3
        assert run.ope.seed == 7
        assert run.bench.seed == 7 and run.bench.workers == 3
        assert run.fqi.workers == 3 and run.fqe.workers == 3

    def test_sections(self):
        run = RunConfig.from_dict({
            'test': {'Q': 4, 'B': 500, 'order': '1..3', 'regressor': {'num_features': 50}},
            'order_select': {'K_max': 4},
            'simulate': {'env': 'linear-hmdp', 'env_config': {'order': 2}, 'n_episodes': 10},
            'fqe': {'gamma': 0.8, 'policy': {'kind': 'uniform', 'action_count': 2}},
            'ope': {'method': 'is', 'behavior_policy': {'kind': 'uniform', 'action_count': 2}},
            'bench': {'kind': 'coverage', 'replications': 5}
        })
        assert run.test.Q == 4 and run.test.regressor.num_features == 50
        assert run.orders == [1, 2, 3]
        assert run.K_max == 4
        assert run.simulate.n_episodes == 10
        assert run.fqe.gamma == 0.8
        assert run.policy('target').kind == 'uniform'
        assert run.policy('ope_target') is None
        assert run.ope.method == 'is'
        assert run.bench.replications == 5

    @pytest.mark.parametrize('item', [
        {'tests': {}},
        {'test': {'QQ': 3}},
        {'test': {'Q': 1}},
        {'test': {'order': '3..1'}},
        {'test': []},
        {'simulate': {'env': 'gridworld'}},
        {'simulate': {'env_config': {'listen_error': 0.9}}},
        {'fqe': {'policy': {'kind': 'softmax', 'action_count': 2}}},
        {'format': 'parquet'},
        {'workers': 0}
    ])
    def test_invalid(self, item):
        with pytest.raises(ConfigError):
            RunConfig.from_dict(item)

    def test_override(self):
        run = RunConfig().override(seed=5, alpha=0.1, order='2', workers=None)
        assert run.seed == 5 and run.test.seed == 5
        assert run.test.alpha == 0.1 and run.ope.alpha == 0.1 and run.bench.test.alpha == 0.1
        assert run.orders == [2]
        assert run.workers == 1

    def test_override_rejects_bad_alpha(self):
        with pytest.raises(ConfigError):
            RunConfig().override(alpha=1.5)


class TestLoad:

    def test_no_path(self):
        assert load_run_config(None) == RunConfig()

    def test_report_reruns_its_config(self, tmp_path):
        run = RunConfig.from_dict({'seed': 3, 'test': {'B': 300, 'order': '2'}, 'bench': {'orders': [1, 2]}})
        path = write_json({'p_values': {}, 'config': run.to_dict()}, tmp_path / 'report.json')
        assert load_run_config(path) == run

    def test_missing(self, tmp_path):
        with pytest.raises(ConfigError):
            load_run_config(tmp_path / 'nope.json')

    def test_malformed(self, tmp_path):
        path = tmp_path / 'bad.json'
        path.write_text('{"seed": ')
        with pytest.raises(ConfigError):
            load_run_config(path)

    def test_not_an_object(self, tmp_path):
        path = tmp_path / 'list.json'
        path.write_text('[1, 2]')
        with pytest.raises(ConfigError):
            load_run_config(path)


def test_simulate_section_checks_sizes():
    with pytest.raises(ConfigError):
        SimulateConfig(n_episodes=0)
