import json

import pytest
from click.testing import CliRunner

from markov.order.cli import app
from markov.order.data import load_dataset

FAST = {
    'test': {'Q': 3, 'J': 3, 'L': 3, 'B': 200, 'regressor': {'num_features': 30}},
    'simulate': {'env': 'tiger', 'n_episodes': 12, 'horizon': 10},
    'fqi': {'iterations': 3, 'regressor': {'num_features': 20}},
    'fqe': {'iterations': 3, 'regressor': {'num_features': 20}},
    'ope': {'behavior': 'tabular', 'rl': {'iterations': 5, 'regressor': {'kind': 'tabular'}}}
}


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def config(tmp_path):
    path = tmp_path / 'config.json'
    path.write_text(json.dumps(FAST))
    return str(path)


@pytest.fixture
def dataset(runner, config, tmp_path):
    path = tmp_path / 'data.csv'
    result = runner.invoke(app, ['simulate', '--config', config, '--seed', '1', '--out', str(path)])
    assert result.exit_code == 0, result.output
    return str(path)


def invoke(runner, *args):
    return runner.invoke(app, [str(a) for a in args])


class TestSimulate:

    def test_writes_dataset(self, dataset):
        ds = load_dataset(dataset)
        assert ds.n_episodes == 12
        assert ds.horizons == [10] * 12

    def test_json_format(self, runner, config, tmp_path):
        out = tmp_path / 'data.json'
        result = invoke(runner, 'simulate', '--config', config, '--format', 'json', '--out', out)
        assert result.exit_code == 0
        assert load_dataset(out).action_set == ('open-left', 'open-right', 'listen')


class TestMarkovCommands:

    def test_report(self, runner, config, dataset, tmp_path):
        out = tmp_path / 'markov_test.json'
        result = invoke(runner, 'test-markov', '--config', config, '--data', dataset, '--order', '1..2', '--out', out)
        assert result.exit_code == 0, result.output
        report = json.loads(out.read_text())
        assert sorted(report['p_values']) == ['1', '2']
        assert [r['order'] for r in report['reports']] == [1, 2]
        assert report['config']['test']['order'] == '1..2'
        assert 'runtime_seconds' not in report

    def test_reruns_are_byte_identical(self, runner, config, dataset, tmp_path):
        first, second = tmp_path / 'a.json', tmp_path / 'b.json'
        invoke(runner, 'test-markov', '--config', config, '--data', dataset, '--out', first, '--workers', 1)
        invoke(runner, 'test-markov', '--config', config, '--data', dataset, '--out', second, '--workers', 2)
        assert first.read_bytes() == second.read_bytes()

    def test_report_as_config(self, runner, config, dataset, tmp_path):
        first, second = tmp_path / 'a.json', tmp_path / 'b.json'
        invoke(runner, 'test-markov', '--config', config, '--data', dataset, '--out', first, '--alpha', 0.1)
        result = invoke(runner, 'test-markov', '--config', first, '--data', dataset, '--out', second)
        assert result.exit_code == 0
        assert first.read_bytes() == second.read_bytes()

    def test_select_order(self, runner, config, dataset, tmp_path):
        out = tmp_path / 'order.json'
        result = invoke(runner, 'select-order', '--config', config, '--data', dataset, '--order', '2', '--out', out)
        assert result.exit_code == 0, result.output
        report = json.loads(out.read_text())
        assert report['K_max'] == 2
        assert 'Verdict' in result.output


class TestRlCommands:

    def test_fqi_then_fqe(self, runner, config, dataset, tmp_path):
        fqi_out, fqe_out = tmp_path / 'fqi.json', tmp_path / 'fqe.json'
        result = invoke(runner, 'fqi', '--config', config, '--data', dataset, '--out', fqi_out)
        assert result.exit_code == 0, result.output
        assert json.loads(fqi_out.read_text())['policy']['kind'] == 'greedy'

        result = invoke(runner, 'fqe', '--config', config, '--data', dataset, '--policy', fqi_out, '--out', fqe_out)
        assert result.exit_code == 0, result.output
        assert 'J' in json.loads(fqe_out.read_text())

    def test_ope_ci(self, runner, config, dataset, tmp_path):
        out = tmp_path / 'ope.json'
        result = invoke(runner, 'ope-ci', '--config', config, '--data', dataset, '--out', out)
        assert result.exit_code == 0, result.output
        report = json.loads(out.read_text())
        assert report['ci'][0] <= report['estimate'] <= report['ci'][1]


class TestExitCodes:

    def test_missing_data(self, runner, config, tmp_path):
        out = tmp_path / 'report.json'
        result = invoke(runner, 'test-markov', '--config', config, '--data', tmp_path / 'none.csv', '--out', out)
        assert result.exit_code == 3
        assert not out.exists()

    def test_malformed_data(self, runner, config, tmp_path):
        data = tmp_path / 'bad.csv'
        data.write_text('episode,t,a,r,o_1\ne,0,x,1.0,abc\ne,1,,,0.0\n')
        result = invoke(runner, 'test-markov', '--config', config, '--data', data, '--out', tmp_path / 'r.json')
        assert result.exit_code == 3

    def test_bad_config(self, runner, tmp_path, dataset):
        path = tmp_path / 'bad.json'
        path.write_text(json.dumps({'test': {'Q': 1}}))
        result = invoke(runner, 'test-markov', '--config', path, '--data', dataset)
        assert result.exit_code == 2

    def test_bad_order(self, runner, config, dataset):
        result = invoke(runner, 'test-markov', '--config', config, '--data', dataset, '--order', '3..1')
        assert result.exit_code == 2

    def test_range_where_one_order_is_needed(self, runner, config, dataset):
        result = invoke(runner, 'fqi', '--config', config, '--data', dataset, '--order', '1..2')
        assert result.exit_code == 2

    def test_no_command_prints_help(self, runner):
        result = invoke(runner)
        assert result.exit_code == 0
        assert 'test-markov' in result.output
