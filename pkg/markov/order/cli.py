#   Copyright (c) 2021, Zenqi

# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:

# The above copyright notice and this permission notice shall be included in
# all copies or substantial portions of the Software.

# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN
# THE SOFTWARE.

import time
import pathlib
import functools
import dataclasses
from typing import Optional

import click

from markov.order.bench import run_bench
from markov.order.config import RunConfig, load_run_config
from markov.order.constants import EXIT_DATA, EXIT_USAGE
from markov.order.data import augment_order, load_dataset, save_dataset
from markov.order.envs import Policy, default_policy, make_env, simulate
from markov.order.errors import (
    ConfigError,
    ERROR_CODES,
    MarkovOrderError,
    throw
)
from markov.order.logs import configure_logging, logger
from markov.order.markov_test import order_test, select_order
from markov.order.ope import cross_fit_ope
from markov.order.rl import fqe, fqi
from markov.order.serializer import read_json, to_jsonable, write_json
from markov.order.utils import format_row, parse_orders, print_banner


def config_option(f):
    f = click.option('--config', 'config_path', type=click.Path(), help='JSON run config (or a report to rerun).')(f)
    f = click.option('--seed', type=int, help='Root seed of every random stream.')(f)
    f = click.option('--workers', type=int, help='Number of joblib workers.')(f)
    f = click.option('--out', type=click.Path(), help='Output file.')(f)
    return f


def data_option(f):
    return click.option('--data', 'data_path', type=click.Path(), required=True, help='Dataset file (csv or json).')(f)


def command(f):
    """
    Map package errors to exit codes: configuration errors exit
    with 2, every other error with 3. Anything else is logged with
    its traceback and re-raised.
    """

    caught = logger.catch(exclude=MarkovOrderError, reraise=True)(f)

    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return caught(*args, **kwargs)
        except ConfigError as error:
            click.secho(str(error), fg='red', err=True)
            ctx.exit(EXIT_USAGE)
        except MarkovOrderError as error:
            click.secho(str(error), fg='red', err=True)
            ctx.exit(EXIT_DATA)

    return wrapper


def resolve(config_path, **flags) -> RunConfig:
    run = load_run_config(config_path).override(**flags)
    if run.log:
        configure_logging(level=run.log)
    return run


def single_order(run: RunConfig) -> int:
    orders = run.orders
    if len(orders) != 1:
        throw(
            error_cls=ConfigError,
            message="--order must name a single order here, got '%s'" % run.order,
            code=ERROR_CODES['invalid_config']
        )
    return orders[0]


def read_policy(path: Optional[str], fallback: Optional[Policy]) -> Optional[Policy]:
    """ A policy file holds a policy object or a report with a `policy` key. """

    if path is None:
        return fallback
    if not pathlib.Path(path).is_file():
        throw(
            error_cls=ConfigError,
            message="Policy file '%s' not found" % path,
            code=ERROR_CODES['not_found']
        )
    item = read_json(path)
    return Policy.from_dict(item.get('policy', item))


def without_workers(item):
    """ Worker counts never change results, so reports omit them. """

    if isinstance(item, dict):
        return {k: without_workers(v) for k, v in item.items() if k != 'workers'}
    if isinstance(item, (list, tuple)):
        return [without_workers(v) for v in item]
    return item


def emit(report: dict, run: RunConfig, out: Optional[str], default: str, started: float) -> pathlib.Path:
    report['config'] = run.to_dict()
    report = without_workers(to_jsonable(report))
    if run.record_runtime:
        report['runtime_seconds'] = time.perf_counter() - started
    path = write_json(report, out or run.out or default)
    click.echo('Report written to %s' % path)
    return path


@click.group(invoke_without_command=True)
@click.pass_context
def app(ctx):
    """
    Test the Markov order of offline reinforcement-learning data.
    """

    if ctx.invoked_subcommand is None:
        print_banner()
        click.echo(ctx.get_help())


@app.command('simulate')
@config_option
@click.option('--format', 'format', type=click.Choice(['csv', 'json']), help='Dataset format.')
@command
def simulate_cmd(config_path, seed, workers, out, format):
    """
    Simulate a dataset from the configured environment.
    """

    run = resolve(config_path, seed=seed, workers=workers, format=format)
    section = run.simulate
    env = make_env(section.env, section.env_config)
    policy = Policy.from_dict(section.policy) if section.policy else default_policy(env)

    ds = simulate(env, policy, section.n_episodes, section.horizon, run.seed, workers=run.workers)
    path = save_dataset(ds, out or run.out or 'dataset.%s' % (run.format or 'csv'), format=run.format)
    click.echo('Wrote %d episodes (%d transitions) to %s' % (ds.n_episodes, ds.n_transitions, path))


@app.command('test-markov')
@config_option
@data_option
@click.option('--alpha', type=float, help='Significance level.')
@click.option('--order', type=str, help="Order to test, or a range such as '1..3'.")
@command
def test_markov_cmd(config_path, seed, workers, out, data_path, alpha, order):
    """
    Test whether the data is a k-th order MDP for each k.
    """

    started = time.perf_counter()
    run = resolve(config_path, seed=seed, workers=workers, alpha=alpha, order=order)
    ds = load_dataset(data_path)

    reports = [order_test(ds, k, run.test) for k in run.orders]
    click.echo(format_row('order', [r.order for r in reports]))
    click.echo(format_row('p-value', [r.p_value for r in reports]))
    click.echo(format_row('reject', ['yes' if r.reject else 'no' for r in reports]))

    emit({
        'p_values': {str(r.order): r.p_value for r in reports},
        'reports': [r.to_dict() for r in reports]
    }, run, out, 'markov_test.json', started)


@app.command('select-order')
@config_option
@data_option
@click.option('--alpha', type=float, help='Significance level.')
@click.option('--order', type=str, help='Largest order to try (overrides order_select.K_max).')
@command
def select_order_cmd(config_path, seed, workers, out, data_path, alpha, order):
    """
    Select the smallest order under which the data is Markov.
    """

    started = time.perf_counter()
    run = resolve(config_path, seed=seed, workers=workers, alpha=alpha)
    if order is not None:
        try:
            run = dataclasses.replace(run, K_max=max(parse_orders(order)))
        except ValueError as error:
            throw(
                error_cls=ConfigError,
                message="--order: %s" % error,
                code=ERROR_CODES['invalid_config']
            )
    ds = load_dataset(data_path)

    report = select_order(ds, run.K_max, run.test)
    click.echo(format_row('order', list(report.orders)))
    click.echo(format_row('p-value', list(report.p_values)))
    click.echo('Verdict: %s' % report.verdict)
    emit(report.to_dict(), run, out, 'order_selection.json', started)


@app.command('fqi')
@config_option
@data_option
@click.option('--order', type=str, help='Augment the data to this order first.')
@command
def fqi_cmd(config_path, seed, workers, out, data_path, order):
    """
    Fitted Q-iteration; writes the Q-function and its greedy policy.
    """

    started = time.perf_counter()
    run = resolve(config_path, seed=seed, workers=workers, order=order)
    ds = augment_order(load_dataset(data_path), single_order(run))

    q, policy = fqi(ds, run.fqi)
    initial = [e.observations[0] for e in ds.episodes]
    value = float(q.values(initial).max(axis=1).mean())
    click.echo('Mean greedy value at the initial observations: %.4f' % value)
    emit({'order': single_order(run), 'initial_value': value, 'policy': policy.to_dict()},
         run, out, 'fqi.json', started)


@app.command('fqe')
@config_option
@data_option
@click.option('--order', type=str, help='Augment the data to this order first.')
@click.option('--policy', 'policy_path', type=click.Path(), help='Policy file (e.g. an fqi report).')
@command
def fqe_cmd(config_path, seed, workers, out, data_path, order, policy_path):
    """
    Fitted Q-evaluation of a policy (uniform by default).
    """

    started = time.perf_counter()
    run = resolve(config_path, seed=seed, workers=workers, order=order)
    ds = augment_order(load_dataset(data_path), single_order(run))
    policy = read_policy(policy_path, run.policy('target')) or Policy.uniform(ds.action_count)

    q, value = fqe(ds, policy, run.fqe)
    click.echo('FQE estimate J = %.4f' % value)
    emit({'order': single_order(run), 'J': value, 'q': q.to_dict()}, run, out, 'fqe.json', started)


@app.command('ope-ci')
@config_option
@data_option
@click.option('--alpha', type=float, help='One minus the interval level.')
@click.option('--order', type=str, help='Augment the data to this order first.')
@click.option('--policy', 'policy_path', type=click.Path(), help='Target policy file.')
@command
def ope_ci_cmd(config_path, seed, workers, out, data_path, alpha, order, policy_path):
    """
    Cross-fitted doubly robust confidence interval of J(pi).
    """

    started = time.perf_counter()
    run = resolve(config_path, seed=seed, workers=workers, alpha=alpha, order=order)
    ds = augment_order(load_dataset(data_path), single_order(run))
    policy = read_policy(policy_path, run.policy('ope_target')) or Policy.uniform(ds.action_count)

    report = cross_fit_ope(ds, policy, run.ope, behavior_policy=run.policy('behavior_policy'))
    click.echo('J = %.4f, %d%% CI = [%.4f, %.4f]' % (
        report.estimate, round(100 * (1 - report.alpha)), report.ci[0], report.ci[1]
    ))
    emit(report.to_dict(), run, out, 'ope_ci.json', started)


@app.command('bench')
@config_option
@click.option('--alpha', type=float, help='Significance level of the tests.')
@click.option('--order', type=str, help="Orders to test, e.g. '1..3'.")
@command
def bench_cmd(config_path, seed, workers, out, alpha, order):
    """
    Monte Carlo size, power, coverage or order-return study.
    """

    started = time.perf_counter()
    run = resolve(config_path, seed=seed, workers=workers, alpha=alpha)
    if order is not None:
        try:
            orders = tuple(parse_orders(order))
        except ValueError as error:
            throw(
                error_cls=ConfigError,
                message="--order: %s" % error,
                code=ERROR_CODES['invalid_config']
            )
        run = dataclasses.replace(run, bench=dataclasses.replace(run.bench, orders=orders))

    report = run_bench(run.bench)
    for key, value in sorted(report.summary.items()):
        click.echo('%s: %s' % (key, value))
    emit(report.to_dict(), run, out, 'bench.json', started)
