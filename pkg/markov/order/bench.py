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

"""
Monte Carlo harness: size, power and order-selection frequencies
of the Markov test, coverage of off-policy intervals, and the
order-return study, replicated over derived seeds.
"""

import dataclasses
from collections import Counter
from dataclasses import dataclass, field
from typing import (
    Any,
    Dict,
    List,
    Mapping,
    Optional,
    Tuple
)

import numpy as np
from joblib import Parallel, delayed

from .envs import (
    ENV_KINDS,
    Policy,
    TigerEnv,
    default_policy,
    make_env,
    simulate,
    tabular_tiger_mdp
)
from .errors import (
    ConfigError,
    ERROR_CODES,
    throw
)
from .logs import logger
from .markov_test import TestConfig, order_test, select_order
from .ope import OpeConfig, cross_fit_ope
from .rl import RlConfig, dp_policy_value, order_return_study
from .utils import derive_seed

BENCH_KINDS = ('rejection', 'order-selection', 'coverage', 'order-return')


def error_bar(p: float, R: int) -> float:
    """ Two Monte Carlo standard errors of a proportion. """

    return 2.0 * float(np.sqrt(p * (1.0 - p) / R))


@dataclass(frozen=True)
class BenchSpec:
    """
    A Monte Carlo study. Replication r simulates `n_episodes`
    episodes of length `horizon` from `env` with seed
    (seed, 'bench', r) and runs the procedure selected by `kind`.

    Parameter:
        `orders` (tuple): orders tested by `rejection` and compared
            by `order-return`.
        `K_max` (int): largest order tried by `order-selection`.
        `policy` (dict): behaviour policy (default per environment).
        `target` (dict): target policy of `coverage`.
    """

    kind: str = 'rejection'
    replications: int = 100
    env: str = 'tiger'
    env_config: Mapping[str, Any] = field(default_factory=dict)
    policy: Optional[Mapping[str, Any]] = None
    target: Optional[Mapping[str, Any]] = None
    n_episodes: int = 100
    horizon: int = 50
    orders: Tuple[int, ...] = (1,)
    K_max: int = 3
    n_splits: int = 20
    test: TestConfig = field(default_factory=TestConfig)
    ope: OpeConfig = field(default_factory=OpeConfig)
    rl: RlConfig = field(default_factory=RlConfig)
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        for name, cls in (('test', TestConfig), ('ope', OpeConfig), ('rl', RlConfig)):
            value = getattr(self, name)
            if isinstance(value, Mapping):
                object.__setattr__(self, name, cls.from_dict(value))
        object.__setattr__(self, 'orders', tuple(int(k) for k in self.orders))
        object.__setattr__(self, 'env_config', dict(self.env_config))

        problems = []
        if self.kind not in BENCH_KINDS:
            problems.append('kind must be one of %s' % (list(BENCH_KINDS),))
        if self.env not in ENV_KINDS:
            problems.append('env must be one of %s' % (list(ENV_KINDS),))
        if int(self.replications) < 1:
            problems.append('replications must be >= 1')
        if int(self.n_episodes) < 1 or int(self.horizon) < 1:
            problems.append('n_episodes and horizon must be >= 1')
        if not self.orders or min(self.orders) < 1 or int(self.K_max) < 1:
            problems.append('orders and K_max must be >= 1')
        if problems:
            throw(
                error_cls=ConfigError,
                message="Bench: %s" % '; '.join(problems),
                code=ERROR_CODES['invalid_config']
            )

    def to_dict(self) -> Dict[str, Any]:
        item = dataclasses.asdict(self)
        item['orders'] = list(self.orders)
        item['test'] = self.test.to_dict()
        item['ope'] = self.ope.to_dict()
        item['rl'] = self.rl.to_dict()
        return item

    @classmethod
    def from_dict(cls, item: Mapping[str, Any]) -> 'BenchSpec':
        return cls(**dict(item))


@dataclass(frozen=True, eq=False)
class BenchReport:
    kind: str
    replications: int
    summary: Mapping[str, Any]
    outcomes: Tuple[Any, ...]
    config: Mapping[str, Any]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': self.kind,
            'replications': self.replications,
            'summary': dict(self.summary),
            'outcomes': list(self.outcomes),
            'config': dict(self.config)
        }


def _replication(spec: BenchSpec, r: int) -> Any:
    seed = derive_seed(spec.seed, 'bench', r)
    env = make_env(spec.env, spec.env_config)
    policy = Policy.from_dict(spec.policy) if spec.policy else default_policy(env)
    ds = simulate(env, policy, spec.n_episodes, spec.horizon, seed)

    if spec.kind == 'rejection':
        config = dataclasses.replace(spec.test, seed=seed, workers=1)
        outcome = {}
        for k in spec.orders:
            report = order_test(ds, k, config)
            outcome[str(k)] = {'reject': report.reject, 'p_value': report.p_value}
        return outcome

    if spec.kind == 'order-selection':
        config = dataclasses.replace(spec.test, seed=seed, workers=1)
        report = select_order(ds, spec.K_max, config)
        return {'selected': report.selected, 'verdict': report.verdict, 'p_values': list(report.p_values)}

    if spec.kind == 'coverage':
        target = Policy.from_dict(spec.target) if spec.target else policy
        truth = _coverage_truth(env, target, spec.ope.gamma)
        report = cross_fit_ope(
            ds, target, dataclasses.replace(spec.ope, seed=seed), behavior_policy=policy
        )
        return {
            'estimate': report.estimate,
            'lower': report.ci[0],
            'upper': report.ci[1],
            'truth': truth,
            'covered': bool(report.ci[0] <= truth <= report.ci[1])
        }

    report = order_return_study(ds, spec.orders, spec.n_splits, spec.rl, seed)
    return {'means': report.means, 'sign_test_p': report.sign_test_p}


def _coverage_truth(env, target: Policy, gamma: float) -> float:
    if not isinstance(env, TigerEnv) or not env.cfg.reveal_state:
        throw(
            error_cls=ConfigError,
            message="Bench: coverage needs the fully observed tiger (reveal_state) for its exact value",
            code=ERROR_CODES['invalid_config']
        )
    mdp = tabular_tiger_mdp(env.cfg, include_signal=True)
    return dp_policy_value(mdp, target, gamma).J


def _proportion(hits: List[bool]) -> Dict[str, float]:
    R = len(hits)
    p = float(np.mean(hits))
    bar = error_bar(p, R)
    return {'proportion': p, 'error_bar': bar, 'lower': max(p - bar, 0.0), 'upper': min(p + bar, 1.0)}


def _summarize(spec: BenchSpec, outcomes: List[Any]) -> Dict[str, Any]:
    if spec.kind == 'rejection':
        return {
            str(k): _proportion([o[str(k)]['reject'] for o in outcomes])
            for k in spec.orders
        }

    if spec.kind == 'order-selection':
        counts = Counter(
            o['verdict'] if o['selected'] is None else str(o['selected']) for o in outcomes
        )
        frequencies = {label: n / float(len(outcomes)) for label, n in sorted(counts.items())}
        return {'frequencies': frequencies, 'modal': max(sorted(counts), key=lambda label: counts[label])}

    if spec.kind == 'coverage':
        summary = _proportion([o['covered'] for o in outcomes])
        summary['mean_half_width'] = float(np.mean([(o['upper'] - o['lower']) / 2.0 for o in outcomes]))
        summary['truth'] = outcomes[0]['truth']
        return summary

    means = {
        str(k): float(np.mean([o['means'][k] for o in outcomes]))
        for k in spec.orders
    }
    return {'means': means, 'best': max(means, key=lambda k: means[k])}


def run_bench(spec: BenchSpec) -> BenchReport:
    """
    Run every replication (in parallel over `spec.workers`) and
    summarize. Replications are merged in index order, so the
    report does not depend on the worker count.

    Example:
    ---
        >>> report = run_bench(BenchSpec(kind='rejection', replications=20, orders=(1, 2)))
        >>> report.summary['1']['proportion']
    """

    logger.info('Bench %s: %d replications on %s' % (spec.kind, spec.replications, spec.env))
    outcomes = Parallel(n_jobs=int(spec.workers))(
        delayed(_replication)(spec, r) for r in range(int(spec.replications))
    )
    return BenchReport(
        kind=spec.kind,
        replications=int(spec.replications),
        summary=_summarize(spec, outcomes),
        outcomes=tuple(outcomes),
        config=spec.to_dict()
    )
