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
Run configuration: one JSON file with a section per command.

    {
        "seed": 0,
        "workers": 1,
        "test": {"Q": 6, "B": 2000, "order": "1..3"},
        "simulate": {"env": "tiger", "env_config": {"reveal_state": true}},
        ...
    }

Defaults < file < command-line flags. Unknown keys are rejected.
"""

import pathlib
import dataclasses
from dataclasses import dataclass, field
from typing import (
    Any,
    Callable,
    Dict,
    Mapping,
    Optional
)

from .bench import BenchSpec
from .envs import ENV_KINDS, Policy, make_env
from .errors import (
    ConfigError,
    ERROR_CODES,
    MarkovOrderError,
    throw
)
from .markov_test import TestConfig
from .ope import OpeConfig
from .rl import RlConfig
from .serializer import read_json
from .utils import parse_orders

DATA_FORMATS = ('csv', 'json')


@dataclass(frozen=True)
class SimulateConfig:
    env: str = 'tiger'
    env_config: Mapping[str, Any] = field(default_factory=dict)
    policy: Optional[Mapping[str, Any]] = None
    n_episodes: int = 100
    horizon: int = 50

    def __post_init__(self):
        object.__setattr__(self, 'env_config', dict(self.env_config))
        if self.env not in ENV_KINDS:
            throw(
                error_cls=ConfigError,
                message="Simulate: env must be one of %s, got '%s'" % (list(ENV_KINDS), self.env),
                code=ERROR_CODES['invalid_config']
            )
        if int(self.n_episodes) < 1 or int(self.horizon) < 1:
            throw(
                error_cls=ConfigError,
                message="Simulate: n_episodes and horizon must be >= 1",
                code=ERROR_CODES['invalid_config']
            )
        make_env(self.env, self.env_config)
        if self.policy is not None:
            Policy.from_dict(self.policy)

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)


def _section(name: str, build: Callable[..., Any], item: Optional[Mapping[str, Any]]):
    if item is None:
        item = {}
    if not isinstance(item, Mapping):
        throw(
            error_cls=ConfigError,
            message="Config: section '%s' must be an object" % name,
            code=ERROR_CODES['invalid_config']
        )
    try:
        return build(**dict(item))
    except TypeError as error:
        throw(
            error_cls=ConfigError,
            message="Config: section '%s': %s" % (name, error),
            code=ERROR_CODES['invalid_config']
        )
    except MarkovOrderError as error:
        if isinstance(error, ConfigError):
            raise
        throw(
            error_cls=ConfigError,
            message="Config: section '%s': %s" % (name, error.message),
            code=ERROR_CODES['invalid_config']
        )


def _with_extras(cls, **extras):
    """ Build `cls` after popping command-level keys into `extras`. """

    def build(**item):
        picked = {key: item.pop(key, default) for key, default in extras.items()}
        return cls.from_dict(item), picked
    return build


@dataclass(frozen=True)
class RunConfig:
    """
    Fully resolved configuration of one CLI invocation. The root
    `seed` and `workers` are applied to every section.
    """

    seed: int = 0
    out: Optional[str] = None
    log: Optional[str] = None
    workers: int = 1
    format: Optional[str] = None
    record_runtime: bool = False
    test: TestConfig = field(default_factory=TestConfig)
    order: str = '1'
    K_max: int = 5
    simulate: SimulateConfig = field(default_factory=SimulateConfig)
    fqi: RlConfig = field(default_factory=RlConfig)
    fqe: RlConfig = field(default_factory=RlConfig)
    target: Optional[Mapping[str, Any]] = None
    ope: OpeConfig = field(default_factory=OpeConfig)
    ope_target: Optional[Mapping[str, Any]] = None
    behavior_policy: Optional[Mapping[str, Any]] = None
    bench: BenchSpec = field(default_factory=BenchSpec)

    def __post_init__(self):
        if self.format is not None and self.format not in DATA_FORMATS:
            throw(
                error_cls=ConfigError,
                message="Config: format must be one of %s, got '%s'" % (list(DATA_FORMATS), self.format),
                code=ERROR_CODES['invalid_config']
            )
        if int(self.workers) < 1 or int(self.K_max) < 1:
            throw(
                error_cls=ConfigError,
                message="Config: workers and K_max must be >= 1",
                code=ERROR_CODES['invalid_config']
            )
        try:
            parse_orders(self.order)
        except ValueError as error:
            throw(
                error_cls=ConfigError,
                message="Config: %s" % error,
                code=ERROR_CODES['invalid_config']
            )

        seed, workers = int(self.seed), int(self.workers)
        object.__setattr__(self, 'test', dataclasses.replace(self.test, seed=seed, workers=workers))
        object.__setattr__(self, 'fqi', dataclasses.replace(self.fqi, workers=workers))
        object.__setattr__(self, 'fqe', dataclasses.replace(self.fqe, workers=workers))
        object.__setattr__(self, 'ope', dataclasses.replace(self.ope, seed=seed))
        object.__setattr__(self, 'bench', dataclasses.replace(self.bench, seed=seed, workers=workers))

    @property
    def orders(self):
        return parse_orders(self.order)

    def policy(self, name: str) -> Optional[Policy]:
        item = getattr(self, name)
        return Policy.from_dict(item) if item is not None else None

    def override(self, **flags) -> 'RunConfig':
        """
        Apply command-line flags; `None` means not given. `alpha`
        sets the level of the test, the OPE interval and the bench.
        """

        flags = {key: value for key, value in flags.items() if value is not None}
        alpha = flags.pop('alpha', None)
        config = dataclasses.replace(self, **flags)
        if alpha is not None:
            try:
                config = dataclasses.replace(
                    config,
                    test=dataclasses.replace(config.test, alpha=float(alpha)),
                    ope=dataclasses.replace(config.ope, alpha=float(alpha)),
                    bench=dataclasses.replace(
                        config.bench, test=dataclasses.replace(config.bench.test, alpha=float(alpha))
                    )
                )
            except ValueError as error:
                throw(
                    error_cls=ConfigError,
                    message="Config: invalid alpha (%s)" % error,
                    code=ERROR_CODES['invalid_config']
                )
        return config

    def to_dict(self) -> Dict[str, Any]:
        test = self.test.to_dict()
        test['order'] = self.order
        fqe = self.fqe.to_dict()
        fqe['policy'] = self.target
        ope = self.ope.to_dict()
        ope['policy'] = self.ope_target
        ope['behavior_policy'] = self.behavior_policy
        return {
            'seed': int(self.seed),
            'out': self.out,
            'log': self.log,
            'workers': int(self.workers),
            'format': self.format,
            'record_runtime': bool(self.record_runtime),
            'test': test,
            'order_select': {'K_max': int(self.K_max)},
            'simulate': self.simulate.to_dict(),
            'fqi': self.fqi.to_dict(),
            'fqe': fqe,
            'ope': ope,
            'bench': self.bench.to_dict()
        }

    @classmethod
    def from_dict(cls, item: Mapping[str, Any]) -> 'RunConfig':
        item = dict(item)
        known = {
            'seed', 'out', 'log', 'workers', 'format', 'record_runtime',
            'test', 'order_select', 'simulate', 'fqi', 'fqe', 'ope', 'bench'
        }
        unknown = sorted(set(item) - known)
        if unknown:
            throw(
                error_cls=ConfigError,
                message="Config: unknown keys %s" % (unknown,),
                code=ERROR_CODES['invalid_config']
            )

        test, test_extra = _section('test', _with_extras(TestConfig, order='1'), item.pop('test', None))
        fqe, fqe_extra = _section('fqe', _with_extras(RlConfig, policy=None), item.pop('fqe', None))
        ope, ope_extra = _section(
            'ope', _with_extras(OpeConfig, policy=None, behavior_policy=None), item.pop('ope', None)
        )
        order_select = _section('order_select', lambda K_max=5: int(K_max), item.pop('order_select', None))

        for name, value in (('fqe.policy', fqe_extra['policy']),
                            ('ope.policy', ope_extra['policy']),
                            ('ope.behavior_policy', ope_extra['behavior_policy'])):
            if value is not None:
                _section(name, lambda **policy: Policy.from_dict(policy), value)

        return _section('config', cls, dict(
            item,
            test=test,
            order=str(test_extra['order']),
            K_max=order_select,
            simulate=_section('simulate', SimulateConfig, item.get('simulate')),
            fqi=_section('fqi', lambda **x: RlConfig.from_dict(x), item.get('fqi')),
            fqe=fqe,
            target=fqe_extra['policy'],
            ope=ope,
            ope_target=ope_extra['policy'],
            behavior_policy=ope_extra['behavior_policy'],
            bench=_section('bench', lambda **x: BenchSpec.from_dict(x), item.get('bench'))
        ))


def load_run_config(path: Optional[str] = None) -> RunConfig:
    """
    Read a run config; a report file is accepted too, in which
    case its embedded `config` section is used.
    """

    if path is None:
        return RunConfig()

    path = pathlib.Path(path)
    if not path.is_file():
        throw(
            error_cls=ConfigError,
            message="Config: '%s' not found" % str(path),
            code=ERROR_CODES['not_found']
        )
    try:
        item = read_json(path)
    except ValueError as error:
        throw(
            error_cls=ConfigError,
            message="Config: '%s' is not valid JSON (%s)" % (path.name, error),
            code=ERROR_CODES['parse_error']
        )

    if not isinstance(item, Mapping):
        throw(
            error_cls=ConfigError,
            message="Config: '%s' must hold a JSON object" % path.name,
            code=ERROR_CODES['parse_error']
        )
    if 'config' in item and isinstance(item['config'], Mapping):
        item = item['config']
    return RunConfig.from_dict(item)
