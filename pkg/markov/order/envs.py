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
Simulators with known ground truth: the tiger problem (partially
observed, or fully observed with `reveal_state`), linear
high-order MDPs, behaviour policies and exact tabular models.
"""

import dataclasses
from dataclasses import dataclass, field
from typing import (
    Any,
    Dict,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union
)

import numpy as np
from joblib import Parallel, delayed

from .constants import (
    DEFAULT_LISTEN_ERROR,
    DEFAULT_LISTEN_PROB,
    DEFAULT_REWARD_EMPTY,
    DEFAULT_REWARD_LISTEN,
    DEFAULT_REWARD_TIGER,
    LISTEN,
    OPEN_LEFT,
    OPEN_RIGHT,
    TIGER_ACTIONS,
    TIGER_LEFT,
    TIGER_RIGHT,
    TIGER_SENTINEL,
    TIGER_STATES
)
from .data import Episode, TrajectoryDataset
from .errors import (
    ConfigError,
    ERROR_CODES,
    PolicyError,
    SimulationError,
    throw
)
from .logs import logger
from .utils import derive_rng

POLICY_KINDS = ('uniform', 'epsilon-listen', 'greedy', 'tabular', 'fixed')
REWARD_KINDS = ('first', 'negative-abs')
PROBABILITY_TOLERANCE = 1e-9


@dataclass(frozen=True)
class TigerConfig:
    """
    The tiger problem. A tiger sits behind the left or right door;
    listening costs `reward_listen` and reports the tiger's side
    with probability 1 - `listen_error`. Opening a door pays
    `reward_tiger` or `reward_empty`, then the tiger is placed
    uniformly at random again.

    Parameter:
        `reveal_state` (bool):
            Append the true tiger position to every observation,
            which makes the process a 2-state MDP.
    """

    listen_error: float = DEFAULT_LISTEN_ERROR
    reward_tiger: float = DEFAULT_REWARD_TIGER
    reward_empty: float = DEFAULT_REWARD_EMPTY
    reward_listen: float = DEFAULT_REWARD_LISTEN
    horizon: int = 50
    reveal_state: bool = False
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= float(self.listen_error) <= 0.5:
            throw(
                error_cls=ConfigError,
                message="Tiger: listen_error must lie in [0, 0.5], got %s" % (self.listen_error,),
                code=ERROR_CODES['invalid_config']
            )
        if int(self.horizon) < 1:
            throw(
                error_cls=ConfigError,
                message="Tiger: horizon must be >= 1, got %s" % (self.horizon,),
                code=ERROR_CODES['invalid_config']
            )

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, item: Mapping[str, Any]) -> 'TigerConfig':
        return cls(**dict(item))


def _code_of(value: Union[int, str], labels: Sequence[str], what: str) -> int:
    if isinstance(value, str):
        if value not in labels:
            throw(
                error_cls=SimulationError,
                message="Tiger: unknown %s '%s', expected one of %s" % (what, value, list(labels)),
                code=ERROR_CODES['not_found']
            )
        return labels.index(value)
    code = int(value)
    if not 0 <= code < len(labels):
        throw(
            error_cls=SimulationError,
            message="Tiger: %s code %d outside 0..%d" % (what, code, len(labels) - 1),
            code=ERROR_CODES['not_found']
        )
    return code


def tiger_step(
    hidden_state: Union[int, str],
    action: Union[int, str],
    rng: np.random.Generator,
    cfg: Optional[TigerConfig] = None
) -> Tuple[np.ndarray, float, int]:
    """
    One step of the tiger problem.

    Return:
        (observation vector, reward, next hidden state), the
        observation being [signal] or [signal, next tiger position]
        when `cfg.reveal_state` is set.

    Example:
    ---
        >>> obs, reward, tiger = tiger_step('left', 'open-left', rng)
        >>> reward
        >>> -100.0
    """

    cfg = cfg or TigerConfig()
    tiger = _code_of(hidden_state, TIGER_STATES, 'state')
    action = _code_of(action, TIGER_ACTIONS, 'action')

    if action == LISTEN:
        wrong = rng.random() < cfg.listen_error
        signal = float(1 - tiger) if wrong else float(tiger)
        reward = float(cfg.reward_listen)
        next_tiger = tiger
    else:
        opened = TIGER_LEFT if action == OPEN_LEFT else TIGER_RIGHT
        reward = float(cfg.reward_tiger if opened == tiger else cfg.reward_empty)
        signal = TIGER_SENTINEL
        next_tiger = int(rng.random() < 0.5)

    obs = [signal, float(next_tiger)] if cfg.reveal_state else [signal]
    return np.array(obs), reward, next_tiger


class BaseEnv(object):
    """
    An environment is a pure step function over an explicit state
    and a random stream, so that episodes can be simulated in any
    order from their own derived streams.
    """

    action_set: Tuple[str, ...] = ()
    obs_dim: int = 1

    def reset(self, rng: np.random.Generator) -> Tuple[Any, np.ndarray]:
        raise NotImplementedError

    def step(self, state: Any, action: int, rng: np.random.Generator) -> Tuple[np.ndarray, float, Any]:
        raise NotImplementedError

    def meta(self) -> Dict[str, Any]:
        raise NotImplementedError


class TigerEnv(BaseEnv):
    action_set = TIGER_ACTIONS

    def __init__(self, cfg: Optional[TigerConfig] = None):
        self.cfg = cfg or TigerConfig()
        self.obs_dim = 2 if self.cfg.reveal_state else 1

    def reset(self, rng):
        tiger = int(rng.random() < 0.5)
        obs = [TIGER_SENTINEL, float(tiger)] if self.cfg.reveal_state else [TIGER_SENTINEL]
        return tiger, np.array(obs)

    def step(self, state, action, rng):
        return tiger_step(state, action, rng, self.cfg)

    def meta(self):
        return {'env': 'tiger', 'env_config': self.cfg.to_dict()}


@dataclass(frozen=True, eq=False)
class LinearHmdpConfig:
    """
    A linear order-k MDP:

        O_{t+1} = sum_i C_i O_{t-i} + sum_i d_i[A_{t-i}] + noise * eps

    for i = 0..k-1, with lags before the episode start taken as
    zero. `coefficients` has shape (k, d, d) and `action_effects`
    (k, |A|, d). The reward is the first coordinate of O_{t+1}
    (`first`) or minus its absolute value (`negative-abs`).
    """

    order: int
    obs_dim: int
    action_count: int
    coefficients: np.ndarray
    action_effects: np.ndarray
    noise_scale: float = 1.0
    horizon: int = 100
    seed: int = 0
    reward_kind: str = 'first'
    initial_scale: float = 1.0

    def __post_init__(self):
        k, d, A = int(self.order), int(self.obs_dim), int(self.action_count)
        if k < 1 or d < 1 or A < 1:
            throw(
                error_cls=ConfigError,
                message="Linear MDP: order, obs_dim and action_count must be >= 1",
                code=ERROR_CODES['invalid_config']
            )

        coefficients = np.array(self.coefficients, dtype=np.float64)
        effects = np.array(self.action_effects, dtype=np.float64)
        if coefficients.shape != (k, d, d):
            throw(
                error_cls=ConfigError,
                message="Linear MDP: coefficients must have shape %s, got %s" % ((k, d, d), coefficients.shape),
                code=ERROR_CODES['dimension_error']
            )
        if effects.shape != (k, A, d):
            throw(
                error_cls=ConfigError,
                message="Linear MDP: action_effects must have shape %s, got %s" % ((k, A, d), effects.shape),
                code=ERROR_CODES['dimension_error']
            )
        if self.reward_kind not in REWARD_KINDS:
            throw(
                error_cls=ConfigError,
                message="Linear MDP: reward_kind must be one of %s" % (list(REWARD_KINDS),),
                code=ERROR_CODES['invalid_config']
            )
        if float(self.noise_scale) < 0 or float(self.initial_scale) < 0 or int(self.horizon) < 1:
            throw(
                error_cls=ConfigError,
                message="Linear MDP: noise_scale and initial_scale must be >= 0, horizon >= 1",
                code=ERROR_CODES['invalid_config']
            )

        norm = float(sum(np.linalg.norm(c, ord=2) for c in coefficients))
        if norm >= 1.0:
            throw(
                error_cls=SimulationError,
                message="Linear MDP: unstable coefficients, sum of spectral norms is %.4f (must be < 1)" % norm,
                code=ERROR_CODES['unstable']
            )

        coefficients.setflags(write=False)
        effects.setflags(write=False)
        object.__setattr__(self, 'coefficients', coefficients)
        object.__setattr__(self, 'action_effects', effects)

    @classmethod
    def default(
        cls,
        order: int,
        obs_dim: Optional[int] = 1,
        action_count: Optional[int] = 2,
        strength: Optional[float] = 0.9,
        effect: Optional[float] = 1.0,
        **kwargs
    ) -> 'LinearHmdpConfig':
        """
        Diagonal lag matrices with weights growing linearly towards
        the last lag (which dominates), summing to `strength`; the
        current action shifts every coordinate by a value spread
        evenly over [-effect, effect].
        """

        weights = np.arange(1, order + 1, dtype=np.float64)
        weights = strength * weights / weights.sum()
        coefficients = np.stack([w * np.eye(obs_dim) for w in weights])
        effects = np.zeros((order, action_count, obs_dim))
        levels = np.linspace(-effect, effect, action_count) if action_count > 1 else np.zeros(1)
        effects[0] = levels[:, None] * np.ones(obs_dim)
        return cls(
            order=order,
            obs_dim=obs_dim,
            action_count=action_count,
            coefficients=coefficients,
            action_effects=effects,
            **kwargs
        )

    def to_dict(self) -> Dict[str, Any]:
        item = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}
        item['coefficients'] = self.coefficients.tolist()
        item['action_effects'] = self.action_effects.tolist()
        return item

    @classmethod
    def from_dict(cls, item: Mapping[str, Any]) -> 'LinearHmdpConfig':
        item = dict(item)
        if 'coefficients' not in item:
            order = item.pop('order')
            return cls.default(order, **item)
        return cls(**item)


@dataclass(frozen=True, eq=False)
class _LagState:
    observations: np.ndarray
    actions: Tuple[int, ...]


class LinearHmdpEnv(BaseEnv):

    def __init__(self, cfg: LinearHmdpConfig):
        self.cfg = cfg
        self.obs_dim = cfg.obs_dim
        self.action_set = tuple(str(a) for a in range(cfg.action_count))

    def reset(self, rng):
        cfg = self.cfg
        obs = cfg.initial_scale * rng.standard_normal(cfg.obs_dim)
        history = np.zeros((cfg.order, cfg.obs_dim))
        history[0] = obs
        return _LagState(history, (-1,) * cfg.order), obs

    def step(self, state, action, rng):
        cfg = self.cfg
        actions = (int(action),) + state.actions[:-1]

        mean = np.einsum('kij,kj->i', cfg.coefficients, state.observations)
        for lag, a in enumerate(actions):
            if a >= 0:
                mean = mean + cfg.action_effects[lag, a]
        obs = mean + cfg.noise_scale * rng.standard_normal(cfg.obs_dim)

        reward = float(obs[0]) if cfg.reward_kind == 'first' else -abs(float(obs[0]))
        history = np.concatenate([obs[None], state.observations[:-1]], axis=0)
        return obs, reward, _LagState(history, actions)

    def meta(self):
        return {'env': 'linear-hmdp', 'env_config': self.cfg.to_dict()}


def _check_distribution(probs: np.ndarray, kind: str) -> np.ndarray:
    if np.any(probs < -PROBABILITY_TOLERANCE) or \
            np.any(np.abs(probs.sum(axis=1) - 1.0) > PROBABILITY_TOLERANCE):
        throw(
            error_cls=PolicyError,
            message="Policy '%s': action probabilities must be non-negative and sum to 1" % kind,
            code=ERROR_CODES['invalid_config']
        )
    return probs


@dataclass(frozen=True, eq=False)
class Policy:
    """
    A stationary policy P(A_t = a | O_t = o) over an ordered action
    set of size `action_count`.

    Kinds:
        `uniform`: 1 / |A| everywhere.
        `epsilon-listen`: action `listen_action` with `listen_prob`,
            the others uniformly.
        `fixed`: always `action`.
        `greedy`: argmax_a Q(o, a), ties to the lowest index.
        `tabular`: a probability row per distinct observation row.

    Example:
    ---
        >>> policy = Policy.epsilon_listen()
        >>> policy.probabilities([[0.5]])
        >>> array([[0.1, 0.1, 0.8]])
    """

    kind: str
    action_count: int
    params: Mapping[str, Any] = field(default_factory=dict)
    q: Optional[Any] = None

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            throw(
                error_cls=PolicyError,
                message="Policy: kind must be one of %s, got '%s'" % (list(POLICY_KINDS), self.kind),
                code=ERROR_CODES['invalid_config']
            )
        if int(self.action_count) < 1:
            throw(
                error_cls=PolicyError,
                message="Policy: action_count must be >= 1",
                code=ERROR_CODES['invalid_config']
            )
        object.__setattr__(self, 'action_count', int(self.action_count))
        object.__setattr__(self, 'params', dict(self.params))

        if self.kind == 'greedy' and self.q is None:
            throw(
                error_cls=PolicyError,
                message="Policy: a greedy policy needs a Q-function",
                code=ERROR_CODES['invalid_config']
            )
        if self.kind == 'fixed' and not 0 <= int(self.params.get('action', -1)) < self.action_count:
            throw(
                error_cls=PolicyError,
                message="Policy: fixed action must lie in 0..%d" % (self.action_count - 1),
                code=ERROR_CODES['invalid_config']
            )
        if self.kind == 'epsilon-listen':
            listen = int(self.params.get('listen_action', LISTEN))
            prob = float(self.params.get('listen_prob', DEFAULT_LISTEN_PROB))
            if not 0 <= listen < self.action_count or not 0.0 <= prob <= 1.0 \
                    or (self.action_count == 1 and prob != 1.0):
                throw(
                    error_cls=PolicyError,
                    message="Policy: invalid epsilon-listen parameters %s" % (self.params,),
                    code=ERROR_CODES['invalid_config']
                )
        if self.kind == 'tabular':
            table = np.asarray(self.params.get('table'), dtype=np.float64)
            cells = np.asarray(self.params.get('cells'), dtype=np.float64)
            if table.ndim != 2 or table.shape[1] != self.action_count or cells.shape[0] != table.shape[0]:
                throw(
                    error_cls=PolicyError,
                    message="Policy: tabular cells and table do not match",
                    code=ERROR_CODES['dimension_error']
                )
            _check_distribution(table, self.kind)
            index = {tuple(row): i for i, row in enumerate(cells.reshape(cells.shape[0], -1).tolist())}
            object.__setattr__(self, '_index', index)
            object.__setattr__(self, '_table', table)

    @classmethod
    def uniform(cls, action_count: int) -> 'Policy':
        return cls('uniform', action_count)

    @classmethod
    def epsilon_listen(
        cls,
        listen_prob: Optional[float] = DEFAULT_LISTEN_PROB,
        listen_action: Optional[int] = LISTEN,
        action_count: Optional[int] = len(TIGER_ACTIONS)
    ) -> 'Policy':
        return cls('epsilon-listen', action_count, {
            'listen_prob': float(listen_prob), 'listen_action': int(listen_action)
        })

    @classmethod
    def fixed(cls, action: int, action_count: int) -> 'Policy':
        return cls('fixed', action_count, {'action': int(action)})

    @classmethod
    def greedy(cls, q: Any) -> 'Policy':
        return cls('greedy', q.action_count, q=q)

    @classmethod
    def tabular(cls, cells, table, default: Optional[Sequence[float]] = None) -> 'Policy':
        table = np.asarray(table, dtype=np.float64)
        params = {'cells': np.asarray(cells, dtype=np.float64).tolist(), 'table': table.tolist()}
        if default is not None:
            params['default'] = [float(p) for p in default]
        return cls('tabular', table.shape[1], params)

    def probabilities(self, obs) -> np.ndarray:
        """ Action probabilities for each row of `obs`, shape (n, |A|). """

        obs = np.asarray(obs, dtype=np.float64)
        if obs.ndim == 1:
            obs = obs[None]
        n, A = obs.shape[0], self.action_count

        if self.kind == 'uniform':
            return np.full((n, A), 1.0 / A)

        if self.kind == 'fixed':
            probs = np.zeros((n, A))
            probs[:, int(self.params['action'])] = 1.0
            return probs

        if self.kind == 'epsilon-listen':
            listen = int(self.params.get('listen_action', LISTEN))
            prob = float(self.params.get('listen_prob', DEFAULT_LISTEN_PROB))
            row = np.full(A, (1.0 - prob) / max(A - 1, 1))
            row[listen] = prob
            return np.tile(row, (n, 1))

        if self.kind == 'greedy':
            values = self.q.values(obs)
            probs = np.zeros((n, A))
            probs[np.arange(n), np.argmax(values, axis=1)] = 1.0
            return probs

        default = self.params.get('default')
        probs = np.empty((n, A))
        for i, row in enumerate(obs.tolist()):
            cell = self._index.get(tuple(row))
            if cell is not None:
                probs[i] = self._table[cell]
            elif default is not None:
                probs[i] = default
            else:
                throw(
                    error_cls=PolicyError,
                    message="Policy: observation %s is not in the table" % (row,),
                    code=ERROR_CODES['not_found']
                )
        return _check_distribution(probs, self.kind)

    def act(self, obs, rng: np.random.Generator) -> int:
        probs = self.probabilities(obs)[0]
        action = int(np.searchsorted(np.cumsum(probs), rng.random(), side='right'))
        return min(action, self.action_count - 1)

    def to_dict(self) -> Dict[str, Any]:
        item = {'kind': self.kind, 'action_count': self.action_count, 'params': dict(self.params)}
        if self.q is not None:
            item['q'] = self.q.to_dict()
        return item

    @classmethod
    def from_dict(cls, item: Mapping[str, Any]) -> 'Policy':
        item = dict(item)
        q = item.pop('q', None)
        if q is not None:
            from .rl import QFunction
            q = QFunction.from_dict(q)
        try:
            return cls(q=q, **item)
        except TypeError as error:
            throw(
                error_cls=PolicyError,
                message="Policy: malformed policy object (%s)" % error,
                code=ERROR_CODES['parse_error']
            )


def _simulate_episode(env: BaseEnv, policy: Policy, horizon: int, seed: int, index: int) -> Episode:
    rng = derive_rng(seed, 'episode', index)
    state, obs = env.reset(rng)
    observations, actions, rewards = [obs], [], []
    for _ in range(horizon):
        action = policy.act(obs, rng)
        obs, reward, state = env.step(state, action, rng)
        observations.append(obs)
        actions.append(action)
        rewards.append(reward)
    return Episode(np.stack(observations), actions, rewards, episode_id=str(index))


def simulate(
    env: BaseEnv,
    policy: Policy,
    n_episodes: int,
    horizon: int,
    seed: int,
    workers: Optional[int] = 1
) -> TrajectoryDataset:
    """
    Simulate `n_episodes` episodes of length `horizon`. Episode i
    uses its own stream (seed, 'episode', i), so the dataset is
    independent of the number of workers.
    """

    if int(n_episodes) < 1 or int(horizon) < 1:
        throw(
            error_cls=SimulationError,
            message="Simulate: n_episodes and horizon must be >= 1, got %s and %s" % (n_episodes, horizon),
            code=ERROR_CODES['invalid_config']
        )
    if policy.action_count != len(env.action_set):
        throw(
            error_cls=PolicyError,
            message="Simulate: policy has %d actions, the environment %d" % (
                policy.action_count, len(env.action_set)
            ),
            code=ERROR_CODES['dimension_error']
        )

    episodes = Parallel(n_jobs=int(workers))(
        delayed(_simulate_episode)(env, policy, int(horizon), seed, i)
        for i in range(int(n_episodes))
    )
    logger.debug('Simulated %d episodes of length %d' % (n_episodes, horizon))

    meta = env.meta()
    meta.update({'policy': policy.to_dict(), 'seed': int(seed), 'horizon': int(horizon)})
    return TrajectoryDataset(
        episodes=tuple(episodes),
        action_set=env.action_set,
        obs_dim=env.obs_dim,
        meta=meta
    )


def linear_hmdp_simulate(
    cfg: LinearHmdpConfig,
    policy: Optional[Policy] = None,
    n: Optional[int] = 100,
    T: Optional[int] = None,
    seed: Optional[int] = None,
    workers: Optional[int] = 1
) -> TrajectoryDataset:
    policy = policy or Policy.uniform(cfg.action_count)
    return simulate(
        LinearHmdpEnv(cfg), policy, n,
        cfg.horizon if T is None else T,
        cfg.seed if seed is None else seed,
        workers=workers
    )


@dataclass(frozen=True, eq=False)
class TabularMdp:
    """
    A finite MDP: `transitions` (|A|, |S|, |S|), `rewards` (|S|, |A|)
    and the observation vector emitted in each state. Transition
    rows sum to one, or are all zero for pairs an empirical model
    never saw.
    """

    transitions: np.ndarray
    rewards: np.ndarray
    state_observations: np.ndarray
    initial: np.ndarray
    state_labels: Tuple[str, ...] = ()
    action_set: Tuple[str, ...] = ()

    def __post_init__(self):
        P = np.array(self.transitions, dtype=np.float64)
        R = np.array(self.rewards, dtype=np.float64)
        X = np.array(self.state_observations, dtype=np.float64)
        mu = np.array(self.initial, dtype=np.float64)
        A, S = P.shape[0], P.shape[1]

        if P.shape != (A, S, S) or R.shape != (S, A) or X.shape[0] != S or mu.shape != (S,):
            throw(
                error_cls=SimulationError,
                message="Tabular MDP: inconsistent shapes %s, %s, %s, %s" % (P.shape, R.shape, X.shape, mu.shape),
                code=ERROR_CODES['dimension_error']
            )
        sums = P.sum(axis=2)
        if not np.all((np.abs(sums - 1.0) < 1e-9) | (sums == 0.0)) or abs(mu.sum() - 1.0) > 1e-9:
            throw(
                error_cls=SimulationError,
                message="Tabular MDP: transition rows and the initial distribution must sum to 1",
                code=ERROR_CODES['invalid_config']
            )

        object.__setattr__(self, 'transitions', P)
        object.__setattr__(self, 'rewards', R)
        object.__setattr__(self, 'state_observations', X)
        object.__setattr__(self, 'initial', mu)
        object.__setattr__(self, 'state_labels', tuple(self.state_labels) or tuple(str(s) for s in range(S)))
        object.__setattr__(self, 'action_set', tuple(self.action_set) or tuple(str(a) for a in range(A)))

    @property
    def n_states(self) -> int:
        return int(self.transitions.shape[1])

    @property
    def n_actions(self) -> int:
        return int(self.transitions.shape[0])

    def to_dict(self) -> Dict[str, Any]:
        return {
            'transitions': self.transitions.tolist(),
            'rewards': self.rewards.tolist(),
            'state_observations': self.state_observations.tolist(),
            'initial': self.initial.tolist(),
            'state_labels': list(self.state_labels),
            'action_set': list(self.action_set)
        }


def _tiger_rewards(cfg: TigerConfig, tiger: int) -> List[float]:
    rewards = [0.0, 0.0, float(cfg.reward_listen)]
    for action, side in ((OPEN_LEFT, TIGER_LEFT), (OPEN_RIGHT, TIGER_RIGHT)):
        rewards[action] = float(cfg.reward_tiger if side == tiger else cfg.reward_empty)
    return rewards


def tabular_tiger_mdp(
    cfg: Optional[TigerConfig] = None,
    reveal_state: Optional[bool] = True,
    include_signal: Optional[bool] = False
) -> TabularMdp:
    """
    Exact tables of the fully observed tiger problem.

    The default is the 2-state MDP over the tiger position; each
    state is represented by the observation [0.5, tiger], which is
    enough for policies that ignore the signal. With
    `include_signal` the 6-state MDP over (signal, tiger) is
    returned, whose states are exactly the revealed observations.
    """

    cfg = cfg or TigerConfig(reveal_state=True)
    if not reveal_state:
        throw(
            error_cls=ConfigError,
            message="Tiger tables exist for the fully observed variant only (reveal_state)",
            code=ERROR_CODES['invalid_config']
        )

    A = len(TIGER_ACTIONS)
    if not include_signal:
        P = np.zeros((A, 2, 2))
        P[LISTEN] = np.eye(2)
        P[OPEN_LEFT] = P[OPEN_RIGHT] = 0.5
        return TabularMdp(
            transitions=P,
            rewards=np.array([_tiger_rewards(cfg, s) for s in (TIGER_LEFT, TIGER_RIGHT)]),
            state_observations=np.array([[TIGER_SENTINEL, 0.0], [TIGER_SENTINEL, 1.0]]),
            initial=np.array([0.5, 0.5]),
            state_labels=TIGER_STATES,
            action_set=TIGER_ACTIONS
        )

    signals = (0.0, 1.0, TIGER_SENTINEL)
    states = [(signal, tiger) for signal in signals for tiger in (TIGER_LEFT, TIGER_RIGHT)]
    index = {state: i for i, state in enumerate(states)}
    e = float(cfg.listen_error)

    P = np.zeros((A, len(states), len(states)))
    for i, (_, tiger) in enumerate(states):
        P[LISTEN, i, index[(float(tiger), tiger)]] += 1.0 - e
        P[LISTEN, i, index[(float(1 - tiger), tiger)]] += e
        for action in (OPEN_LEFT, OPEN_RIGHT):
            P[action, i, index[(TIGER_SENTINEL, TIGER_LEFT)]] = 0.5
            P[action, i, index[(TIGER_SENTINEL, TIGER_RIGHT)]] = 0.5

    initial = np.zeros(len(states))
    initial[index[(TIGER_SENTINEL, TIGER_LEFT)]] = 0.5
    initial[index[(TIGER_SENTINEL, TIGER_RIGHT)]] = 0.5

    return TabularMdp(
        transitions=P,
        rewards=np.array([_tiger_rewards(cfg, tiger) for _, tiger in states]),
        state_observations=np.array([[signal, float(tiger)] for signal, tiger in states]),
        initial=initial,
        state_labels=tuple('signal=%s,tiger=%s' % (signal, TIGER_STATES[tiger]) for signal, tiger in states),
        action_set=TIGER_ACTIONS
    )


ENV_KINDS = ('tiger', 'linear-hmdp')


def make_env(kind: str, config: Optional[Mapping[str, Any]] = None) -> BaseEnv:
    """ Build an environment from its config section. """

    config = dict(config or {})
    if kind == 'tiger':
        return TigerEnv(TigerConfig.from_dict(config))
    if kind == 'linear-hmdp':
        config.setdefault('order', 1)
        return LinearHmdpEnv(LinearHmdpConfig.from_dict(config))

    throw(
        error_cls=ConfigError,
        message="Unknown environment '%s', expected one of %s" % (kind, list(ENV_KINDS)),
        code=ERROR_CODES['invalid_config']
    )


def default_policy(env: BaseEnv) -> Policy:
    """ epsilon-listen on the tiger problem, uniform elsewhere. """

    if isinstance(env, TigerEnv):
        return Policy.epsilon_listen()
    return Policy.uniform(len(env.action_set))
