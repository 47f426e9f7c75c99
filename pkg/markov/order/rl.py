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
Fitted Q-iteration, fitted Q-evaluation and exact dynamic
programming on tabular MDPs.
"""

import dataclasses
from dataclasses import dataclass, field
from typing import (
    Any,
    Dict,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union
)

import numpy as np
from joblib import Parallel, delayed
from scipy.stats import binomtest

from .constants import (
    DEFAULT_GAMMA,
    DEFAULT_ITERATIONS,
    DP_TOLERANCE
)
from .data import (
    TrajectoryDataset,
    augment_order,
    transitions
)
from .envs import Policy, TabularMdp
from .errors import (
    ConfigError,
    CoverageError,
    ERROR_CODES,
    PolicyError,
    throw
)
from .logs import logger
from .regress import (
    FittedModel,
    RegressorSpec,
    TabularModel,
    make_regressor,
    model_from_dict
)
from .utils import derive_rng

#: Upper bound on DP sweeps; gamma < 1 converges long before.
MAX_DP_SWEEPS = 100000


@dataclass(frozen=True)
class RlConfig:
    """
    Parameter:
        `gamma` (float): discount factor in (0, 1).
        `iterations` (int): fixed number of Bellman regressions.
        `regressor` (RegressorSpec): learner of every Q regression.
        `workers` (int): joblib workers for the per-action fits.
    """

    gamma: float = DEFAULT_GAMMA
    iterations: int = DEFAULT_ITERATIONS
    regressor: RegressorSpec = field(default_factory=RegressorSpec)
    workers: int = 1

    def __post_init__(self):
        if isinstance(self.regressor, Mapping):
            object.__setattr__(self, 'regressor', RegressorSpec.from_dict(self.regressor))
        if not 0.0 < float(self.gamma) < 1.0:
            throw(
                error_cls=ConfigError,
                message="RL config: gamma must lie in (0, 1), got %s" % (self.gamma,),
                code=ERROR_CODES['invalid_config']
            )
        if int(self.iterations) < 1 or int(self.workers) < 1:
            throw(
                error_cls=ConfigError,
                message="RL config: iterations and workers must be >= 1",
                code=ERROR_CODES['invalid_config']
            )

    def to_dict(self) -> Dict[str, Any]:
        item = dataclasses.asdict(self)
        item['regressor'] = self.regressor.to_dict()
        return item

    @classmethod
    def from_dict(cls, item: Mapping[str, Any]) -> 'RlConfig':
        return cls(**dict(item))


@dataclass(frozen=True, eq=False)
class QFunction:
    """ One fitted model per action; `values` stacks their predictions. """

    models: Tuple[FittedModel, ...]

    @property
    def action_count(self) -> int:
        return len(self.models)

    def values(self, obs) -> np.ndarray:
        obs = np.asarray(obs, dtype=np.float64)
        if obs.ndim == 1:
            obs = obs[None]
        return np.column_stack([m.predict(obs)[:, 0] for m in self.models])

    def to_dict(self) -> Dict[str, Any]:
        return {'models': [m.to_dict() for m in self.models]}

    @classmethod
    def from_dict(cls, item: Mapping[str, Any]) -> 'QFunction':
        return cls(models=tuple(model_from_dict(m) for m in item['models']))

    @classmethod
    def from_table(cls, mdp: TabularMdp, q: np.ndarray) -> 'QFunction':
        """ Tabular Q over the state observations of `mdp`. """

        q = np.asarray(q, dtype=np.float64)
        return cls(models=tuple(
            TabularModel(cells=mdp.state_observations, values=q[:, a:a + 1], default=np.zeros(1))
            for a in range(q.shape[1])
        ))


def _check_coverage(ds: TrajectoryDataset):
    counts = ds.action_counts()
    missing = [label for label, n in counts.items() if n == 0]
    if missing:
        throw(
            error_cls=CoverageError,
            message="Actions %s never occur in the dataset (counts: %s)" % (missing, counts),
            code=ERROR_CODES['coverage_error']
        )


def _fit_actions(obs, actions, targets, cfg: RlConfig, action_count: int) -> QFunction:
    learner = make_regressor(cfg.regressor)
    models = Parallel(n_jobs=cfg.workers)(
        delayed(learner.fit)(obs[actions == a], targets[actions == a, None])
        for a in range(action_count)
    )
    return QFunction(models=tuple(models))


def _bellman_iterations(ds: TrajectoryDataset, cfg: RlConfig, backup) -> QFunction:
    _check_coverage(ds)
    data = transitions(ds)
    q = None
    for iteration in range(int(cfg.iterations)):
        if q is None:
            targets = data.rewards
        else:
            targets = data.rewards + cfg.gamma * backup(q.values(data.next_obs), data.next_obs)
        q = _fit_actions(data.obs, data.actions, targets, cfg, ds.action_count)
    logger.debug('Ran %d Bellman regressions on %d transitions' % (cfg.iterations, len(data)))
    return q


def fqi(ds: TrajectoryDataset, cfg: Optional[RlConfig] = None) -> Tuple[QFunction, Policy]:
    """
    Fitted Q-iteration: Q <- fit of r + gamma * max_a' Q(o', a'),
    starting from Q = 0, for `cfg.iterations` regressions.

    Return:
        (Q, greedy policy) with ties broken to the lowest action.
    """

    cfg = cfg or RlConfig()
    q = _bellman_iterations(ds, cfg, lambda values, _: values.max(axis=1))
    return q, Policy.greedy(q)


def fqe(ds: TrajectoryDataset, policy: Policy, cfg: Optional[RlConfig] = None) -> Tuple[QFunction, float]:
    """
    Fitted Q-evaluation of `policy`:

        Q <- fit of r + gamma * sum_a' pi(a'|o') Q(o', a')

    Return:
        (Q, J) with J the mean over episode-initial observations
        of sum_a pi(a|o_0) Q(o_0, a).
    """

    cfg = cfg or RlConfig()
    if policy.action_count != ds.action_count:
        throw(
            error_cls=PolicyError,
            message="FQE: policy has %d actions, the dataset %d" % (policy.action_count, ds.action_count),
            code=ERROR_CODES['dimension_error']
        )

    q = _bellman_iterations(
        ds, cfg, lambda values, next_obs: np.sum(policy.probabilities(next_obs) * values, axis=1)
    )
    initial = np.stack([e.observations[0] for e in ds.episodes])
    value = float(np.mean(np.sum(policy.probabilities(initial) * q.values(initial), axis=1)))
    logger.info('FQE estimate J = %.4f' % value)
    return q, value


def policy_table(policy: Union[Policy, np.ndarray], mdp: TabularMdp) -> np.ndarray:
    """ pi(a | s) for every state of `mdp`, shape (|S|, |A|). """

    if isinstance(policy, Policy):
        table = policy.probabilities(mdp.state_observations)
    else:
        table = np.asarray(policy, dtype=np.float64)
    if table.shape != (mdp.n_states, mdp.n_actions) or \
            np.any(np.abs(table.sum(axis=1) - 1.0) > 1e-9):
        throw(
            error_cls=PolicyError,
            message="Policy table must have shape %s with rows summing to 1" % ((mdp.n_states, mdp.n_actions),),
            code=ERROR_CODES['dimension_error']
        )
    return table


@dataclass(frozen=True, eq=False)
class DpResult:
    """ Exact state values, Q-values and J = sum_s mu(s) V(s). """

    values: np.ndarray
    q: np.ndarray
    J: float
    policy: np.ndarray

    def to_dict(self) -> Dict[str, Any]:
        return {
            'values': self.values.tolist(),
            'q': self.q.tolist(),
            'J': self.J,
            'policy': self.policy.tolist()
        }


def _q_of(mdp: TabularMdp, values: np.ndarray, gamma: float) -> np.ndarray:
    return mdp.rewards + gamma * np.einsum('asn,n->sa', mdp.transitions, values)


def dp_policy_value(
    mdp: TabularMdp,
    policy: Union[Policy, np.ndarray],
    gamma: Optional[float] = DEFAULT_GAMMA,
    tol: Optional[float] = DP_TOLERANCE
) -> DpResult:
    """
    Solve V = R_pi + gamma P_pi V by successive approximation until
    the sup-norm change is below `tol`.
    """

    table = policy_table(policy, mdp)
    values = np.zeros(mdp.n_states)
    for _ in range(MAX_DP_SWEEPS):
        updated = np.sum(table * _q_of(mdp, values, gamma), axis=1)
        change = float(np.max(np.abs(updated - values)))
        values = updated
        if change < tol:
            break

    q = _q_of(mdp, values, gamma)
    return DpResult(values=values, q=q, J=float(mdp.initial @ values), policy=table)


def value_iteration(
    mdp: TabularMdp,
    gamma: Optional[float] = DEFAULT_GAMMA,
    tol: Optional[float] = DP_TOLERANCE
) -> DpResult:
    """ Optimal values and the greedy policy (lowest-index ties). """

    values = np.zeros(mdp.n_states)
    for _ in range(MAX_DP_SWEEPS):
        updated = _q_of(mdp, values, gamma).max(axis=1)
        change = float(np.max(np.abs(updated - values)))
        values = updated
        if change < tol:
            break

    q = _q_of(mdp, values, gamma)
    greedy = np.zeros_like(q)
    greedy[np.arange(mdp.n_states), np.argmax(q, axis=1)] = 1.0
    return DpResult(values=values, q=q, J=float(mdp.initial @ values), policy=greedy)


def estimate_tabular_mdp(ds: TrajectoryDataset) -> TabularMdp:
    """
    The empirical MDP over the distinct observation rows of `ds`.
    State-action pairs never taken keep zero rewards and all-zero
    transition rows.
    """

    data = transitions(ds)
    initial_obs = np.stack([e.observations[0] for e in ds.episodes])
    cells, inverse = np.unique(
        np.concatenate([data.obs, data.next_obs, initial_obs]), axis=0, return_inverse=True
    )
    inverse = np.asarray(inverse).reshape(-1)
    n = len(data)
    state, next_state, start = inverse[:n], inverse[n:2 * n], inverse[2 * n:]

    S, A = cells.shape[0], ds.action_count
    counts = np.zeros((A, S, S))
    np.add.at(counts, (data.actions, state, next_state), 1.0)
    reward_sums = np.zeros((S, A))
    np.add.at(reward_sums, (state, data.actions), data.rewards)

    visits = counts.sum(axis=2)
    transitions_ = np.divide(counts, visits[:, :, None], out=np.zeros_like(counts), where=visits[:, :, None] > 0)
    rewards = np.divide(reward_sums, visits.T, out=np.zeros_like(reward_sums), where=visits.T > 0)

    return TabularMdp(
        transitions=transitions_,
        rewards=rewards,
        state_observations=cells,
        initial=np.bincount(start, minlength=S) / float(len(start)),
        action_set=ds.action_set
    )


@dataclass(frozen=True, eq=False)
class OrderReturnReport:
    """
    Held-out FQE returns of FQI policies learned under different
    order assumptions; `returns` is (n_splits, len(orders)).
    """

    orders: Tuple[int, ...]
    returns: np.ndarray
    compare: Tuple[int, int]
    wins: int
    trials: int
    sign_test_p: float

    @property
    def means(self) -> Dict[int, float]:
        return {k: float(self.returns[:, i].mean()) for i, k in enumerate(self.orders)}

    @property
    def best_order(self) -> int:
        means = self.means
        return max(self.orders, key=lambda k: (means[k], -k))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'orders': list(self.orders),
            'returns': self.returns.tolist(),
            'means': {str(k): v for k, v in self.means.items()},
            'best_order': self.best_order,
            'compare': list(self.compare),
            'wins': self.wins,
            'trials': self.trials,
            'sign_test_p': self.sign_test_p
        }


def order_return_study(
    ds: TrajectoryDataset,
    orders: Sequence[int],
    n_splits: Optional[int] = 20,
    cfg: Optional[RlConfig] = None,
    seed: Optional[int] = 0,
    compare: Optional[Tuple[int, int]] = None
) -> OrderReturnReport:
    """
    Cross-validated value of the order assumption. For each split
    the episodes are halved at random; for every order k an FQI
    policy is learned on the k-augmented training half and its
    value is estimated by FQE on the k-augmented testing half.

    `compare` = (high, low) runs a one-sided sign test that order
    `high` yields the larger return (default: largest vs smallest
    order).
    """

    cfg = cfg or RlConfig()
    orders = tuple(int(k) for k in orders)
    if not orders or min(orders) < 1:
        throw(
            error_cls=ConfigError,
            message="Order study: orders must be >= 1, got %s" % (list(orders),),
            code=ERROR_CODES['invalid_config']
        )
    if ds.n_episodes < 2 or int(n_splits) < 1:
        throw(
            error_cls=ConfigError,
            message="Order study: need at least 2 episodes and 1 split",
            code=ERROR_CODES['invalid_config']
        )
    compare = tuple(compare) if compare is not None else (max(orders), min(orders))
    if compare[0] not in orders or compare[1] not in orders:
        throw(
            error_cls=ConfigError,
            message="Order study: compared orders %s must be among %s" % (list(compare), list(orders)),
            code=ERROR_CODES['invalid_config']
        )

    returns = np.zeros((int(n_splits), len(orders)))
    for split in range(int(n_splits)):
        permutation = derive_rng(seed, 'split', split).permutation(ds.n_episodes)
        half = ds.n_episodes // 2
        train, test = ds.subset(permutation[:half]), ds.subset(permutation[half:])
        for i, k in enumerate(orders):
            _, policy = fqi(augment_order(train, k), cfg)
            _, returns[split, i] = fqe(augment_order(test, k), policy, cfg)
        logger.debug('Split %d: returns %s' % (split, returns[split].tolist()))

    high, low = orders.index(compare[0]), orders.index(compare[1])
    diff = returns[:, high] - returns[:, low]
    wins, trials = int(np.sum(diff > 0)), int(np.sum(diff != 0))
    p = float(binomtest(wins, trials, 0.5, alternative='greater').pvalue) if trials else 1.0

    report = OrderReturnReport(
        orders=orders,
        returns=returns,
        compare=(int(compare[0]), int(compare[1])),
        wins=wins,
        trials=trials,
        sign_test_p=p
    )
    logger.info('Order study: mean returns %s, sign test p = %.4f' % (report.means, p))
    return report
