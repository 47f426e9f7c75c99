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
Off-policy confidence intervals for J(pi): behaviour policy
models, per-episode direct-method, importance-sampling and doubly
robust scores, and Wald intervals.
"""

import dataclasses
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
from scipy.stats import norm
from sklearn.linear_model import LogisticRegression
from sklearn.pipeline import make_pipeline

from .constants import (
    DEFAULT_ALPHA,
    DEFAULT_PROB_FLOOR,
    DEFAULT_RATIO_CLIP
)
from .data import TrajectoryDataset, transitions
from .envs import Policy
from .errors import (
    ConfigError,
    CoverageError,
    ERROR_CODES,
    throw
)
from .logs import logger
from .regress import (
    ConstantModel,
    RegressorSpec,
    make_folds,
    random_feature_map
)
from .rl import QFunction, RlConfig, fqe
from .utils import derive_seed

BEHAVIOR_KINDS = ('logistic', 'tabular', 'policy', 'uniform')
OPE_METHODS = ('dm', 'is', 'dr')
Q_KINDS = ('fqe', 'zero')


def floor_probabilities(probs: np.ndarray, floor: float) -> np.ndarray:
    """
    Raise every probability to at least `floor` and rescale the
    remaining entries so that each row still sums to one.
    """

    probs = np.array(probs, dtype=np.float64)
    A = probs.shape[1]
    if floor <= 0:
        return probs / probs.sum(axis=1, keepdims=True)

    fixed = np.zeros_like(probs, dtype=bool)
    for _ in range(A):
        free_mass = 1.0 - floor * fixed.sum(axis=1, keepdims=True)
        free_total = np.where(fixed, 0.0, probs).sum(axis=1, keepdims=True)
        scaled = np.where(
            free_total > 0,
            probs * free_mass / np.where(free_total > 0, free_total, 1.0),
            free_mass / np.maximum(A - fixed.sum(axis=1, keepdims=True), 1)
        )
        low = ~fixed & (scaled < floor)
        if not low.any():
            return np.where(fixed, floor, scaled)
        fixed |= low
    return np.where(fixed, floor, scaled)


@dataclass(frozen=True, eq=False)
class BehaviorModel:
    """
    An estimate of P(A_t = a | O_t = o), floored at `floor`.

    Kinds:
        `logistic`: multinomial logistic regression on random
            cosine features of the observation.
        `tabular`: action frequencies per distinct observation row;
            unseen rows use the marginal frequencies.
        `policy`: a known behaviour policy.
        `uniform`: 1 / |A| (deliberately misspecified).
    """

    kind: str
    action_count: int
    floor: float = DEFAULT_PROB_FLOOR
    estimator: Optional[Any] = None
    calibration: Optional[float] = None

    def raw_probabilities(self, obs) -> np.ndarray:
        obs = np.asarray(obs, dtype=np.float64)
        if obs.ndim == 1:
            obs = obs[None]
        n, A = obs.shape[0], self.action_count

        if self.kind == 'uniform':
            return np.full((n, A), 1.0 / A)
        if self.kind == 'policy':
            return self.estimator.probabilities(obs)
        if self.kind == 'tabular':
            index, table, marginal = self.estimator
            out = np.tile(marginal, (n, 1))
            for i, row in enumerate(obs.tolist()):
                cell = index.get(tuple(row))
                if cell is not None:
                    out[i] = table[cell]
            return out

        out = np.zeros((n, A))
        out[:, self.estimator.classes_] = self.estimator.predict_proba(obs)
        return out

    def probabilities(self, obs) -> np.ndarray:
        return floor_probabilities(self.raw_probabilities(obs), self.floor)

    def to_dict(self) -> Dict[str, Any]:
        item = {
            'kind': self.kind,
            'action_count': self.action_count,
            'floor': self.floor,
            'calibration': self.calibration
        }
        if self.kind == 'policy':
            item['policy'] = self.estimator.to_dict()
        return item


def fit_behavior(
    ds: TrajectoryDataset,
    kind: Optional[str] = 'logistic',
    floor: Optional[float] = DEFAULT_PROB_FLOOR,
    spec: Optional[RegressorSpec] = None,
    policy: Optional[Policy] = None
) -> BehaviorModel:
    """
    Fit a behaviour model. Every action must occur in `ds`.

    Example:
    ---
        >>> model = fit_behavior(ds, kind='tabular')
        >>> model.probabilities(ds.episodes[0].observations[:-1])
    """

    if kind not in BEHAVIOR_KINDS:
        throw(
            error_cls=ConfigError,
            message="Behavior: kind must be one of %s, got '%s'" % (list(BEHAVIOR_KINDS), kind),
            code=ERROR_CODES['invalid_config']
        )
    A = ds.action_count
    if not 0.0 <= float(floor) <= 1.0 / A:
        throw(
            error_cls=ConfigError,
            message="Behavior: floor must lie in [0, 1/|A|], got %s" % (floor,),
            code=ERROR_CODES['invalid_config']
        )

    counts = ds.action_counts()
    missing = [label for label, n in counts.items() if n == 0]
    if missing:
        throw(
            error_cls=CoverageError,
            message="Behavior: actions %s are never observed (counts: %s)" % (missing, counts),
            code=ERROR_CODES['coverage_error']
        )

    data = transitions(ds)
    estimator = None
    if kind == 'policy':
        if policy is None or policy.action_count != A:
            throw(
                error_cls=ConfigError,
                message="Behavior: kind 'policy' needs a policy over %d actions" % A,
                code=ERROR_CODES['invalid_config']
            )
        estimator = policy
    elif kind == 'tabular':
        cells, inverse = np.unique(data.obs, axis=0, return_inverse=True)
        inverse = np.asarray(inverse).reshape(-1)
        table = np.zeros((cells.shape[0], A))
        np.add.at(table, (inverse, data.actions), 1.0)
        table /= table.sum(axis=1, keepdims=True)
        marginal = np.bincount(data.actions, minlength=A) / float(len(data))
        estimator = ({tuple(row): i for i, row in enumerate(cells.tolist())}, table, marginal)
    elif kind == 'logistic':
        spec = spec or RegressorSpec()
        sampler, _ = random_feature_map(data.obs, spec)
        estimator = make_pipeline(sampler, LogisticRegression(max_iter=1000)).fit(data.obs, data.actions)

    model = BehaviorModel(kind=kind, action_count=A, floor=float(floor), estimator=estimator)
    realized = model.probabilities(data.obs)[np.arange(len(data)), data.actions]
    calibration = float(realized.mean())
    if calibration < 1.0 / A - 1e-9:
        logger.warning('Behavior model assigns %.3f on average to the realized action (below 1/|A|)' % calibration)
    return dataclasses.replace(model, calibration=calibration)


def wald_ci(estimate: float, se: float, alpha: Optional[float] = DEFAULT_ALPHA) -> Tuple[float, float]:
    """ estimate -/+ z_{1 - alpha/2} * se. """

    if se < 0 or not 0 < alpha < 1:
        throw(
            error_cls=ConfigError,
            message="Wald CI: need se >= 0 and alpha in (0, 1), got %s and %s" % (se, alpha),
            code=ERROR_CODES['invalid_config']
        )
    half = float(norm.ppf(1.0 - alpha / 2.0)) * se
    return float(estimate - half), float(estimate + half)


@dataclass(frozen=True)
class OpeConfig:
    """
    Parameter:
        `method` (str): `dm`, `is` or `dr`.
        `K` (int): cross-fitting folds; 1 fits the nuisances on all
            episodes.
        `behavior` (str): behaviour model kind.
        `q_kind` (str): `fqe`, or `zero` for Q = 0.
        `rl` (RlConfig): discount and FQE settings.
    """

    method: str = 'dr'
    alpha: float = DEFAULT_ALPHA
    K: int = 2
    behavior: str = 'logistic'
    q_kind: str = 'fqe'
    prob_floor: float = DEFAULT_PROB_FLOOR
    ratio_clip: float = DEFAULT_RATIO_CLIP
    rl: RlConfig = field(default_factory=RlConfig)
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.rl, Mapping):
            object.__setattr__(self, 'rl', RlConfig.from_dict(self.rl))
        problems = []
        if self.method not in OPE_METHODS:
            problems.append('method must be one of %s' % (list(OPE_METHODS),))
        if self.behavior not in BEHAVIOR_KINDS:
            problems.append('behavior must be one of %s' % (list(BEHAVIOR_KINDS),))
        if self.q_kind not in Q_KINDS:
            problems.append('q_kind must be one of %s' % (list(Q_KINDS),))
        if not 0 < float(self.alpha) < 1:
            problems.append('alpha must lie in (0, 1)')
        if int(self.K) < 1:
            problems.append('K must be >= 1')
        if not float(self.ratio_clip) >= 1:
            problems.append('ratio_clip must be >= 1')
        if problems:
            throw(
                error_cls=ConfigError,
                message="OPE config: %s" % '; '.join(problems),
                code=ERROR_CODES['invalid_config']
            )

    @property
    def gamma(self) -> float:
        return self.rl.gamma

    def to_dict(self) -> Dict[str, Any]:
        item = dataclasses.asdict(self)
        item['rl'] = self.rl.to_dict()
        return item

    @classmethod
    def from_dict(cls, item: Mapping[str, Any]) -> 'OpeConfig':
        return cls(**dict(item))


@dataclass(frozen=True, eq=False)
class OpeReport:
    """
    estimate, standard error and Wald interval of J(pi). The
    horizon is truncated at each episode's length, which leaves a
    bias of order gamma^T.
    """

    estimate: float
    se: float
    ci: Tuple[float, float]
    n_episodes: int
    method: str
    alpha: float
    gamma: float
    clip_fraction: float = 0.0
    scores: Optional[np.ndarray] = None
    warnings: Tuple[str, ...] = ()
    config: Mapping[str, Any] = field(default_factory=dict)

    @property
    def half_width(self) -> float:
        return (self.ci[1] - self.ci[0]) / 2.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'estimate': self.estimate,
            'se': self.se,
            'ci': list(self.ci),
            'n_episodes': self.n_episodes,
            'method': self.method,
            'alpha': self.alpha,
            'gamma': self.gamma,
            'clip_fraction': self.clip_fraction,
            'warnings': list(self.warnings),
            'config': dict(self.config)
        }


def _episode_scores(
    episodes,
    policy: Policy,
    q: QFunction,
    behavior: BehaviorModel,
    gamma: float,
    method: str,
    ratio_clip: float
) -> Tuple[np.ndarray, int, int]:
    """ Per-episode scores, clipped ratio count and decision count. """

    log_clip = np.log(ratio_clip)
    scores, clipped, decisions = [], 0, 0
    for e in episodes:
        T = e.horizon
        steps = np.arange(T)
        pi = policy.probabilities(e.observations)
        q_values = q.values(e.observations)
        v = np.sum(pi * q_values, axis=1)

        with np.errstate(divide='ignore'):
            log_ratio = np.log(pi[steps, e.actions]) - np.log(behavior.probabilities(e.observations[:-1])[steps, e.actions])
        cumulative = np.cumsum(log_ratio)
        clipped += int(np.sum(cumulative > log_clip))
        decisions += T
        ratios = np.exp(np.minimum(cumulative, log_clip))
        discounts = gamma ** steps

        if method == 'dm':
            score = v[0]
        elif method == 'is':
            score = np.sum(discounts * ratios * e.rewards)
        else:
            correction = e.rewards + gamma * v[1:] - q_values[steps, e.actions]
            score = v[0] + np.sum(discounts * ratios * correction)
        scores.append(float(score))
    return np.array(scores), clipped, decisions


def _report(scores, clipped, decisions, method, alpha, gamma, config=None) -> OpeReport:
    warnings: List[str] = []
    n = scores.shape[0]
    estimate = float(np.mean(scores))
    if n > 1:
        se = float(np.std(scores, ddof=1) / np.sqrt(n))
    else:
        se = 0.0
        warnings.append('a single episode gives no standard error; se set to 0')
    clip_fraction = clipped / float(decisions) if decisions else 0.0
    if clipped:
        message = 'cumulative importance ratios clipped in %.2f%% of decisions' % (100 * clip_fraction)
        logger.warning(message)
        warnings.append(message)

    report = OpeReport(
        estimate=estimate,
        se=se,
        ci=wald_ci(estimate, se, alpha),
        n_episodes=n,
        method=method,
        alpha=float(alpha),
        gamma=float(gamma),
        clip_fraction=clip_fraction,
        scores=scores,
        warnings=tuple(warnings),
        config=dict(config or {})
    )
    logger.info('OPE (%s): J = %.4f, CI = [%.4f, %.4f]' % (method, estimate, report.ci[0], report.ci[1]))
    return report


def dr_estimate(
    ds: TrajectoryDataset,
    policy: Policy,
    q: QFunction,
    behavior: BehaviorModel,
    gamma: Optional[float] = None,
    alpha: Optional[float] = DEFAULT_ALPHA,
    method: Optional[str] = 'dr',
    ratio_clip: Optional[float] = DEFAULT_RATIO_CLIP
) -> OpeReport:
    """
    Per-episode doubly robust score

        psi = V(o_0) + sum_t gamma^t rho_{0:t} (r_t + gamma V(o_{t+1}) - Q(o_t, a_t))

    with V(o) = sum_a pi(a|o) Q(o, a) and rho_{0:t} the cumulative
    ratio pi / b, computed in log space and clipped at `ratio_clip`.
    `dm` keeps V(o_0) only; `is` is sum_t gamma^t rho_{0:t} r_t.
    The estimate is the mean score with a Wald interval.
    """

    gamma = RlConfig().gamma if gamma is None else float(gamma)
    if method not in OPE_METHODS:
        throw(
            error_cls=ConfigError,
            message="OPE: method must be one of %s, got '%s'" % (list(OPE_METHODS), method),
            code=ERROR_CODES['invalid_config']
        )
    scores, clipped, decisions = _episode_scores(
        ds.episodes, policy, q, behavior, gamma, method, ratio_clip
    )
    return _report(scores, clipped, decisions, method, alpha, gamma)


def zero_q(obs_dim: int, action_count: int) -> QFunction:
    return QFunction(models=tuple(
        ConstantModel(mean=np.zeros(1), n_inputs=obs_dim) for _ in range(action_count)
    ))


def _fit_nuisances(train: TrajectoryDataset, policy: Policy, cfg: OpeConfig, behavior_policy):
    if cfg.q_kind == 'zero' or cfg.method == 'is':
        q = zero_q(train.obs_dim, train.action_count)
    else:
        q, _ = fqe(train, policy, cfg.rl)
    behavior = fit_behavior(
        train, kind=cfg.behavior, floor=cfg.prob_floor,
        spec=cfg.rl.regressor, policy=behavior_policy
    )
    return q, behavior


def cross_fit_ope(
    ds: TrajectoryDataset,
    policy: Policy,
    cfg: Optional[OpeConfig] = None,
    behavior_policy: Optional[Policy] = None
) -> OpeReport:
    """
    Cross-fitted off-policy interval: for each of `cfg.K` folds of
    episodes the Q-function (FQE) and the behaviour model are fitted
    on the other folds and scored on the fold's episodes.
    """

    cfg = cfg or OpeConfig()
    if cfg.K == 1:
        q, behavior = _fit_nuisances(ds, policy, cfg, behavior_policy)
        scores, clipped, decisions = _episode_scores(
            ds.episodes, policy, q, behavior, cfg.gamma, cfg.method, cfg.ratio_clip
        )
        return _report(scores, clipped, decisions, cfg.method, cfg.alpha, cfg.gamma, cfg.to_dict())

    folds = make_folds(ds, cfg.K, derive_seed(cfg.seed, 'ope-folds'))
    scores = np.zeros(ds.n_episodes)
    clipped = decisions = 0
    for f in range(folds.K):
        q, behavior = _fit_nuisances(ds.subset(folds.complement(f)), policy, cfg, behavior_policy)
        members = folds.members(f)
        fold_scores, c, d = _episode_scores(
            [ds.episodes[int(i)] for i in members], policy, q, behavior,
            cfg.gamma, cfg.method, cfg.ratio_clip
        )
        scores[members] = fold_scores
        clipped += c
        decisions += d

    return _report(scores, clipped, decisions, cfg.method, cfg.alpha, cfg.gamma, cfg.to_dict())
