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
Trajectory data model: episodes of observation-action-reward
triplets, file ingestion, standardization and the lag
augmentation that turns a k-th order process into a first
order one.
"""

import json
import pathlib
import dataclasses
from dataclasses import dataclass, field
from typing import (
    Any,
    Dict,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple
)

import numpy as np
import pandas as pd

from .errors import (
    DataError,
    ERROR_CODES,
    throw
)
from .logs import logger
from .serializer import JSONSerializer, write_json
from .utils import one_hot


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Episode:
    """
    One trajectory: `observations` has T+1 rows, `actions`
    (integer codes into the dataset's action set) and `rewards`
    have T entries.
    """

    observations: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    episode_id: str = '0'

    def __post_init__(self):
        obs = np.array(self.observations, dtype=np.float64)
        if obs.ndim == 1:
            obs = obs[:, None]
        actions = np.array(self.actions, dtype=np.int64).reshape(-1)
        rewards = np.array(self.rewards, dtype=np.float64).reshape(-1)

        if obs.ndim != 2 or obs.shape[0] != actions.shape[0] + 1 \
                or actions.shape[0] != rewards.shape[0]:
            throw(
                error_cls=DataError,
                message="Episode '%s': need |observations| = |actions| + 1 = |rewards| + 1, got %d, %d, %d" % (
                    self.episode_id, obs.shape[0], actions.shape[0], rewards.shape[0]
                ),
                code=ERROR_CODES['dimension_error']
            )

        object.__setattr__(self, 'observations', _frozen(obs))
        object.__setattr__(self, 'actions', _frozen(actions))
        object.__setattr__(self, 'rewards', _frozen(rewards))
        object.__setattr__(self, 'episode_id', str(self.episode_id))

    @property
    def horizon(self) -> int:
        return int(self.actions.shape[0])

    @property
    def obs_dim(self) -> int:
        return int(self.observations.shape[1])

    def __eq__(self, other):
        if not isinstance(other, Episode):
            return NotImplemented
        return (
            self.episode_id == other.episode_id
            and np.array_equal(self.observations, other.observations)
            and np.array_equal(self.actions, other.actions)
            and np.array_equal(self.rewards, other.rewards)
        )

    __hash__ = None


@dataclass(frozen=True)
class TrajectoryDataset:
    """
    A non-empty set of episodes sharing one observation
    dimension and one ordered action set.

    Example:
    ---
        >>> ds = TrajectoryDataset(
        >>>     episodes=(Episode([[0.], [1.]], [0], [1.]),),
        >>>     action_set=('a', 'b'),
        >>>     obs_dim=1
        >>> )
        >>> ds.n_transitions
        >>> 1
    """

    episodes: Tuple[Episode, ...]
    action_set: Tuple[str, ...]
    obs_dim: int
    meta: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        episodes = tuple(self.episodes)
        action_set = tuple(str(a) for a in self.action_set)
        object.__setattr__(self, 'episodes', episodes)
        object.__setattr__(self, 'action_set', action_set)
        object.__setattr__(self, 'obs_dim', int(self.obs_dim))
        object.__setattr__(self, 'meta', dict(self.meta))

        if not episodes:
            throw(
                error_cls=DataError,
                message="Dataset: at least one episode is required",
                code=ERROR_CODES['not_found']
            )
        if len(set(action_set)) != len(action_set) or not action_set:
            throw(
                error_cls=DataError,
                message="Dataset: action set must be non-empty and distinct, got %s" % (list(action_set),),
                code=ERROR_CODES['parse_error']
            )
        if self.obs_dim < 1:
            throw(
                error_cls=DataError,
                message="Dataset: obs_dim must be positive, got %d" % self.obs_dim,
                code=ERROR_CODES['dimension_error']
            )

        for episode in episodes:
            if episode.obs_dim != self.obs_dim:
                throw(
                    error_cls=DataError,
                    message="Episode '%s': observation dimension %d does not match obs_dim %d" % (
                        episode.episode_id, episode.obs_dim, self.obs_dim
                    ),
                    code=ERROR_CODES['dimension_error']
                )
            if episode.horizon and (episode.actions.min() < 0 or episode.actions.max() >= len(action_set)):
                throw(
                    error_cls=DataError,
                    message="Episode '%s': action codes outside the action set %s" % (
                        episode.episode_id, list(action_set)
                    ),
                    code=ERROR_CODES['parse_error']
                )

    @property
    def n_episodes(self) -> int:
        return len(self.episodes)

    @property
    def n_transitions(self) -> int:
        """ N, the total number of transitions. """
        return int(sum(e.horizon for e in self.episodes))

    @property
    def horizons(self) -> List[int]:
        return [e.horizon for e in self.episodes]

    @property
    def max_horizon(self) -> int:
        return max(self.horizons)

    @property
    def action_count(self) -> int:
        return len(self.action_set)

    def action_counts(self) -> Dict[str, int]:
        counts = np.zeros(self.action_count, dtype=np.int64)
        for episode in self.episodes:
            counts += np.bincount(episode.actions, minlength=self.action_count)
        return {label: int(c) for label, c in zip(self.action_set, counts)}

    def subset(self, indices: Sequence[int]) -> 'TrajectoryDataset':
        return dataclasses.replace(
            self, episodes=tuple(self.episodes[int(i)] for i in indices)
        )

    def with_meta(self, **meta) -> 'TrajectoryDataset':
        merged = dict(self.meta)
        merged.update(meta)
        return dataclasses.replace(self, meta=merged)

    def pooled_observations(self) -> np.ndarray:
        return np.concatenate([e.observations for e in self.episodes], axis=0)

    def __eq__(self, other):
        if not isinstance(other, TrajectoryDataset):
            return NotImplemented
        return (
            self.action_set == other.action_set
            and self.obs_dim == other.obs_dim
            and dict(self.meta) == dict(other.meta)
            and self.episodes == other.episodes
        )

    __hash__ = None


@dataclass(frozen=True)
class ScalingParams:
    """ Per-dimension location and (strictly positive) scale. """

    location: np.ndarray
    scale: np.ndarray

    def __post_init__(self):
        location = np.array(self.location, dtype=np.float64).reshape(-1)
        scale = np.array(self.scale, dtype=np.float64).reshape(-1)
        if location.shape != scale.shape or np.any(scale <= 0):
            throw(
                error_cls=DataError,
                message="Scaling parameters need matching shapes and positive scales",
                code=ERROR_CODES['dimension_error']
            )
        object.__setattr__(self, 'location', _frozen(location))
        object.__setattr__(self, 'scale', _frozen(scale))

    def to_dict(self) -> Dict[str, Any]:
        return {'location': self.location.tolist(), 'scale': self.scale.tolist()}


@dataclass(frozen=True)
class Transitions:
    """ All one-step transitions of a dataset, stacked row-wise. """

    obs: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_obs: np.ndarray
    episode: np.ndarray
    time: np.ndarray

    def __len__(self):
        return int(self.actions.shape[0])


@dataclass(frozen=True)
class TransitionView:
    """
    The gap-q tuples (O_t, A_t, O_{t+1}, A_{t+1}, O_{t+q-1}, A_{t+q-1}, O_{t+q})
    of a dataset, one row per tuple, with the episode index and
    start time t of each tuple.
    """

    q: int
    obs_t: np.ndarray
    act_t: np.ndarray
    obs_t1: np.ndarray
    act_t1: np.ndarray
    obs_lag: np.ndarray
    act_lag: np.ndarray
    obs_next: np.ndarray
    episode: np.ndarray
    time: np.ndarray

    def __len__(self):
        return int(self.episode.shape[0])


def transitions(ds: TrajectoryDataset) -> Transitions:
    obs, actions, rewards, next_obs, episode, time = [], [], [], [], [], []
    for index, e in enumerate(ds.episodes):
        obs.append(e.observations[:-1])
        next_obs.append(e.observations[1:])
        actions.append(e.actions)
        rewards.append(e.rewards)
        episode.append(np.full(e.horizon, index, dtype=np.int64))
        time.append(np.arange(e.horizon, dtype=np.int64))

    return Transitions(
        obs=np.concatenate(obs, axis=0),
        actions=np.concatenate(actions),
        rewards=np.concatenate(rewards),
        next_obs=np.concatenate(next_obs, axis=0),
        episode=np.concatenate(episode),
        time=np.concatenate(time)
    )


def transition_view(ds: TrajectoryDataset, q: int) -> TransitionView:
    """
    Emit every gap-q tuple: for each episode and each t with
    t + q <= T. An episode contributes max(0, T - q + 1) tuples;
    tuples never straddle episodes.
    """

    if int(q) < 2:
        throw(
            error_cls=DataError,
            message="Transition view: gap q must be >= 2, got %s" % (q,),
            code=ERROR_CODES['invalid_config']
        )
    q = int(q)
    d = ds.obs_dim
    parts = {name: [] for name in (
        'obs_t', 'act_t', 'obs_t1', 'act_t1', 'obs_lag', 'act_lag', 'obs_next', 'episode', 'time'
    )}

    for index, e in enumerate(ds.episodes):
        count = e.horizon - q + 1
        if count <= 0:
            continue
        t = np.arange(count)
        parts['obs_t'].append(e.observations[t])
        parts['act_t'].append(e.actions[t])
        parts['obs_t1'].append(e.observations[t + 1])
        parts['act_t1'].append(e.actions[t + 1])
        parts['obs_lag'].append(e.observations[t + q - 1])
        parts['act_lag'].append(e.actions[t + q - 1])
        parts['obs_next'].append(e.observations[t + q])
        parts['episode'].append(np.full(count, index, dtype=np.int64))
        parts['time'].append(t.astype(np.int64))

    def stack(name, width=None):
        if parts[name]:
            return np.concatenate(parts[name], axis=0)
        if width is None:
            return np.zeros(0, dtype=np.int64)
        return np.zeros((0, width))

    return TransitionView(
        q=q,
        obs_t=stack('obs_t', d),
        act_t=stack('act_t'),
        obs_t1=stack('obs_t1', d),
        act_t1=stack('act_t1'),
        obs_lag=stack('obs_lag', d),
        act_lag=stack('act_lag'),
        obs_next=stack('obs_next', d),
        episode=stack('episode'),
        time=stack('time')
    )


def standardize(ds: TrajectoryDataset) -> Tuple[TrajectoryDataset, ScalingParams]:
    """
    Center and scale every observation dimension with statistics
    pooled over all time points of all episodes. The population
    divisor (ddof = 0) is used; constant dimensions keep scale 1.
    """

    pooled = ds.pooled_observations()
    location = pooled.mean(axis=0)
    scale = pooled.std(axis=0, ddof=0)
    scale = np.where(scale > 0, scale, 1.0)
    params = ScalingParams(location=location, scale=scale)

    return _rescale(ds, lambda obs: (obs - params.location) / params.scale), params


def unstandardize(ds: TrajectoryDataset, params: ScalingParams) -> TrajectoryDataset:
    return _rescale(ds, lambda obs: obs * params.scale + params.location)


def _rescale(ds: TrajectoryDataset, transform) -> TrajectoryDataset:
    episodes = tuple(
        Episode(
            observations=transform(e.observations),
            actions=e.actions,
            rewards=e.rewards,
            episode_id=e.episode_id
        )
        for e in ds.episodes
    )
    return dataclasses.replace(ds, episodes=episodes)


def augment_order(
    ds: TrajectoryDataset,
    k: int,
    include_reward: Optional[bool] = False
) -> TrajectoryDataset:
    """
    Merge the current observation with its k-1 lagged
    observation-action(-reward) blocks. The new observation at
    original time t (t = k-1 .. T) is

        (O_t, onehot(A_{t-1}), [R_{t-1}], O_{t-1}, ...,
         onehot(A_{t-k+1}), [R_{t-k+1}], O_{t-k+1})

    so each episode keeps T - k + 1 transitions. k = 1 is the
    identity.

    Parameter:
        `k` (int):
            The order of the Markov model to reduce to first order.

        `include_reward` (Optional[bool]):
            Carry the reward realised at each lag in its block.
    """

    k = int(k)
    if k < 1:
        throw(
            error_cls=DataError,
            message="Augmentation: order k must be >= 1, got %d" % k,
            code=ERROR_CODES['invalid_config']
        )
    if k == 1:
        return ds

    for e in ds.episodes:
        if e.horizon < k:
            throw(
                error_cls=DataError,
                message="Episode '%s': horizon %d is shorter than the order k=%d" % (
                    e.episode_id, e.horizon, k
                ),
                code=ERROR_CODES['too_short']
            )

    n_actions = ds.action_count
    episodes = []
    for e in ds.episodes:
        T = e.horizon
        blocks = [e.observations[k - 1:T + 1]]
        for lag in range(1, k):
            window = slice(k - 1 - lag, T + 1 - lag)
            blocks.append(one_hot(e.actions[window], n_actions))
            if include_reward:
                blocks.append(e.rewards[window][:, None])
            blocks.append(e.observations[window])

        episodes.append(Episode(
            observations=np.concatenate(blocks, axis=1),
            actions=e.actions[k - 1:],
            rewards=e.rewards[k - 1:],
            episode_id=e.episode_id
        ))

    obs_dim = ds.obs_dim + (k - 1) * (n_actions + ds.obs_dim + (1 if include_reward else 0))
    meta = dict(ds.meta)
    meta.update({'augmented_order': k, 'augmented_with_reward': bool(include_reward)})

    return TrajectoryDataset(
        episodes=tuple(episodes),
        action_set=ds.action_set,
        obs_dim=obs_dim,
        meta=meta
    )


def fold_rewards(ds: TrajectoryDataset) -> TrajectoryDataset:
    """
    Incorporate R_t into O_{t+1}: the new observation at time s is
    (O_{s+1}, R_s), with actions and rewards shifted by one step.
    Every episode loses its first step and needs T >= 2.
    """

    episodes = []
    for e in ds.episodes:
        if e.horizon < 2:
            throw(
                error_cls=DataError,
                message="Episode '%s': folding rewards needs a horizon of at least 2, got %d" % (
                    e.episode_id, e.horizon
                ),
                code=ERROR_CODES['too_short']
            )
        episodes.append(Episode(
            observations=np.concatenate([e.observations[1:], e.rewards[:, None]], axis=1),
            actions=e.actions[1:],
            rewards=e.rewards[1:],
            episode_id=e.episode_id
        ))

    meta = dict(ds.meta)
    meta['rewards_folded'] = True
    return TrajectoryDataset(
        episodes=tuple(episodes),
        action_set=ds.action_set,
        obs_dim=ds.obs_dim + 1,
        meta=meta
    )


def _infer_format(path: pathlib.Path, format: Optional[str]) -> str:
    if format:
        format = format.lower()
    else:
        format = path.suffix.lstrip('.').lower()

    if format not in ('csv', 'json'):
        throw(
            error_cls=DataError,
            message="Unknown dataset format '%s' for %s (expected csv or json)" % (format, path),
            code=ERROR_CODES['parse_error']
        )
    return format


def _order_labels(labels: Sequence[str]) -> Tuple[str, ...]:
    labels = sorted(set(labels))
    try:
        return tuple(sorted(labels, key=float))
    except ValueError:
        return tuple(labels)


def _label_of(value: Any) -> str:
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return str(value)


def load_dataset(
    path: str,
    format: Optional[str] = None,
    action_set: Optional[Sequence[str]] = None
) -> TrajectoryDataset:
    """
    Load a dataset from a CSV (`episode,t,a,r,o_1..o_d`) or JSON
    file. Episodes are grouped by id in order of first appearance
    and ordered by time index.

    Parameter:
        `path` (str):
            The file location.

        `format` (Optional[str]):
            `csv` or `json`; inferred from the suffix when omitted.

        `action_set` (Optional[Sequence[str]]):
            The declared ordered action set. Defaults to the file's
            declared set (json) or the sorted distinct labels.
    """

    path = pathlib.Path(path)
    if not path.exists():
        throw(
            error_cls=DataError,
            message="Dataset file '%s' not found" % (path,),
            code=ERROR_CODES['not_found']
        )

    format = _infer_format(path, format)
    logger.debug('Loading %s dataset from %s' % (format, path))

    if format == 'csv':
        return _load_csv(path, action_set)
    return _load_json(path, action_set)


def _load_csv(path: pathlib.Path, action_set: Optional[Sequence[str]]) -> TrajectoryDataset:
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as error:
        throw(
            error_cls=DataError,
            message="CSV '%s' could not be parsed: %s" % (path, error),
            code=ERROR_CODES['parse_error']
        )

    frame.columns = [str(c).strip() for c in frame.columns]
    for column in ('episode', 't', 'a', 'r'):
        if column not in frame.columns:
            throw(
                error_cls=DataError,
                message="CSV '%s': missing required column '%s'" % (path, column),
                code=ERROR_CODES['parse_error']
            )

    obs_columns = [c for c in frame.columns if c.startswith('o_')]
    expected = ['o_%d' % i for i in range(1, len(obs_columns) + 1)]
    if not obs_columns or obs_columns != expected:
        throw(
            error_cls=DataError,
            message="CSV '%s': observation columns must be o_1..o_d in order, got %s" % (path, obs_columns),
            code=ERROR_CODES['parse_error']
        )
    unknown = set(frame.columns) - {'episode', 't', 'a', 'r'} - set(obs_columns)
    if unknown:
        throw(
            error_cls=DataError,
            message="CSV '%s': unknown columns %s" % (path, sorted(unknown)),
            code=ERROR_CODES['parse_error']
        )
    if frame.empty:
        throw(
            error_cls=DataError,
            message="CSV '%s': no rows" % (path,),
            code=ERROR_CODES['parse_error']
        )

    def numeric(column: str) -> np.ndarray:
        values = pd.to_numeric(frame[column].str.strip(), errors='coerce')
        return values.to_numpy(dtype=np.float64)

    times = numeric('t')
    obs = np.column_stack([numeric(c) for c in obs_columns])
    rewards = numeric('r')
    labels = frame['a'].str.strip().to_numpy()
    episode_ids = frame['episode'].str.strip().to_numpy()

    for row in range(len(frame)):
        line = row + 2
        if not episode_ids[row]:
            throw(
                error_cls=DataError,
                message="CSV '%s' line %d: empty episode id" % (path, line),
                code=ERROR_CODES['parse_error']
            )
        if not np.isfinite(times[row]) or not float(times[row]).is_integer():
            throw(
                error_cls=DataError,
                message="CSV '%s' line %d: time index '%s' is not an integer" % (path, line, frame['t'].iloc[row]),
                code=ERROR_CODES['parse_error']
            )
        bad = [c for c, v in zip(obs_columns, obs[row]) if not np.isfinite(v)]
        if bad:
            throw(
                error_cls=DataError,
                message="CSV '%s' line %d: non-numeric observation in column(s) %s" % (path, line, bad),
                code=ERROR_CODES['parse_error']
            )

    groups: Dict[str, List[int]] = {}
    for row, episode_id in enumerate(episode_ids):
        groups.setdefault(episode_id, []).append(row)

    raw = []
    for episode_id, rows in groups.items():
        rows = sorted(rows, key=lambda r: times[r])
        t = times[rows].astype(np.int64)
        if not np.array_equal(t, np.arange(len(rows))):
            throw(
                error_cls=DataError,
                message="CSV '%s' episode '%s': time indices must be contiguous from 0, got %s (line %d)" % (
                    path, episode_id, t.tolist(), rows[0] + 2
                ),
                code=ERROR_CODES['parse_error']
            )
        if len(rows) < 2:
            throw(
                error_cls=DataError,
                message="CSV '%s' episode '%s': at least two rows (one transition) are required (line %d)" % (
                    path, episode_id, rows[0] + 2
                ),
                code=ERROR_CODES['parse_error']
            )
        for r in rows[:-1]:
            if not labels[r]:
                throw(
                    error_cls=DataError,
                    message="CSV '%s' line %d: missing action" % (path, r + 2),
                    code=ERROR_CODES['parse_error']
                )
            if not np.isfinite(rewards[r]):
                throw(
                    error_cls=DataError,
                    message="CSV '%s' line %d: reward '%s' is not numeric" % (path, r + 2, frame['r'].iloc[r]),
                    code=ERROR_CODES['parse_error']
                )
        raw.append((episode_id, obs[rows], [labels[r] for r in rows[:-1]], rewards[rows[:-1]], rows[:-1]))

    declared = tuple(str(a) for a in action_set) if action_set else \
        _order_labels([l for _, _, acts, _, _ in raw for l in acts])
    codes = {label: i for i, label in enumerate(declared)}

    episodes = []
    for episode_id, o, acts, r, rows in raw:
        missing = [(row, a) for row, a in zip(rows, acts) if a not in codes]
        if missing:
            row, label = missing[0]
            throw(
                error_cls=DataError,
                message="CSV '%s' line %d: action '%s' is not in the action set %s" % (
                    path, row + 2, label, list(declared)
                ),
                code=ERROR_CODES['parse_error']
            )
        episodes.append(Episode(o, [codes[a] for a in acts], r, episode_id=episode_id))

    return TrajectoryDataset(
        episodes=tuple(episodes),
        action_set=declared,
        obs_dim=len(obs_columns),
        meta={'source': str(path)}
    )


def _load_json(path: pathlib.Path, action_set: Optional[Sequence[str]]) -> TrajectoryDataset:
    try:
        payload = JSONSerializer().loads(path.read_text(encoding='utf-8'))
    except (json.JSONDecodeError, ValueError, UnicodeDecodeError) as error:
        throw(
            error_cls=DataError,
            message="JSON '%s' could not be parsed: %s" % (path, error),
            code=ERROR_CODES['parse_error']
        )

    meta: Dict[str, Any] = {}
    declared = None
    if isinstance(payload, dict):
        unknown = set(payload) - {'episodes', 'action_set', 'obs_dim', 'meta'}
        if 'episodes' not in payload or unknown:
            throw(
                error_cls=DataError,
                message="JSON '%s': expected an 'episodes' array (unknown keys: %s)" % (path, sorted(unknown)),
                code=ERROR_CODES['parse_error']
            )
        meta = dict(payload.get('meta') or {})
        if payload.get('action_set') is not None:
            declared = tuple(_label_of(a) for a in payload['action_set'])
        records = payload['episodes']
    else:
        records = payload

    if not isinstance(records, list) or not records:
        throw(
            error_cls=DataError,
            message="JSON '%s': expected a non-empty array of episodes" % (path,),
            code=ERROR_CODES['parse_error']
        )

    if action_set:
        declared = tuple(str(a) for a in action_set)

    parsed = []
    for index, record in enumerate(records):
        if not isinstance(record, dict):
            throw(
                error_cls=DataError,
                message="JSON '%s' episode #%d: expected an object" % (path, index),
                code=ERROR_CODES['parse_error']
            )
        for key in ('obs', 'actions', 'rewards'):
            if key not in record:
                throw(
                    error_cls=DataError,
                    message="JSON '%s' episode #%d: missing key '%s'" % (path, index, key),
                    code=ERROR_CODES['parse_error']
                )
        try:
            obs = np.array(record['obs'], dtype=np.float64)
            rewards = np.array(record['rewards'], dtype=np.float64)
        except (TypeError, ValueError):
            throw(
                error_cls=DataError,
                message="JSON '%s' episode #%d: observations and rewards must be numeric and rectangular" % (path, index),
                code=ERROR_CODES['parse_error']
            )
        if obs.ndim != 2 or not np.all(np.isfinite(obs)) or not np.all(np.isfinite(rewards)):
            throw(
                error_cls=DataError,
                message="JSON '%s' episode #%d: observations must be a finite matrix" % (path, index),
                code=ERROR_CODES['parse_error']
            )
        labels = [_label_of(a) for a in record['actions']]
        parsed.append((str(record.get('id', index)), obs, labels, rewards))

    if declared is None:
        declared = _order_labels([l for _, _, labels, _ in parsed for l in labels])
    codes = {label: i for i, label in enumerate(declared)}

    obs_dim = parsed[0][1].shape[1]
    episodes = []
    for index, (episode_id, obs, labels, rewards) in enumerate(parsed):
        if obs.shape[1] != obs_dim:
            throw(
                error_cls=DataError,
                message="JSON '%s' episode '%s': observation dimension %d differs from %d" % (
                    path, episode_id, obs.shape[1], obs_dim
                ),
                code=ERROR_CODES['dimension_error']
            )
        unknown = [a for a in labels if a not in codes]
        if unknown:
            throw(
                error_cls=DataError,
                message="JSON '%s' episode '%s': action '%s' is not in the action set %s" % (
                    path, episode_id, unknown[0], list(declared)
                ),
                code=ERROR_CODES['parse_error']
            )
        episodes.append(Episode(obs, [codes[a] for a in labels], rewards, episode_id=episode_id))

    if not meta:
        meta = {'source': str(path)}

    return TrajectoryDataset(
        episodes=tuple(episodes),
        action_set=declared,
        obs_dim=obs_dim,
        meta=meta
    )


def save_dataset(ds: TrajectoryDataset, path: str, format: Optional[str] = None) -> pathlib.Path:
    """
    Write a dataset in one of the `load_dataset` formats.
    """

    path = pathlib.Path(path)
    format = _infer_format(path, format)

    if format == 'json':
        payload = {
            'action_set': list(ds.action_set),
            'obs_dim': ds.obs_dim,
            'meta': dict(ds.meta),
            'episodes': [
                {
                    'id': e.episode_id,
                    'obs': e.observations.tolist(),
                    'actions': [ds.action_set[a] for a in e.actions],
                    'rewards': e.rewards.tolist()
                }
                for e in ds.episodes
            ]
        }
        return write_json(payload, path)

    rows = []
    for e in ds.episodes:
        for t in range(e.horizon + 1):
            row = {
                'episode': e.episode_id,
                't': t,
                'a': ds.action_set[e.actions[t]] if t < e.horizon else '',
                'r': repr(float(e.rewards[t])) if t < e.horizon else ''
            }
            for i, value in enumerate(e.observations[t], start=1):
                row['o_%d' % i] = repr(float(value))
            rows.append(row)

    columns = ['episode', 't', 'a', 'r'] + ['o_%d' % i for i in range(1, ds.obs_dim + 1)]
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(rows, columns=columns).to_csv(path, index=False)
    return path
