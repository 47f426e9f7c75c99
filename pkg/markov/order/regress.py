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
Vector-valued conditional-mean regression used as the nuisance
learner of the Markov test and as the function class of FQI/FQE.

The default learner expands inputs with random cosine features
and solves one ridge system for all target columns at once.
"""

import dataclasses
from dataclasses import dataclass
from typing import (
    Any,
    Dict,
    Mapping,
    Optional,
    Tuple,
    Union
)

import numpy as np
import scipy.linalg
from scipy.spatial.distance import pdist
from sklearn.kernel_approximation import RBFSampler
from sklearn.model_selection import KFold

from .constants import (
    DEFAULT_NUM_FEATURES,
    DEFAULT_RIDGE,
    FALLBACK_BANDWIDTH,
    MEDIAN_SUBSAMPLE,
    RIDGE_FLOOR
)
from .data import TrajectoryDataset
from .errors import (
    ConfigError,
    ERROR_CODES,
    RegressorError,
    throw
)
from .logs import logger
from .utils import (
    as_matrix,
    derive_rng,
    derive_seed,
    is_finite
)

MEDIAN_HEURISTIC = 'median-heuristic'
REGRESSOR_KINDS = ('rff', 'tabular', 'constant')


@dataclass(frozen=True)
class RegressorSpec:
    """
    Hyperparameters of a nuisance learner.

    Parameter:
        `num_features` (int):
            Number of random cosine features D.

        `bandwidth` (float | 'median-heuristic'):
            Kernel bandwidth sigma; the median heuristic uses the
            median pairwise distance of at most 500 inputs.

        `ridge` (float):
            Ridge penalty lambda (the system is scaled by n).

        `seed` (int):
            Seed of the frozen feature map.

        `kind` (str):
            `rff`, `tabular` or `constant`.
    """

    num_features: int = DEFAULT_NUM_FEATURES
    bandwidth: Union[float, str] = MEDIAN_HEURISTIC
    ridge: float = DEFAULT_RIDGE
    seed: int = 0
    kind: str = 'rff'

    def __post_init__(self):
        if self.kind not in REGRESSOR_KINDS:
            throw(
                error_cls=ConfigError,
                message="Regressor: kind must be one of %s, got '%s'" % (list(REGRESSOR_KINDS), self.kind),
                code=ERROR_CODES['invalid_config']
            )
        if int(self.num_features) < 1:
            throw(
                error_cls=ConfigError,
                message="Regressor: num_features must be >= 1, got %s" % (self.num_features,),
                code=ERROR_CODES['invalid_config']
            )
        if not float(self.ridge) >= 0:
            throw(
                error_cls=ConfigError,
                message="Regressor: ridge must be >= 0, got %s" % (self.ridge,),
                code=ERROR_CODES['invalid_config']
            )
        if isinstance(self.bandwidth, str):
            if self.bandwidth != MEDIAN_HEURISTIC:
                throw(
                    error_cls=ConfigError,
                    message="Regressor: bandwidth must be positive or '%s', got '%s'" % (
                        MEDIAN_HEURISTIC, self.bandwidth
                    ),
                    code=ERROR_CODES['invalid_config']
                )
        elif not float(self.bandwidth) > 0:
            throw(
                error_cls=ConfigError,
                message="Regressor: bandwidth must be positive, got %s" % (self.bandwidth,),
                code=ERROR_CODES['invalid_config']
            )
        object.__setattr__(self, 'num_features', int(self.num_features))
        object.__setattr__(self, 'ridge', float(self.ridge))
        object.__setattr__(self, 'seed', int(self.seed))

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, item: Mapping[str, Any]) -> 'RegressorSpec':
        return cls(**dict(item))


@dataclass(frozen=True)
class FoldAssignment:
    """ A partition of episode indices into K non-empty folds. """

    K: int
    folds: Tuple[int, ...]

    def members(self, fold: int) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.folds) == fold)

    def complement(self, fold: int) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.folds) != fold)

    def sizes(self) -> Tuple[int, ...]:
        return tuple(int(np.sum(np.asarray(self.folds) == f)) for f in range(self.K))

    def to_dict(self) -> Dict[str, Any]:
        return {'K': self.K, 'folds': list(self.folds)}


def make_folds(ds: Union[TrajectoryDataset, int], K: int, seed: int) -> FoldAssignment:
    """
    Split episodes (never time points) into K folds whose sizes
    differ by at most one. Deterministic given `seed`.
    """

    n_episodes = ds if isinstance(ds, (int, np.integer)) else ds.n_episodes
    K = int(K)
    if K < 2 or K > n_episodes:
        throw(
            error_cls=ConfigError,
            message="Folds: need 2 <= K <= number of episodes (%d), got K=%d" % (n_episodes, K),
            code=ERROR_CODES['invalid_config']
        )

    splitter = KFold(n_splits=K, shuffle=True, random_state=derive_seed(seed, 'folds') % (2 ** 32))
    folds = np.zeros(n_episodes, dtype=np.int64)
    for fold, (_, members) in enumerate(splitter.split(np.arange(n_episodes))):
        folds[members] = fold

    return FoldAssignment(K=K, folds=tuple(int(f) for f in folds))


class FittedModel:
    """
    Base class of fitted conditional-mean maps. A fitted model
    is immutable and `predict` is a pure function of its inputs.
    """

    input_dim: int
    output_dim: int

    def predict(self, inputs) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> Dict[str, Any]:
        raise NotImplementedError

    def _check_inputs(self, inputs) -> np.ndarray:
        x = np.asarray(inputs, dtype=np.float64)
        if x.size == 0:
            return np.zeros((0, self.input_dim))
        x = as_matrix(x)
        if x.shape[1] != self.input_dim:
            throw(
                error_cls=RegressorError,
                message="Predict: expected %d input columns, got %d" % (self.input_dim, x.shape[1]),
                code=ERROR_CODES['dimension_error']
            )
        return x


class BaseRegressor:
    """
    Base class for nuisance learners. The class should have
    one method `fit` returning a `FittedModel`.
    """

    def fit(self, inputs, targets) -> FittedModel:
        raise NotImplementedError


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=np.float64)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class FittedRegressor(FittedModel):
    """
    A fitted random-feature ridge model:

        phi(x) = sqrt(2 / D) cos(x W + b),  f(x) = phi(x) coef + intercept

    with frozen frequencies `weights` (p x D), phases `offsets`
    and a coefficient matrix shared by every output column.
    """

    weights: np.ndarray
    offsets: np.ndarray
    coef: np.ndarray
    intercept: np.ndarray
    bandwidth: float
    ridge: float

    def __post_init__(self):
        for name in ('weights', 'offsets', 'coef', 'intercept'):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def input_dim(self) -> int:
        return int(self.weights.shape[0])

    @property
    def output_dim(self) -> int:
        return int(self.coef.shape[1])

    @property
    def num_features(self) -> int:
        return int(self.weights.shape[1])

    def features(self, inputs) -> np.ndarray:
        x = self._check_inputs(inputs)
        return np.sqrt(2.0 / self.num_features) * np.cos(x @ self.weights + self.offsets)

    def predict(self, inputs) -> np.ndarray:
        x = self._check_inputs(inputs)
        if x.shape[0] == 0:
            return np.zeros((0, self.output_dim))
        return self.features(x) @ self.coef + self.intercept

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': 'rff',
            'weights': self.weights.tolist(),
            'offsets': self.offsets.tolist(),
            'coef': self.coef.tolist(),
            'intercept': self.intercept.tolist(),
            'bandwidth': self.bandwidth,
            'ridge': self.ridge
        }


@dataclass(frozen=True, eq=False)
class TabularModel(FittedModel):
    """
    Cell means over the distinct input rows seen at fit time.
    Unseen rows predict `default`.
    """

    cells: np.ndarray
    values: np.ndarray
    default: np.ndarray

    def __post_init__(self):
        for name in ('cells', 'values', 'default'):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        object.__setattr__(self, '_index', {
            tuple(row): i for i, row in enumerate(self.cells.tolist())
        })

    @property
    def input_dim(self) -> int:
        return int(self.cells.shape[1])

    @property
    def output_dim(self) -> int:
        return int(self.values.shape[1])

    def predict(self, inputs) -> np.ndarray:
        x = self._check_inputs(inputs)
        out = np.tile(self.default, (x.shape[0], 1))
        for i, row in enumerate(x.tolist()):
            cell = self._index.get(tuple(row))
            if cell is not None:
                out[i] = self.values[cell]
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': 'tabular',
            'cells': self.cells.tolist(),
            'values': self.values.tolist(),
            'default': self.default.tolist()
        }


@dataclass(frozen=True, eq=False)
class ConstantModel(FittedModel):
    """ Predicts the training column means everywhere. """

    mean: np.ndarray
    n_inputs: int

    def __post_init__(self):
        object.__setattr__(self, 'mean', _frozen(self.mean))

    @property
    def input_dim(self) -> int:
        return int(self.n_inputs)

    @property
    def output_dim(self) -> int:
        return int(self.mean.shape[0])

    def predict(self, inputs) -> np.ndarray:
        x = self._check_inputs(inputs)
        return np.tile(self.mean, (x.shape[0], 1))

    def to_dict(self) -> Dict[str, Any]:
        return {'kind': 'constant', 'mean': self.mean.tolist(), 'n_inputs': self.n_inputs}


def model_from_dict(item: Mapping[str, Any]) -> FittedModel:
    kind = item.get('kind')
    if kind == 'rff':
        return FittedRegressor(
            weights=np.array(item['weights'], dtype=np.float64),
            offsets=np.array(item['offsets'], dtype=np.float64),
            coef=np.array(item['coef'], dtype=np.float64),
            intercept=np.array(item['intercept'], dtype=np.float64),
            bandwidth=float(item['bandwidth']),
            ridge=float(item['ridge'])
        )
    if kind == 'tabular':
        return TabularModel(
            cells=np.array(item['cells'], dtype=np.float64),
            values=np.array(item['values'], dtype=np.float64),
            default=np.array(item['default'], dtype=np.float64)
        )
    if kind == 'constant':
        return ConstantModel(mean=np.array(item['mean'], dtype=np.float64), n_inputs=int(item['n_inputs']))

    throw(
        error_cls=RegressorError,
        message="Unknown fitted model kind '%s'" % (kind,),
        code=ERROR_CODES['parse_error']
    )


def _check_training(inputs, targets) -> Tuple[np.ndarray, np.ndarray]:
    x = as_matrix(inputs)
    y = as_matrix(targets, name='targets')
    if x.shape[0] < 1 or x.shape[0] != y.shape[0]:
        throw(
            error_cls=RegressorError,
            message="Fit: need n >= 1 rows and matching inputs/targets, got %d and %d" % (x.shape[0], y.shape[0]),
            code=ERROR_CODES['dimension_error']
        )
    if not is_finite(x) or not is_finite(y):
        throw(
            error_cls=RegressorError,
            message="Fit: inputs and targets must be finite",
            code=ERROR_CODES['non_finite']
        )
    return x, y


def median_bandwidth(inputs: np.ndarray, seed: int) -> float:
    """
    Median pairwise Euclidean distance over at most 500 inputs,
    falling back to 1.0 when the median is zero.
    """

    n = inputs.shape[0]
    if n > MEDIAN_SUBSAMPLE:
        rng = derive_rng(seed, 'bandwidth')
        inputs = inputs[np.sort(rng.choice(n, size=MEDIAN_SUBSAMPLE, replace=False))]
    if inputs.shape[0] < 2:
        return FALLBACK_BANDWIDTH
    median = float(np.median(pdist(inputs)))
    return median if median > 0 else FALLBACK_BANDWIDTH


def _ridge_solve(phi: np.ndarray, y: np.ndarray, ridge: float) -> Tuple[np.ndarray, float]:
    """
    Solve (phi' phi + n lambda I) beta = phi' y with a Cholesky
    factorization; the dual system is used when n < D.
    """

    n, D = phi.shape

    def solve(penalty: float) -> np.ndarray:
        if n >= D:
            gram = phi.T @ phi
            gram[np.diag_indices_from(gram)] += n * penalty
            factor = scipy.linalg.cho_factor(gram, lower=True, check_finite=False)
            return scipy.linalg.cho_solve(factor, phi.T @ y, check_finite=False)

        gram = phi @ phi.T
        gram[np.diag_indices_from(gram)] += n * penalty
        factor = scipy.linalg.cho_factor(gram, lower=True, check_finite=False)
        return phi.T @ scipy.linalg.cho_solve(factor, y, check_finite=False)

    for penalty in (ridge, max(ridge, RIDGE_FLOOR)):
        try:
            beta = solve(penalty)
        except scipy.linalg.LinAlgError:
            logger.debug('Ridge system singular at lambda=%g, retrying with floor' % penalty)
            continue
        if is_finite(beta):
            return beta, penalty

    beta = scipy.linalg.lstsq(phi, y)[0]
    return beta, 0.0


def random_feature_map(inputs: np.ndarray, spec: RegressorSpec) -> Tuple[RBFSampler, float]:
    """
    The fitted `RBFSampler` of `spec` (gamma = 1 / (2 sigma^2)) and
    the bandwidth sigma it was built with. Its `transform` is
    sqrt(2 / D) cos(x W + b).
    """

    if spec.bandwidth == MEDIAN_HEURISTIC:
        bandwidth = median_bandwidth(inputs, spec.seed)
    else:
        bandwidth = float(spec.bandwidth)

    sampler = RBFSampler(
        gamma=1.0 / (2.0 * bandwidth ** 2),
        n_components=spec.num_features,
        random_state=derive_seed(spec.seed, 'features') % (2 ** 32)
    ).fit(inputs[:1])
    return sampler, bandwidth


class RandomFeatureRidge(BaseRegressor):
    """
    Random cosine features followed by ridge regression with an
    unpenalized intercept. All target columns share the feature
    map and one factorization.

    Example:
        >>> model = RandomFeatureRidge(RegressorSpec(seed=3)).fit(x, y)
        >>> model.predict(x_new)
    """

    def __init__(self, spec: Optional[RegressorSpec] = None):
        self.spec = spec or RegressorSpec()

    def fit(self, inputs, targets) -> FittedRegressor:
        x, y = _check_training(inputs, targets)
        spec = self.spec

        sampler, bandwidth = random_feature_map(x, spec)

        weights = np.asarray(sampler.random_weights_, dtype=np.float64)
        offsets = np.asarray(sampler.random_offset_, dtype=np.float64)
        phi = np.sqrt(2.0 / spec.num_features) * np.cos(x @ weights + offsets)

        phi_mean = phi.mean(axis=0)
        y_mean = y.mean(axis=0)
        coef, penalty = _ridge_solve(phi - phi_mean, y - y_mean, spec.ridge)

        return FittedRegressor(
            weights=weights,
            offsets=offsets,
            coef=coef,
            intercept=y_mean - phi_mean @ coef,
            bandwidth=bandwidth,
            ridge=penalty
        )


class TabularRegressor(BaseRegressor):

    def __init__(self, spec: Optional[RegressorSpec] = None):
        self.spec = spec

    def fit(self, inputs, targets) -> TabularModel:
        x, y = _check_training(inputs, targets)
        cells, inverse = np.unique(x, axis=0, return_inverse=True)
        inverse = np.asarray(inverse).reshape(-1)
        sums = np.zeros((cells.shape[0], y.shape[1]))
        np.add.at(sums, inverse, y)
        counts = np.bincount(inverse, minlength=cells.shape[0]).astype(np.float64)
        return TabularModel(
            cells=cells,
            values=sums / counts[:, None],
            default=np.zeros(y.shape[1])
        )


class ConstantRegressor(BaseRegressor):

    def __init__(self, spec: Optional[RegressorSpec] = None):
        self.spec = spec

    def fit(self, inputs, targets) -> ConstantModel:
        x, y = _check_training(inputs, targets)
        return ConstantModel(mean=y.mean(axis=0), n_inputs=x.shape[1])


REGRESSORS = {
    'rff': RandomFeatureRidge,
    'tabular': TabularRegressor,
    'constant': ConstantRegressor
}


def make_regressor(spec: Optional[RegressorSpec] = None) -> BaseRegressor:
    spec = spec or RegressorSpec()
    return REGRESSORS[spec.kind](spec)


def fit(spec: RegressorSpec, inputs, targets) -> FittedModel:
    """
    Fit the learner selected by `spec.kind` to an n x p input
    matrix and an n x m target matrix.
    """

    return make_regressor(spec).fit(inputs, targets)


def predict(model: FittedModel, inputs) -> np.ndarray:
    return model.predict(inputs)
