import numpy as np
import pytest

from markov.order.errors import ConfigError, ERROR_CODES, RegressorError
from markov.order.regress import (
    ConstantRegressor,
    RandomFeatureRidge,
    RegressorSpec,
    TabularRegressor,
    fit,
    make_folds,
    median_bandwidth,
    model_from_dict,
    predict
)


@pytest.fixture
def sample():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(80, 2))
    y = np.column_stack([np.sin(x[:, 0]), x[:, 1] ** 2, np.ones(80)])
    return x, y


class TestRandomFeatureRidge:

    def test_huge_penalty_predicts_column_means(self, sample):
        x, y = sample
        model = fit(RegressorSpec(ridge=1e12, seed=1), x, y)
        np.testing.assert_allclose(model.predict(x), np.tile(y.mean(axis=0), (80, 1)), atol=1e-6)

    def test_single_point_is_reproduced(self):
        model = fit(RegressorSpec(ridge=0.0, bandwidth=1.0), [[0.3, -0.2]], [[2.0, -1.0]])
        np.testing.assert_allclose(model.predict([[0.3, -0.2]]), [[2.0, -1.0]], atol=1e-8)

    def test_small_sample_is_interpolated_with_tiny_penalty(self):
        x = np.linspace(-2, 2, 5)[:, None]
        y = np.cos(x) + x
        model = fit(RegressorSpec(ridge=1e-9, bandwidth=1.0, num_features=300, seed=4), x, y)
        np.testing.assert_allclose(model.predict(x), y, atol=1e-4)

    def test_fit_is_deterministic(self, sample):
        x, y = sample
        spec = RegressorSpec(seed=9)
        first = fit(spec, x, y).predict(x)
        second = fit(spec, x, y).predict(x)
        np.testing.assert_array_equal(first, second)

    def test_seed_changes_features(self, sample):
        x, y = sample
        a = fit(RegressorSpec(seed=1), x, y)
        b = fit(RegressorSpec(seed=2), x, y)
        assert not np.array_equal(a.weights, b.weights)

    def test_reasonable_fit(self, sample):
        x, y = sample
        model = fit(RegressorSpec(seed=3, ridge=1e-4), x, y)
        residual = model.predict(x)[:, 0] - y[:, 0]
        assert np.mean(residual ** 2) < 0.1 * np.var(y[:, 0])

    def test_median_heuristic_is_recorded(self, sample):
        x, y = sample
        model = RandomFeatureRidge(RegressorSpec()).fit(x, y)
        assert model.bandwidth == pytest.approx(median_bandwidth(x, 0))

    def test_model_reloads_from_dict(self, sample):
        x, y = sample
        model = fit(RegressorSpec(seed=5), x, y)
        clone = model_from_dict(model.to_dict())
        np.testing.assert_array_equal(predict(clone, x), predict(model, x))

    def test_empty_predict(self, sample):
        x, y = sample
        model = fit(RegressorSpec(), x, y)
        assert model.predict(np.zeros((0, 2))).shape == (0, 3)


class TestRidgeProperties:

    def test_joint_fit_equals_columnwise_fits(self, sample):
        x, y = sample
        spec = RegressorSpec(seed=6, ridge=1e-3)
        joint = fit(spec, x, y)
        for j in range(y.shape[1]):
            single = fit(spec, x, y[:, [j]])
            np.testing.assert_allclose(joint.coef[:, j], single.coef[:, 0], rtol=0, atol=1e-10)
            np.testing.assert_allclose(joint.predict(x)[:, j], single.predict(x)[:, 0], rtol=0, atol=1e-10)

    def test_row_order_does_not_matter(self, sample):
        x, y = sample
        spec = RegressorSpec(seed=7)
        permutation = np.random.default_rng(1).permutation(len(x))
        model = fit(spec, x, y)
        shuffled = fit(spec, x[permutation], y[permutation])
        np.testing.assert_array_equal(model.predict(x[permutation]), model.predict(x)[permutation])
        np.testing.assert_allclose(shuffled.predict(x), model.predict(x), rtol=1e-8, atol=1e-10)

    def test_noiseless_feature_target_is_recovered(self):
        x = np.random.default_rng(2).normal(size=(400, 2))
        spec = RegressorSpec(num_features=50, bandwidth=1.0, ridge=1e-10, seed=8)
        phi = fit(spec, x, np.zeros((400, 1))).features(x)
        beta = np.random.default_rng(3).normal(size=(50, 2))
        y = phi @ beta + np.array([0.7, -1.3])
        np.testing.assert_allclose(fit(spec, x, y).predict(x), y, atol=1e-4)

    def test_error_shrinks_with_sample_size(self):
        rng = np.random.default_rng(4)
        x_test = rng.normal(size=(2000, 2))
        errors = []
        for n in (250, 1000, 4000):
            x = rng.normal(size=(n, 2))
            y = np.sin(x[:, :1]) + 0.5 * rng.normal(size=(n, 1))
            model = fit(RegressorSpec(seed=9), x, y)
            errors.append(float(np.mean((model.predict(x_test) - np.sin(x_test[:, :1])) ** 2)))
        assert errors[0] >= errors[1] >= errors[2]


class TestErrors:

    def test_wrong_input_width(self, sample):
        x, y = sample
        model = fit(RegressorSpec(), x, y)
        with pytest.raises(RegressorError) as error:
            model.predict(np.zeros((3, 5)))
        assert error.value.code == ERROR_CODES['dimension_error']

    def test_row_mismatch(self, sample):
        x, y = sample
        with pytest.raises(RegressorError):
            fit(RegressorSpec(), x, y[:10])

    def test_non_finite(self, sample):
        x, y = sample
        y = y.copy()
        y[3, 1] = np.nan
        with pytest.raises(RegressorError) as error:
            fit(RegressorSpec(), x, y)
        assert error.value.code == ERROR_CODES['non_finite']

    @pytest.mark.parametrize('kwargs', [
        {'kind': 'forest'},
        {'bandwidth': 'silverman'},
        {'bandwidth': -1.0},
        {'ridge': -0.5},
        {'num_features': 0}
    ])
    def test_bad_spec(self, kwargs):
        with pytest.raises(ConfigError):
            RegressorSpec(**kwargs)


class TestOtherLearners:

    def test_tabular_cell_means(self):
        x = [[0.0], [0.0], [1.0]]
        y = [[1.0], [3.0], [5.0]]
        model = TabularRegressor().fit(x, y)
        np.testing.assert_array_equal(model.predict([[0.0], [1.0], [2.0]]), [[2.0], [5.0], [0.0]])

    def test_constant(self):
        model = ConstantRegressor().fit(np.zeros((4, 3)), [[1.0], [2.0], [3.0], [4.0]])
        np.testing.assert_array_equal(model.predict(np.ones((2, 3))), [[2.5], [2.5]])


class TestMedianBandwidth:

    def test_median(self):
        assert median_bandwidth(np.array([[0.0], [1.0], [2.0]]), 0) == 1.0

    def test_degenerate_falls_back(self):
        assert median_bandwidth(np.ones((4, 2)), 0) == 1.0
        assert median_bandwidth(np.ones((1, 2)), 0) == 1.0


class TestFolds:

    def test_balanced_partition(self):
        folds = make_folds(10, 3, seed=0)
        assert sorted(folds.sizes()) == [3, 3, 4]
        members = np.concatenate([folds.members(k) for k in range(3)])
        assert sorted(members.tolist()) == list(range(10))

    def test_complement(self):
        folds = make_folds(7, 2, seed=1)
        assert set(folds.members(0)) | set(folds.complement(0)) == set(range(7))
        assert not set(folds.members(0)) & set(folds.complement(0))

    def test_deterministic(self):
        assert make_folds(20, 4, seed=3) == make_folds(20, 4, seed=3)

    def test_dataset_input(self, tiny_dataset):
        assert make_folds(tiny_dataset, 2, seed=0).sizes() == (1, 1)

    @pytest.mark.parametrize('K', [1, 11])
    def test_infeasible(self, K):
        with pytest.raises(ConfigError):
            make_folds(10, K, seed=0)
