import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_ball
from oracles import ONE_PLUS_INV_E, TARGET_AT_0, TARGET_AT_1
from rbfcoreset import (
    FuncApproxConfig,
    InvalidInputError,
    RBFNNModel,
    WeightedPointSet,
    fit_output_weights,
    function_approx_experiment,
    rbfnn_eval,
    training_objective,
)
from rbfcoreset.rbfnn import direct_objective, kmeans_pp_centers, surface_dump, target_function, uniform_disk


def test_eval_examples():
    assert rbfnn_eval(RBFNNModel([[0.4, -1.0]], [1.0]), [0.4, -1.0]) == 1.0
    zero = RBFNNModel(np.eye(3), np.zeros(3))
    assert rbfnn_eval(zero, [5.0, 1.0, -2.0]) == 0.0
    two = RBFNNModel([[0.0], [1.0]], [1.0, 1.0])
    assert rbfnn_eval(two, [0.0]) == pytest.approx(ONE_PLUS_INV_E, rel=1e-15)


@given(st.integers(0, 2**32 - 1))
def test_translation_consistency(seed):
    rng = np.random.default_rng(seed)
    C = rng.standard_normal((5, 3))
    a = rng.standard_normal(5)
    x = rng.standard_normal(3)
    shift = rng.uniform(-10, 10, 3)
    base = rbfnn_eval(RBFNNModel(C, a), x)
    moved = rbfnn_eval(RBFNNModel(C + shift, a), x + shift)
    assert moved == pytest.approx(base, rel=1e-12, abs=1e-12)


def test_model_validation():
    with pytest.raises(InvalidInputError):
        RBFNNModel(np.zeros((2, 2)), [1.0])
    with pytest.raises(InvalidInputError):
        RBFNNModel(np.zeros((1, 2)), [np.inf])
    with pytest.raises(InvalidInputError):
        rbfnn_eval(RBFNNModel(np.zeros((1, 2)), [1.0]), [0.0])


def test_fit_exact_interpolation():
    rng = np.random.default_rng(0)
    X = random_ball(rng, 30, 2)
    c = np.array([[0.2, 0.1]])
    y = 2.0 * np.exp(-((X - c) ** 2).sum(1))
    model = fit_output_weights(WeightedPointSet(X, np.ones(30), y), c, ridge=0.0)
    assert model.alphas[0] == pytest.approx(2.0, abs=1e-8)
    zero = fit_output_weights(WeightedPointSet(X, np.ones(30), np.zeros(30)), random_ball(rng, 4, 2))
    np.testing.assert_allclose(zero.alphas, 0.0, atol=1e-12)


def test_fit_singular_falls_back_to_min_norm():
    X = np.array([[0.0, 0.0], [0.5, 0.0]])
    C = np.array([[0.1, 0.1], [0.1, 0.1]])
    model = fit_output_weights(WeightedPointSet(X, np.ones(2), [1.0, 0.5]), C, ridge=0.0)
    assert model.min_norm_fallback
    assert model.alphas[0] == pytest.approx(model.alphas[1])


def test_fit_errors():
    P = WeightedPointSet.from_points(np.zeros((3, 2)))
    with pytest.raises(InvalidInputError):
        fit_output_weights(P, np.zeros((1, 2)))
    Q = WeightedPointSet.from_points(np.zeros((3, 2)), labels=np.ones(3))
    with pytest.raises(InvalidInputError):
        fit_output_weights(Q, np.zeros((1, 3)))
    with pytest.raises(InvalidInputError):
        fit_output_weights(Q, np.zeros((1, 2)), ridge=-1.0)


def random_instance(rng, n=40, d=2, L=5):
    X = random_ball(rng, n, d, 1.5)
    data = WeightedPointSet(X, rng.uniform(0.1, 3, n), rng.standard_normal(n))
    return data, RBFNNModel(random_ball(rng, L, d, 1.5), rng.standard_normal(L))


@given(st.integers(0, 2**32 - 1))
def test_expanded_objective_matches_direct(seed):
    data, model = random_instance(np.random.default_rng(seed))
    total, A, beta = training_objective(data, model)
    assert total == pytest.approx(direct_objective(data, model), rel=1e-9, abs=1e-12)
    assert A.shape == (model.L,) and beta >= 0


def test_objective_examples(rng):
    data, model = random_instance(rng)
    zero = RBFNNModel(model.centers, np.zeros(model.L))
    total, _, beta = training_objective(data, zero)
    assert beta == 0.0
    assert total == pytest.approx(float(data.weights @ data.labels**2))
    silent = WeightedPointSet(data.points, data.weights, np.zeros(data.n))
    total, _, beta = training_objective(silent, model)
    assert total == pytest.approx(beta) and beta >= 0


@given(st.integers(0, 2**32 - 1))
def test_fit_is_first_order_optimal(seed):
    rng = np.random.default_rng(seed)
    data, model = random_instance(rng, L=4)
    ridge = 1e-3
    fit = fit_output_weights(data, model.centers, ridge)

    def objective(a):
        return direct_objective(data, RBFNNModel(fit.centers, a)) + ridge * a @ a

    best = objective(fit.alphas)
    for i in range(fit.L):
        for step in (1e-3, -1e-3):
            a = fit.alphas.copy()
            a[i] += step
            assert objective(a) >= best - 1e-12 * max(1.0, best)


def test_target_function_values():
    assert target_function([[0.0, 0.0]])[0] == pytest.approx(TARGET_AT_0)
    assert target_function([[0.6, 0.8]])[0] == pytest.approx(TARGET_AT_1, rel=1e-14)


def test_kmeans_centers_deterministic():
    X = random_ball(np.random.default_rng(3), 200, 2)
    np.testing.assert_array_equal(kmeans_pp_centers(X, 6, 1), kmeans_pp_centers(X, 6, 1))
    with pytest.raises(InvalidInputError):
        kmeans_pp_centers(X, 0, 1)


def test_full_subset_arms_match_full():
    rep = function_approx_experiment(n_points=300, subset_size=300, seeds=(0, 1), center_count=10, test_size=200)
    for arm in ("uniform", "coreset"):
        np.testing.assert_allclose(rep.rmse[arm], rep.rmse["full"], rtol=1e-9)


def test_small_experiment_runs():
    cfg = FuncApproxConfig(n_points=1000, subset_size=100, seeds=(0, 1, 2), center_count=15, test_size=300)
    rep = function_approx_experiment(cfg)
    assert set(rep.medians()) == {"full", "uniform", "coreset"}
    assert all(len(v) == 3 for v in rep.rmse.values())
    # better than the best constant predictor
    y = target_function(uniform_disk(4000, cfg.disk_radius, np.random.default_rng(9)))
    assert rep.medians()["full"] < y.std()
    with pytest.raises(InvalidInputError):
        function_approx_experiment(n_points=10, subset_size=20, center_count=2)


def test_surface_dump_format():
    text = surface_dump(RBFNNModel([[0.0, 0.0]], [1.0]), 1.0, resolution=5)
    blocks = [b for b in text.strip().split("\n\n")]
    assert len(blocks) == 5
    assert all(len(b.splitlines()) == 5 for b in blocks)
    assert "NaN" in text and "0 0 1" in text
