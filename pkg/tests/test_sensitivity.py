import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_ball
from oracles import SPHERE_RADIUS_N10, TWO_POINT_RBF_SUP_R2, TWO_POINT_RBF_SUP_R2_FAR, naive_sensitivity
from rbfcoreset import (
    InvalidInputError,
    PreconditionError,
    UnsupportedDimensionError,
    WeightedPointSet,
    brute_force_sensitivity,
    laplacian_sensitivity_bounds,
    lower_bound_instance,
    rbf_sensitivity_bounds,
    sensitivity_bounds,
)
from rbfcoreset.sensitivity import ball_grid, fibonacci_sphere, min_pairwise_distance, sphere_radius

MODES = ["lemma", "algorithm1"]


def all_profiles(P, R=1.0):
    out = [rbf_sensitivity_bounds(P, R, m) for m in MODES]
    out.append(laplacian_sensitivity_bounds(P))
    return out


def test_singleton_bounds_dominate_one():
    P = WeightedPointSet.from_points([[0.3, -0.2]], [2.5])
    for prof in all_profiles(P, 2.0):
        assert prof.bounds[0] >= 1.0


def test_identical_pair_bounds_dominate_half():
    P = WeightedPointSet.from_points([[0.1, 0.4], [0.1, 0.4]])
    for prof in all_profiles(P):
        assert np.all(prof.bounds >= 0.5)


def test_two_point_instance_against_oracle():
    P = WeightedPointSet.from_points([[0.0, 0.0], [1.0, 0.0]])
    oracle = brute_force_sensitivity(P, "rbf", 2.0, 401, extra_queries=[[-2.0, 0.0], [3.0, 0.0]])
    assert oracle[0] == pytest.approx(TWO_POINT_RBF_SUP_R2, abs=1e-12)
    for mode in MODES:
        assert np.all(rbf_sensitivity_bounds(P, 2.0, mode).bounds >= oracle)


def test_oracle_examples():
    assert brute_force_sensitivity(WeightedPointSet.from_points([[0.2]]), "rbf", 1.0, 11)[0] == 1.0
    twin = WeightedPointSet.from_points([[0.2], [0.2]])
    np.testing.assert_allclose(brute_force_sensitivity(twin, "laplacian", 3.0, 21), [0.5, 0.5], rtol=1e-15)
    P = WeightedPointSet.from_points([[0.0], [1.0]])
    got = brute_force_sensitivity(P, "rbf", 2.0, 4001)
    # the radius-2 ball is not symmetric about 1/2, so the two sups differ
    assert got[0] == pytest.approx(TWO_POINT_RBF_SUP_R2, abs=1e-12)
    assert got[1] == pytest.approx(TWO_POINT_RBF_SUP_R2_FAR, abs=1e-12)
    mirrored = brute_force_sensitivity(WeightedPointSet.from_points([[-0.5], [0.5]]), "rbf", 2.0, 4001)
    assert abs(mirrored[0] - mirrored[1]) < 1e-9


def test_oracle_matches_naive_loop(rng):
    P = WeightedPointSet(random_ball(rng, 15, 2), rng.uniform(0.2, 3, 15))
    grid = ball_grid(2, 1.5, 31)
    queries = np.vstack([grid, P.points])
    for loss in ("rbf", "laplacian"):
        np.testing.assert_allclose(
            brute_force_sensitivity(P, loss, 1.5, 31, chunk_entries=200),
            naive_sensitivity(P.points, P.weights, queries, loss),
            rtol=1e-12,
        )


def test_oracle_rejects_high_dimension():
    P = WeightedPointSet.from_points(np.zeros((2, 4)))
    with pytest.raises(UnsupportedDimensionError):
        brute_force_sensitivity(P, "rbf", 1.0, 5)
    with pytest.raises(InvalidInputError):
        brute_force_sensitivity(WeightedPointSet.from_points([[0.0]]), "rbf", 1.0, 1)


@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("seed", range(3))
def test_dominance_small_instances(d, seed):
    rng = np.random.default_rng(100 * d + seed)
    n = 12
    P = WeightedPointSet(random_ball(rng, n, d), rng.uniform(0.1, 2.0, n))
    res = {1: 401, 2: 81, 3: 25}[d]
    for R in (1.0, 2.0):
        oracle = brute_force_sensitivity(P, "rbf", R, res)
        for mode in MODES:
            assert np.all(rbf_sensitivity_bounds(P, R, mode).bounds >= oracle * (1 - 1e-9))
    oracle = brute_force_sensitivity(P, "laplacian", 10.0, res)
    assert np.all(laplacian_sensitivity_bounds(P).bounds >= oracle * (1 - 1e-9))


def test_laplacian_twenty_points_dense_grid():
    rng = np.random.default_rng(20)
    P = WeightedPointSet.from_points(random_ball(rng, 20, 2))
    oracle = brute_force_sensitivity(P, "laplacian", 10.0, 401)
    assert np.all(laplacian_sensitivity_bounds(P).bounds >= oracle)


@given(st.integers(0, 2**32 - 1), st.sampled_from([0.1, 10.0]))
def test_default_bounds_invariant_to_weight_scale(seed, lam):
    rng = np.random.default_rng(seed)
    X = random_ball(rng, 25, 3)
    w = rng.uniform(0.1, 3.0, 25)
    a = rbf_sensitivity_bounds(WeightedPointSet(X, w), 1.5).bounds
    b = rbf_sensitivity_bounds(WeightedPointSet(X, lam * w), 1.5).bounds
    np.testing.assert_allclose(a, b, rtol=1e-8)


@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(2, 120))
def test_totals_within_slack_times_closed_form(seed, d, n):
    rng = np.random.default_rng(seed)
    P = WeightedPointSet(random_ball(rng, n, d), rng.uniform(0.0, 2.0, n) + (np.arange(n) == 0))
    for prof in (rbf_sensitivity_bounds(P, 1.0), laplacian_sensitivity_bounds(P)):
        assert prof.total <= prof.conditioner_distortion * prof.total_bound * (1 + 1e-9)
        assert prof.probabilities.sum() == pytest.approx(1.0)


def test_per_point_mode_is_tighter(small_set):
    a = rbf_sensitivity_bounds(small_set, 1.0, "lemma").bounds
    b = rbf_sensitivity_bounds(small_set, 1.0, "algorithm1").bounds
    assert np.all(a <= b)


def test_zero_weight_points_get_zero_bound():
    P = WeightedPointSet.from_points([[0.0, 0.0], [0.5, 0.0], [0.0, 0.5]], [1.0, 0.0, 2.0])
    for prof in all_profiles(P):
        assert prof.bounds[1] == 0.0
        assert np.all(prof.bounds[[0, 2]] > 0)


def test_large_radius_saturates_with_warning():
    P = WeightedPointSet.from_points([[0.5, 0.0], [0.0, 0.5]])
    with pytest.warns(RuntimeWarning):
        prof = rbf_sensitivity_bounds(P, 20.0, "algorithm1")
    assert prof.saturated
    assert np.all(np.isfinite(prof.bounds))


def test_errors():
    outside = WeightedPointSet.from_points([[0.0, 0.0], [2.0, 0.0]])
    with pytest.raises(PreconditionError, match="point 1"):
        rbf_sensitivity_bounds(outside, 1.0)
    with pytest.raises(PreconditionError):
        laplacian_sensitivity_bounds(outside)
    inside = WeightedPointSet.from_points([[0.0, 0.0]])
    with pytest.raises(InvalidInputError):
        rbf_sensitivity_bounds(inside, 0.5)
    with pytest.raises(InvalidInputError):
        sensitivity_bounds(inside, "huber")
    with pytest.raises(InvalidInputError):
        rbf_sensitivity_bounds(inside, 1.0, mode="exact")


@given(st.integers(0, 2**32 - 1), st.sampled_from([1.0, 3.0]))
def test_exponential_l1_sandwich(seed, R):
    rng = np.random.default_rng(seed)
    p = random_ball(rng, 200, 3)
    x = random_ball(rng, 200, 3, R)
    t = np.abs((p * x).sum(1))
    e = np.exp(-t)
    assert np.all((1 + t) / (math.exp(R) * (1 + R)) <= e)
    assert np.all(e <= 1 + t)


@given(
    st.floats(0, 1e6), st.floats(0, 1e6),
    st.floats(1e-6, 1e6), st.floats(1e-6, 1e6),
)
def test_fraction_split_inequality(a, b, c, d):
    assert (a + b) / (c + d) <= (a / c + b / d) * (1 + 1e-12)


def test_sphere_radius_value():
    assert sphere_radius(10) == pytest.approx(SPHERE_RADIUS_N10, rel=1e-12)
    P = lower_bound_instance(10, 3, "paper_formula")
    np.testing.assert_allclose(np.linalg.norm(P.points, axis=1), SPHERE_RADIUS_N10, rtol=1e-12)


@pytest.mark.parametrize("n", [3, 10, 50, 100])
def test_guaranteed_separation(n):
    P = lower_bound_instance(n, 4)
    assert P.d == 4 and np.all(P.points[:, 3] == 0)
    assert min_pairwise_distance(P.points) >= math.sqrt(math.log(n))
    # the oracle only supports d <= 3; the first three coordinates carry all the geometry
    Q = WeightedPointSet(P.points[:, :3], P.weights)
    s = brute_force_sensitivity(Q, "rbf", 0.0 + 1e-9, 2)
    assert np.all(s >= 0.5 - 1e-9)
    assert s.sum() >= n / 2


def test_fibonacci_sphere_unit():
    np.testing.assert_allclose(np.linalg.norm(fibonacci_sphere(37), axis=1), 1.0, rtol=1e-12)


def test_lower_bound_instance_errors():
    with pytest.raises(InvalidInputError):
        lower_bound_instance(2, 3)
    with pytest.raises(InvalidInputError):
        lower_bound_instance(5, 2)
    with pytest.raises(InvalidInputError):
        lower_bound_instance(5, 3, "random")
