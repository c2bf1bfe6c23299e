import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gppc.errors import InvalidProbability, NoPlaneFound, TooFewPoints
from gppc.geometry import PlaneModel, distance_to_plane
from gppc.ransac import (
    PointCloud,
    RansacConfig,
    estimate_ground_plane,
    partition_by_plane,
    required_iterations,
)


def lstsq_plane(points):
    """Total-least-squares plane: centroid plus smallest singular vector."""
    c = points.mean(axis=0)
    _, _, vt = np.linalg.svd(points - c)
    return PlaneModel(vt[-1], c)


def floor_with_clutter(seed, n_floor=800, n_clutter=200, sigma=0.002):
    rng = np.random.default_rng(seed)
    floor = np.column_stack([rng.uniform(-1, 1, (n_floor, 2)), rng.normal(0, sigma, n_floor)])
    clutter = np.column_stack([rng.uniform(-1, 1, (n_clutter, 2)), rng.uniform(0.5, 2.0, n_clutter)])
    return PointCloud(np.vstack([floor, clutter])), floor


def angle_between(n1, n2):
    return math.degrees(math.acos(min(1.0, abs(float(n1 @ n2)))))


@pytest.mark.parametrize("p,u,expected", [(0.99, 0.5, 35), (0.99, 1.0, 1), (0.99, 0.9, 4)])
def test_required_iterations(p, u, expected):
    assert required_iterations(p, u, 3) == expected


def test_required_iterations_matches_direct_formula():
    for p in (0.9, 0.95, 0.99, 0.999):
        for u in (0.2, 0.35, 0.5, 0.75):
            n = required_iterations(p, u, 3)
            # smallest N with 1 - (1 - u^3)^N >= p
            assert 1 - (1 - u**3) ** n >= p - 1e-12
            assert 1 - (1 - u**3) ** (n - 1) < p


@pytest.mark.parametrize("p,u", [(0.0, 0.5), (1.0, 0.5), (0.99, 0.0), (0.99, 1.1), (-1, 0.5)])
def test_required_iterations_rejects_bad_probabilities(p, u):
    with pytest.raises(InvalidProbability):
        required_iterations(p, u, 3)


def test_config_validation():
    with pytest.raises(InvalidProbability):
        RansacConfig(confidence=1.0)
    with pytest.raises(ValueError):
        RansacConfig(inlier_threshold=0)
    with pytest.raises(ValueError):
        RansacConfig(max_iterations=0)
    with pytest.raises(ValueError):
        RansacConfig(early_stop_inlier_fraction=0)


def test_exact_floor():
    rng = np.random.default_rng(1)
    pts = np.column_stack([rng.uniform(-2, 2, (1000, 2)), np.zeros(1000)])
    fit = estimate_ground_plane(PointCloud(pts), RansacConfig(inlier_threshold=0.01))
    np.testing.assert_allclose(fit.plane.normal, [0, 0, 1], atol=1e-9)
    assert len(fit.inlier_indices) == 1000
    assert distance_to_plane(pts, fit.plane).max() <= 1e-9
    # a clean floor satisfies the early-stop fraction on the first draw
    assert fit.iterations_run == 1


def test_floor_with_clutter_against_lstsq_oracle():
    cloud, floor = floor_with_clutter(3)
    ref = lstsq_plane(floor)
    fit = estimate_ground_plane(cloud, RansacConfig(inlier_threshold=0.01, seed=11))
    assert angle_between(fit.plane.normal, ref.normal) <= 1.0
    assert angle_between(fit.plane.normal, np.array([0, 0, 1.0])) <= 1.0
    assert 790 <= len(fit.inlier_indices) <= 810


def test_too_few_points():
    with pytest.raises(TooFewPoints):
        estimate_ground_plane(PointCloud([[0, 0, 0], [1, 0, 0]]))


def test_all_collinear_points_find_no_plane():
    pts = np.column_stack([np.arange(10.0), np.arange(10.0), np.zeros(10)])
    with pytest.raises(NoPlaneFound):
        estimate_ground_plane(PointCloud(pts), RansacConfig(max_iterations=20))


def test_point_cloud_rejects_nan():
    with pytest.raises(ValueError):
        PointCloud([[0, 0, np.nan]])


def test_iteration_budget_follows_eq2_and_cap():
    cloud, _ = floor_with_clutter(5)
    # 80% inliers never reach the 0.9 early stop
    fit = estimate_ground_plane(cloud, RansacConfig(seed=1))
    assert fit.iterations_run == 35
    fit = estimate_ground_plane(cloud, RansacConfig(seed=1, max_iterations=7))
    assert fit.iterations_run == 7
    fit = estimate_ground_plane(cloud, RansacConfig(seed=1, assumed_inlier_ratio=0.9))
    assert fit.iterations_run == 4


def test_best_candidate_is_first_argmax():
    cloud, _ = floor_with_clutter(9)
    cfg = RansacConfig(seed=4, inlier_threshold=0.02)
    fit = estimate_ground_plane(cloud, cfg, keep_candidates=True)
    counts = [c for _, c in fit.candidates]
    first_best = counts.index(max(counts))
    winner = fit.candidates[first_best][0]
    np.testing.assert_array_equal(winner.normal, fit.plane.normal)
    np.testing.assert_array_equal(winner.anchor, fit.plane.anchor)


def test_deterministic_for_seed():
    cloud, _ = floor_with_clutter(2)
    a = estimate_ground_plane(cloud, RansacConfig(seed=99))
    b = estimate_ground_plane(cloud, RansacConfig(seed=99))
    assert a.plane.normal.tobytes() == b.plane.normal.tobytes()
    assert a.plane.anchor.tobytes() == b.plane.anchor.tobytes()
    np.testing.assert_array_equal(a.inlier_indices, b.inlier_indices)
    assert a.iterations_run == b.iterations_run


@pytest.mark.parametrize("seed", range(5))
def test_fit_is_sound(seed):
    cloud, _ = floor_with_clutter(seed)
    cfg = RansacConfig(seed=seed)
    fit = estimate_ground_plane(cloud, cfg)
    d = distance_to_plane(cloud.points, fit.plane)
    assert np.all(d[fit.inlier_indices] < cfg.inlier_threshold)
    assert np.all(d[fit.outlier_indices] >= cfg.inlier_threshold)
    both = np.concatenate([fit.inlier_indices, fit.outlier_indices])
    np.testing.assert_array_equal(np.sort(both), np.arange(len(cloud)))
    assert np.all(np.diff(fit.inlier_indices) > 0) and np.all(np.diff(fit.outlier_indices) > 0)


def test_partition_examples():
    z0 = PlaneModel([0, 0, 1], [0, 0, 0])
    inl, out = partition_by_plane(PointCloud([[0, 0, 0], [0, 0, 0.5]]), z0, 0.01)
    assert inl.tolist() == [0] and out.tolist() == [1]
    # distance exactly t is an outlier (strict "<")
    inl, out = partition_by_plane(PointCloud([[0, 0, 0.25]]), z0, 0.25)
    assert inl.tolist() == [] and out.tolist() == [0]


def test_partition_of_generated_cloud():
    cloud, floor = floor_with_clutter(8)
    z0 = PlaneModel([0, 0, 1], [0, 0, 0])
    inl, _ = partition_by_plane(cloud, z0, 0.01)
    # the generator's own record: floor points with |noise| < t
    expected = int(np.count_nonzero(np.abs(floor[:, 2]) < 0.01))
    assert len(inl) == expected
    assert abs(len(inl) - 800) <= 10


@given(st.floats(0.001, 1.0), st.floats(0.001, 1.0), st.integers(0, 2**32 - 1))
def test_partition_is_monotone_in_threshold(t1, t2, seed):
    t1, t2 = sorted((t1, t2))
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1, 1, (200, 3))
    plane = PlaneModel(rng.normal(size=3) + 1e-3, rng.uniform(-1, 1, 3))
    small, _ = partition_by_plane(pts, plane, t1)
    large, _ = partition_by_plane(pts, plane, t2)
    assert set(small.tolist()) <= set(large.tolist())
