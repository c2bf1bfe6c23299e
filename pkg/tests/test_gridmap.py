import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gppc.errors import EmptyInput, InvalidBounds
from gppc.geometry import PlaneModel, plane_basis
from gppc.gridmap import GridMap, occupancy_fraction, project_cloud, rasterize
from gppc.ransac import PointCloud


def brute_force_cells(points, grid):
    """Cell-by-cell interval test: a cell is 1 iff some point lies in its half-open square."""
    out = np.zeros((grid.height, grid.width), dtype=np.uint8)
    su = (points[:, 0] - grid.origin[0]) / grid.cell_size
    sv = (points[:, 1] - grid.origin[1]) / grid.cell_size
    for row in range(grid.height):
        for col in range(grid.width):
            hit = (su >= col) & (su < col + 1) & (sv >= row) & (sv < row + 1)
            out[row, col] = hit.any()
    return out


def test_project_cloud_examples(floor_plane):
    basis = plane_basis(floor_plane)
    cloud = PointCloud([[1, 2, 3]])
    np.testing.assert_array_equal(project_cloud(cloud, [0], floor_plane, basis), [[1, 2]])
    assert project_cloud(cloud, [], floor_plane, basis).shape == (0, 2)
    cloud = PointCloud([[9, 9, 9], [0, 0, 1], [2, 0, 5]])
    np.testing.assert_array_equal(project_cloud(cloud, [1, 2], floor_plane, basis), [[0, 0], [2, 0]])


def test_single_point():
    g = rasterize([(0.02, 0.03)], 0.1)
    assert g.cells.sum() == 1
    r, c = np.argwhere(g.cells)[0]
    assert (r, c) == (1, 1)
    assert g.origin == pytest.approx((0.02 - 0.1, 0.03 - 0.1))


def test_two_points_with_gap():
    g = rasterize([(0.0, 0.0), (0.25, 0.0)], 0.1)
    assert g.origin == pytest.approx((-0.1, -0.1))
    assert g.cells[1].tolist()[:5] == [0, 1, 0, 1, 0]
    assert g.cells.sum() == 2


def test_empty_without_bounds():
    with pytest.raises(EmptyInput):
        rasterize([], 0.1)


def test_empty_with_bounds_is_blank():
    g = rasterize([], 0.5, bounds=(0, 0, 2, 1))
    assert g.cells.shape == (2, 4) and not g.cells.any()


@pytest.mark.parametrize("bounds", [(0, 0, 0, 1), (0, 0, 1, -1), (0, 0, np.inf, 1)])
def test_invalid_bounds(bounds):
    with pytest.raises(InvalidBounds):
        rasterize([(0.5, 0.5)], 0.1, bounds=bounds)


def test_points_outside_bounds_are_ignored():
    g = rasterize([(0.5, 0.5), (5, 5), (-1, 0.5), (1.0, 0.5)], 0.25, bounds=(0, 0, 1, 1))
    assert g.cells.sum() == 1 and g.cells[2, 2] == 1


def test_occupancy_fraction():
    g = GridMap(0.1, (0, 0), np.zeros((10, 10)))
    assert occupancy_fraction(g) == 0.0
    cells = np.zeros((10, 10))
    cells[3, 4] = 1
    assert occupancy_fraction(GridMap(0.1, (0, 0), cells)) == 0.01
    cells = np.zeros((100, 100))
    cells[10:30, 40:90] = 1
    assert occupancy_fraction(GridMap(0.1, (0, 0), cells)) == pytest.approx(0.10)


def test_grid_rejects_non_binary():
    with pytest.raises(ValueError):
        GridMap(0.1, (0, 0), [[0, 2]])


point_sets = st.lists(
    st.tuples(st.floats(-3, 3, allow_nan=False), st.floats(-3, 3, allow_nan=False)), min_size=1, max_size=40
)


@given(point_sets, st.sampled_from([0.05, 0.1, 0.3, 1.0]))
def test_matches_brute_force(points, cs):
    pts = np.asarray(points)
    g = rasterize(pts, cs)
    np.testing.assert_array_equal(g.cells, brute_force_cells(pts, g))


@given(point_sets, st.sampled_from([0.05, 0.25, 0.7]))
def test_default_bounds_keep_every_point_with_margin(points, cs):
    pts = np.asarray(points)
    g = rasterize(pts, cs)
    cols = np.floor((pts[:, 0] - g.origin[0]) / cs).astype(int)
    rows = np.floor((pts[:, 1] - g.origin[1]) / cs).astype(int)
    assert cols.min() >= 0 and rows.min() >= 0
    assert cols.max() < g.width - 1 and rows.max() < g.height - 1
    assert not g.cells[0].any() and not g.cells[:, 0].any()
    assert not g.cells[-1].any() and not g.cells[:, -1].any()


@given(point_sets, point_sets)
def test_adding_points_never_clears_cells(a, b):
    bounds = (-3.5, -3.5, 3.5, 3.5)
    g1 = rasterize(np.asarray(a), 0.2, bounds=bounds)
    g2 = rasterize(np.asarray(a + b), 0.2, bounds=bounds)
    assert np.all(g2.cells >= g1.cells)


@given(st.lists(st.tuples(st.integers(0, 39), st.integers(0, 39), st.floats(0.1, 0.9), st.floats(0.1, 0.9)),
                min_size=1, max_size=30),
       st.integers(-5, 5))
def test_translation_by_whole_cells_shifts_columns(cells, k):
    cs = 0.25
    pts = np.array([((i + fu) * cs, (j + fv) * cs) for i, j, fu, fv in cells])
    bounds = (-2.0, -2.0, 12.0, 12.0)
    g = rasterize(pts, cs, bounds=bounds)
    moved = rasterize(pts + [k * cs, 0.0], cs, bounds=bounds)
    np.testing.assert_array_equal(np.roll(g.cells, k, axis=1), moved.cells)
