"""Binary occupancy raster over the ground plane's 2D frame.

Cells are stored as a ``(height, width)`` uint8 array: row index follows the
plane ``v`` axis, column index follows ``u``. Cell ``(row, col)`` covers
``[origin_u + col*cell, origin_u + (col+1)*cell) x [origin_v + row*cell, ...)``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, InvalidBounds
from .geometry import from_plane_coords, plane_basis, project_to_plane, to_plane_coords

DEFAULT_CELL_SIZE = 0.05


@dataclass
class GridMap:
    cell_size: float
    origin: tuple
    cells: np.ndarray
    plane: object = None
    basis: object = None

    def __post_init__(self):
        if not self.cell_size > 0:
            raise ValueError("cell_size must be positive")
        cells = np.asarray(self.cells)
        if cells.ndim != 2 or cells.shape[0] < 1 or cells.shape[1] < 1:
            raise ValueError(f"cells must be a non-empty 2D array, got shape {cells.shape}")
        if not np.isin(cells, (0, 1)).all():
            raise ValueError("cells must be binary")
        self.cells = cells.astype(np.uint8)
        self.origin = (float(self.origin[0]), float(self.origin[1]))

    @property
    def width(self):
        return self.cells.shape[1]

    @property
    def height(self):
        return self.cells.shape[0]

    def cell_center(self, row, col):
        """Plane-frame (u, v) of a cell centre; accepts fractional indices."""
        return (
            self.origin[0] + (np.asarray(col) + 0.5) * self.cell_size,
            self.origin[1] + (np.asarray(row) + 0.5) * self.cell_size,
        )

    def to_world(self, uv):
        if self.plane is None:
            raise ValueError("grid has no plane attached")
        return from_plane_coords(uv, self.plane, self.basis)


def project_cloud(cloud, outlier_indices, plane, basis=None):
    """Drop the selected points onto ``plane`` and express them in its 2D frame."""
    if basis is None:
        basis = plane_basis(plane)
    pts = cloud.points if hasattr(cloud, "points") else np.asarray(cloud, dtype=np.float64)
    idx = np.asarray(outlier_indices, dtype=np.intp)
    if idx.size == 0:
        return np.empty((0, 2))
    return to_plane_coords(project_to_plane(pts[idx], plane), plane, basis)


def cell_indices(points, origin, cell_size):
    """Floor-indexed (col, row) of each point."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    cols = np.floor((pts[:, 0] - origin[0]) / cell_size).astype(np.int64)
    rows = np.floor((pts[:, 1] - origin[1]) / cell_size).astype(np.int64)
    return cols, rows


def rasterize(points, cell_size=DEFAULT_CELL_SIZE, bounds=None, plane=None, basis=None):
    """Occupancy grid: a cell is 1 iff at least one point falls in it.

    ``bounds`` is ``(u_min, v_min, u_max, v_max)``; points outside it are
    ignored. Without bounds the grid is the points' bounding box grown by one
    empty cell on every side.
    """
    if not cell_size > 0:
        raise ValueError("cell_size must be positive")
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)

    if bounds is None:
        if len(pts) == 0:
            raise EmptyInput("no points to rasterize and no bounds given")
        lo = pts.min(axis=0)
        origin = lo - cell_size
        # rounding in (lo - origin) / cell can land the minimum in the margin
        c0, r0 = cell_indices(lo, origin, cell_size)
        origin = (origin[0] - cell_size * (c0[0] < 1), origin[1] - cell_size * (r0[0] < 1))
        cols, rows = cell_indices(pts, origin, cell_size)
        width, height = int(cols.max()) + 2, int(rows.max()) + 2
    else:
        u0, v0, u1, v1 = (float(b) for b in bounds)
        if not (np.isfinite([u0, v0, u1, v1]).all() and u1 > u0 and v1 > v0):
            raise InvalidBounds(f"degenerate bounds {bounds}")
        origin = (u0, v0)
        width = max(1, int(np.ceil((u1 - u0) / cell_size)))
        height = max(1, int(np.ceil((v1 - v0) / cell_size)))
        inside = (pts[:, 0] >= u0) & (pts[:, 0] < u1) & (pts[:, 1] >= v0) & (pts[:, 1] < v1)
        cols, rows = cell_indices(pts[inside], origin, cell_size)

    cells = np.zeros((height, width), dtype=np.uint8)
    keep = (cols >= 0) & (cols < width) & (rows >= 0) & (rows < height)
    cells[rows[keep], cols[keep]] = 1
    return GridMap(cell_size, origin, cells, plane, basis)


def occupancy_fraction(grid):
    return float(np.count_nonzero(grid.cells)) / grid.cells.size
