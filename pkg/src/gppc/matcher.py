"""Rotation-sweeping binary template matching on a grid map.

A placement is scored by the Jaccard overlap between the template mask and
the grid window under it: ``|mask & window| / |mask | window|``. Every offset
of every rotation on the angle lattice is scored; the surviving candidates
go through greedy non-maximum suppression.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from .errors import CellSizeMismatch, OutOfBounds, TemplateLargerThanGrid


@dataclass
class Template:
    cell_size: float
    mask: np.ndarray

    def __post_init__(self):
        if not self.cell_size > 0:
            raise ValueError("cell_size must be positive")
        mask = np.asarray(self.mask)
        if mask.ndim != 2 or mask.size == 0:
            raise ValueError("template mask must be a non-empty 2D array")
        if not np.isin(mask, (0, 1)).all():
            raise ValueError("template mask must be binary")
        if not mask.any():
            raise ValueError("template mask has no occupied cell")
        self.mask = mask.astype(np.uint8)

    @property
    def width(self):
        return self.mask.shape[1]

    @property
    def height(self):
        return self.mask.shape[0]


@dataclass(frozen=True)
class MatchConfig:
    angle_step: float = 5.0
    score_threshold: float = 0.5
    max_detections: int = 4

    def __post_init__(self):
        if not 0 < self.angle_step <= 90:
            raise ValueError("angle_step must be in (0, 90]")
        if not 0 < self.score_threshold <= 1:
            raise ValueError("score_threshold must be in (0, 1]")
        if self.max_detections < 1:
            raise ValueError("max_detections must be >= 1")

    def angles(self):
        n = math.ceil(360.0 / self.angle_step - 1e-9)
        return [round(k * self.angle_step, 9) for k in range(n)]


@dataclass
class Detection:
    center: tuple  # plane-frame (u, v), metres
    angle: float  # degrees, [0, 360)
    score: float
    half_extents: tuple  # metres along the rotated template axes
    offset: tuple = (0, 0)  # (row, col) of the rotated canvas in the grid

    @property
    def bbox(self):
        return {"center": self.center, "half_extents": self.half_extents, "angle": self.angle}

    def contains(self, uv):
        """True where plane-frame points fall inside this detection's box."""
        uv = np.asarray(uv, dtype=np.float64).reshape(-1, 2)
        a = math.radians(self.angle)
        d = uv - np.asarray(self.center)
        lx = d[:, 0] * math.cos(a) + d[:, 1] * math.sin(a)
        ly = -d[:, 0] * math.sin(a) + d[:, 1] * math.cos(a)
        return (np.abs(lx) <= self.half_extents[0]) & (np.abs(ly) <= self.half_extents[1])


def _rotate_residual(mask, angle):
    """Nearest-neighbour CCW rotation by ``angle`` in [0, 90) degrees."""
    if angle == 0:
        return mask.copy()
    h, w = mask.shape
    a = math.radians(angle)
    c, s = math.cos(a), math.sin(a)
    new_w = max(1, math.ceil(w * c + h * s - 1e-9))
    new_h = max(1, math.ceil(w * s + h * c - 1e-9))
    x = np.arange(new_w) + 0.5 - new_w / 2.0
    y = np.arange(new_h) + 0.5 - new_h / 2.0
    xx, yy = np.meshgrid(x, y)
    src_col = np.floor(xx * c + yy * s + w / 2.0).astype(np.int64)
    src_row = np.floor(-xx * s + yy * c + h / 2.0).astype(np.int64)
    ok = (src_col >= 0) & (src_col < w) & (src_row >= 0) & (src_row < h)
    out = np.zeros((new_h, new_w), dtype=np.uint8)
    out[ok] = mask[src_row[ok], src_col[ok]]
    return out


def rotate_mask(mask, angle):
    """Rotate a binary mask CCW in the (u=col, v=row) frame.

    Right-angle multiples are applied as exact quarter turns, so
    ``rotate_mask(m, a + 90)`` is always the quarter turn of
    ``rotate_mask(m, a)``.
    """
    angle = float(angle) % 360.0
    quarters, residual = divmod(angle, 90.0)
    out = _rotate_residual(np.asarray(mask, dtype=np.uint8), residual)
    # axes=(1, 0) turns +u into +v, i.e. CCW with v pointing along rows
    return np.ascontiguousarray(np.rot90(out, int(quarters), axes=(1, 0)))


def rotate_template(tpl, angle):
    return Template(tpl.cell_size, rotate_mask(tpl.mask, angle))


def _check_cell_size(grid, tpl):
    if not math.isclose(grid.cell_size, tpl.cell_size, rel_tol=1e-9, abs_tol=0.0):
        raise CellSizeMismatch(f"grid cell {grid.cell_size} != template cell {tpl.cell_size}")


def match_score(grid, tpl, offset):
    """Jaccard overlap of ``tpl`` placed with its top-left cell at ``offset``."""
    _check_cell_size(grid, tpl)
    row, col = (int(o) for o in offset)
    h, w = tpl.mask.shape
    if row < 0 or col < 0 or row + h > grid.height or col + w > grid.width:
        raise OutOfBounds(f"template of shape {tpl.mask.shape} at {offset} leaves the grid")
    window = grid.cells[row : row + h, col : col + w].astype(bool)
    mask = tpl.mask.astype(bool)
    union = np.count_nonzero(mask | window)
    return np.count_nonzero(mask & window) / union


class _GridCorrelator:
    """Cross-correlates many kernels against one grid reusing its spectrum."""

    def __init__(self, cells, max_kernel_shape):
        self.cells = cells.astype(np.float64)
        h, w = cells.shape
        self.shape = (
            sfft.next_fast_len(h + max_kernel_shape[0] - 1, real=True),
            sfft.next_fast_len(w + max_kernel_shape[1] - 1, real=True),
        )
        self.spectrum = sfft.rfft2(self.cells, self.shape)
        integral = np.zeros((h + 1, w + 1), dtype=np.int64)
        integral[1:, 1:] = np.cumsum(np.cumsum(cells.astype(np.int64), axis=0), axis=1)
        self.integral = integral

    def overlap(self, kernel):
        kh, kw = kernel.shape
        h, w = self.cells.shape
        kernel_f = sfft.rfft2(kernel[::-1, ::-1].astype(np.float64), self.shape)
        full = sfft.irfft2(self.spectrum * kernel_f, self.shape)
        return np.rint(full[kh - 1 : h, kw - 1 : w]).astype(np.int64)

    def window_counts(self, kh, kw):
        s = self.integral
        return s[kh:, kw:] - s[:-kh, kw:] - s[kh:, :-kw] + s[:-kh, :-kw]


def score_maps(grid, tpl, angles):
    """Jaccard score of every valid offset for each angle.

    Returns a list of ``(angle, rotated_mask, scores)`` where ``scores[r, c]``
    is the score with the rotated canvas's top-left cell at ``(r, c)``.
    """
    _check_cell_size(grid, tpl)
    rotated = [(a, rotate_mask(tpl.mask, a)) for a in angles]
    for a, m in rotated:
        if m.shape[0] > grid.height or m.shape[1] > grid.width:
            raise TemplateLargerThanGrid(
                f"template rotated by {a} deg is {m.shape}, grid is {grid.cells.shape}"
            )
    max_shape = (max(m.shape[0] for _, m in rotated), max(m.shape[1] for _, m in rotated))
    corr = _GridCorrelator(grid.cells, max_shape)
    out = []
    for a, m in rotated:
        inter = corr.overlap(m)
        union = int(m.sum()) + corr.window_counts(*m.shape) - inter
        out.append((a, m, inter / union))
    return out


def detect_casualty(grid, tpl, cfg=MatchConfig()):
    """Scored, oriented detections of ``tpl`` in ``grid``, best first."""
    maps = score_maps(grid, tpl, cfg.angles())
    if not grid.cells.any():
        return []

    scores, angle_idx, rows, cols = [], [], [], []
    for k, (_, _, s) in enumerate(maps):
        r, c = np.nonzero(s >= cfg.score_threshold)
        scores.append(s[r, c])
        angle_idx.append(np.full(len(r), k))
        rows.append(r)
        cols.append(c)
    scores = np.concatenate(scores)
    if scores.size == 0:
        return []
    angle_idx = np.concatenate(angle_idx)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)

    order = np.lexsort((cols, rows, angle_idx, -scores))
    shapes = np.array([m.shape for _, m, _ in maps])
    cs = grid.cell_size
    centers = np.column_stack(
        [
            grid.origin[0] + (cols + shapes[angle_idx, 1] / 2.0) * cs,
            grid.origin[1] + (rows + shapes[angle_idx, 0] / 2.0) * cs,
        ]
    )
    half = (tpl.width * cs / 2.0, tpl.height * cs / 2.0)

    detections = []
    alive = np.ones(len(order), dtype=bool)
    order_centers = centers[order]
    while alive.any():
        pos = int(np.argmax(alive))
        i = order[pos]
        det = Detection(
            center=(float(centers[i, 0]), float(centers[i, 1])),
            angle=float(maps[angle_idx[i]][0]),
            score=float(scores[i]),
            half_extents=half,
            offset=(int(rows[i]), int(cols[i])),
        )
        detections.append(det)
        if len(detections) >= cfg.max_detections:
            break
        alive[pos] = False
        alive &= ~det.contains(order_centers)
        # symmetric check: the accepted centre must not sit in a survivor's box
        rest = np.flatnonzero(alive)
        if rest.size:
            a = np.radians(np.asarray([maps[k][0] for k in angle_idx[order[rest]]]))
            d = np.asarray(det.center) - order_centers[rest]
            lx = d[:, 0] * np.cos(a) + d[:, 1] * np.sin(a)
            ly = -d[:, 0] * np.sin(a) + d[:, 1] * np.cos(a)
            alive[rest] &= ~((np.abs(lx) <= half[0]) & (np.abs(ly) <= half[1]))
    return detections
