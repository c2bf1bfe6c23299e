"""Dominant-plane estimation by random sample consensus."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSample, InvalidProbability, NoPlaneFound, TooFewPoints
from .geometry import distance_to_plane, plane_from_three_points

SAMPLE_SIZE = 3


@dataclass
class PointCloud:
    """Ordered 3D samples; the row index is the point's identity."""

    points: np.ndarray
    frame_label: str = "camera"
    dropped_count: int = 0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.size == 0:
            pts = pts.reshape(0, 3)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"points must have shape (N, 3), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point cloud contains non-finite coordinates")
        self.points = pts

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class RansacConfig:
    inlier_threshold: float = 0.02
    confidence: float = 0.99
    assumed_inlier_ratio: float = 0.5
    max_iterations: int = 1000
    early_stop_inlier_fraction: float = 0.9
    seed: int = 42

    def __post_init__(self):
        if not self.inlier_threshold > 0:
            raise ValueError("inlier_threshold must be positive")
        if not 0 < self.confidence < 1:
            raise InvalidProbability(f"confidence must be in (0, 1), got {self.confidence}")
        if not 0 < self.assumed_inlier_ratio <= 1:
            raise InvalidProbability(
                f"assumed_inlier_ratio must be in (0, 1], got {self.assumed_inlier_ratio}"
            )
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not 0 < self.early_stop_inlier_fraction <= 1:
            raise ValueError("early_stop_inlier_fraction must be in (0, 1]")


@dataclass
class PlaneFit:
    plane: object
    inlier_indices: np.ndarray
    outlier_indices: np.ndarray
    iterations_run: int
    candidates: list = field(default_factory=list, repr=False)


def required_iterations(p, u, m=SAMPLE_SIZE):
    """Trials needed so that, with probability ``p``, at least one
    ``m``-point sample is outlier-free when each point is an inlier with
    probability ``u``."""
    if not 0 < p < 1:
        raise InvalidProbability(f"p must be in (0, 1), got {p}")
    if not 0 < u <= 1:
        raise InvalidProbability(f"u must be in (0, 1], got {u}")
    if m < 1:
        raise ValueError("m must be >= 1")
    all_inlier = u**m
    if all_inlier >= 1.0:
        return 1
    return max(1, math.ceil(math.log(1.0 - p) / math.log(1.0 - all_inlier)))


def partition_by_plane(cloud, plane, t):
    """Split point indices into (distance < t, distance >= t)."""
    if not t > 0:
        raise ValueError("threshold must be positive")
    pts = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=np.float64)
    inside = distance_to_plane(pts, plane) < t
    return np.flatnonzero(inside), np.flatnonzero(~inside)


def estimate_ground_plane(cloud, cfg=RansacConfig(), keep_candidates=False):
    pts = cloud.points
    n = len(pts)
    if n < SAMPLE_SIZE:
        raise TooFewPoints(f"need at least {SAMPLE_SIZE} points, got {n}")

    rng = np.random.default_rng(cfg.seed)
    n_iter = min(cfg.max_iterations, required_iterations(cfg.confidence, cfg.assumed_inlier_ratio))
    stop_at = cfg.early_stop_inlier_fraction * n
    resample_budget = cfg.max_iterations

    best_plane, best_count = None, 0
    iterations = 0
    candidates = []
    while iterations < n_iter:
        idx = rng.choice(n, SAMPLE_SIZE, replace=False)
        try:
            plane = plane_from_three_points(*pts[idx])
        except DegenerateSample:
            resample_budget -= 1
            if resample_budget <= 0:
                break
            continue
        iterations += 1
        count = int(np.count_nonzero(distance_to_plane(pts, plane) < cfg.inlier_threshold))
        if keep_candidates:
            candidates.append((plane, count))
        if count > best_count or best_plane is None:
            best_plane, best_count = plane, count
        if best_count >= stop_at:
            break

    if best_plane is None:
        raise NoPlaneFound("every three-point sample was degenerate")

    inliers, outliers = partition_by_plane(pts, best_plane, cfg.inlier_threshold)
    return PlaneFit(best_plane, inliers, outliers, iterations, candidates)
