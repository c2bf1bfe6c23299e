"""Plane representation, point-to-plane distance and orthogonal projection.

Points are plain numpy arrays: a single point has shape ``(3,)`` and a batch
has shape ``(N, 3)``. Every function below accepts either form.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSample, OffPlanePoint

CONSTRUCTION_TOL = 1e-12
GEOMETRY_TOL = 1e-9
ON_PLANE_SLACK = 1e-6


def _frozen(a):
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


def _check_finite(a, what):
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{what} must be finite")


@dataclass(frozen=True, eq=False)
class PlaneModel:
    """Point-normal plane ``normal . (x - anchor) = 0``.

    The normal is normalised on construction and its largest-magnitude
    component is made positive, so two models of the same plane compare equal
    up to the anchor choice.
    """

    normal: np.ndarray
    anchor: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=np.float64).reshape(3)
        a = np.asarray(self.anchor, dtype=np.float64).reshape(3)
        _check_finite(n, "normal")
        _check_finite(a, "anchor")
        norm = np.linalg.norm(n)
        if norm < CONSTRUCTION_TOL:
            raise DegenerateSample("plane normal has zero length")
        n = n / norm
        if n[np.argmax(np.abs(n))] < 0:
            n = -n
        object.__setattr__(self, "normal", _frozen(n))
        object.__setattr__(self, "anchor", _frozen(a))

    @property
    def offset(self):
        """Signed ``d`` in ``normal . x = d``."""
        return float(self.normal @ self.anchor)

    def same_plane(self, other, tol=GEOMETRY_TOL):
        return bool(
            np.allclose(self.normal, other.normal, atol=tol, rtol=0)
            and abs(self.normal @ (other.anchor - self.anchor)) <= tol
        )

    def __repr__(self):
        return f"PlaneModel(normal={self.normal.tolist()}, anchor={self.anchor.tolist()})"


@dataclass(frozen=True, eq=False)
class PlaneBasis:
    """Right-handed orthonormal in-plane axes; ``u_axis x v_axis = normal``."""

    u_axis: np.ndarray
    v_axis: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u_axis", _frozen(self.u_axis))
        object.__setattr__(self, "v_axis", _frozen(self.v_axis))


def plane_from_three_points(p1, p2, p3):
    p1, p2, p3 = (np.asarray(p, dtype=np.float64) for p in (p1, p2, p3))
    n = np.cross(p2 - p1, p3 - p1)
    if np.linalg.norm(n) < CONSTRUCTION_TOL:
        raise DegenerateSample("sample points are coincident or collinear")
    return PlaneModel(n, p1)


def signed_distance(p, plane):
    return (np.asarray(p, dtype=np.float64) - plane.anchor) @ plane.normal


def distance_to_plane(p, plane):
    return np.abs(signed_distance(p, plane))


def project_to_plane(p, plane):
    """Nearest point on ``plane`` to each point in ``p``.

    Walks from ``p`` along the unit normal by ``t = normal . (anchor - p)``.
    """
    p = np.asarray(p, dtype=np.float64)
    t = (plane.anchor - p) @ plane.normal
    return p + np.multiply.outer(t, plane.normal)


def plane_basis(plane):
    """Deterministic in-plane frame.

    The world axis least aligned with the normal (x, y, z preferred in that
    order on ties) is Gram-Schmidt'ed against the normal to give ``u_axis``;
    ``v_axis`` completes a right-handed frame.
    """
    n = plane.normal
    e = np.eye(3)[int(np.argmin(np.abs(n)))]
    u = e - (e @ n) * n
    u = u / np.linalg.norm(u)
    v = np.cross(n, u)
    return PlaneBasis(u, v)


def to_plane_coords(p, plane, basis, tol=ON_PLANE_SLACK):
    p = np.asarray(p, dtype=np.float64)
    if np.any(distance_to_plane(p, plane) > tol):
        raise OffPlanePoint("point is off the plane; project it first")
    d = p - plane.anchor
    return np.stack([d @ basis.u_axis, d @ basis.v_axis], axis=-1)


def from_plane_coords(uv, plane, basis):
    uv = np.asarray(uv, dtype=np.float64)
    return (
        plane.anchor
        + np.multiply.outer(uv[..., 0], basis.u_axis)
        + np.multiply.outer(uv[..., 1], basis.v_axis)
    )


def direction_angle(direction, plane, basis):
    """Angle in degrees, [0, 360), of a 3D direction seen in the plane frame."""
    d = np.asarray(direction, dtype=np.float64)
    return float(np.degrees(np.arctan2(d @ basis.v_axis, d @ basis.u_axis)) % 360.0)
