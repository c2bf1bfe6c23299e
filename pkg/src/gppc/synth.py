"""Synthetic RGB-D scenes: a body silhouette lying on a floor, seen by a
pitched pinhole depth camera.

Frames
------
floor frame
    x forward (the camera's heading projected on the floor), y left, z up;
    the floor is ``z = 0`` and the camera sits at ``(0, 0, camera_height)``.
camera frame
    optical convention: x right, y down, z along the viewing direction.
    Generated clouds are expressed in this frame, as a real sensor would
    report them.
body frame
    x towards the head, y to the body's left, origin at the middle of the
    silhouette's head-to-foot extent.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import BodyNotVisible
from .geometry import PlaneBasis, PlaneModel
from .gridmap import DEFAULT_CELL_SIZE, GridMap
from .matcher import Template
from .ransac import PointCloud

BODY_HEIGHT = 0.25
CAMERA_HEIGHT = 1.3
DEFAULT_NOISE = 0.005
MASTER_SEED = 7
CATALOG_PITCHES = (15.0, 25.0, 35.0, 45.0)
CATALOG_YAWS = (0.0, 45.0, 90.0, 135.0)
SUPERSAMPLE = 8

FLOOR, BODY = 0, 1


@dataclass(frozen=True)
class Rect:
    """Rectangle by centre, half-length along ``angle`` and half-width."""

    cx: float
    cy: float
    half_len: float
    half_wid: float
    angle: float  # radians

    def contains(self, x, y):
        c, s = math.cos(self.angle), math.sin(self.angle)
        dx, dy = x - self.cx, y - self.cy
        return (np.abs(dx * c + dy * s) <= self.half_len) & (np.abs(-dx * s + dy * c) <= self.half_wid)

    def outline(self, n=4):
        c, s = math.cos(self.angle), math.sin(self.angle)
        t = np.linspace(-1.0, 1.0, n + 1)
        ones = np.ones_like(t)
        local = np.concatenate(
            [
                np.column_stack([t * self.half_len, -ones * self.half_wid]),
                np.column_stack([t * self.half_len, ones * self.half_wid]),
                np.column_stack([-ones * self.half_len, t * self.half_wid]),
                np.column_stack([ones * self.half_len, t * self.half_wid]),
            ]
        )
        return np.column_stack(
            [self.cx + local[:, 0] * c - local[:, 1] * s, self.cy + local[:, 0] * s + local[:, 1] * c]
        )

    def moved(self, dx, dy, yaw):
        c, s = math.cos(yaw), math.sin(yaw)
        return Rect(self.cx * c - self.cy * s + dx, self.cx * s + self.cy * c + dy,
                    self.half_len, self.half_wid, self.angle + yaw)


@dataclass(frozen=True)
class Disc:
    cx: float
    cy: float
    radius: float

    def contains(self, x, y):
        return (x - self.cx) ** 2 + (y - self.cy) ** 2 <= self.radius**2

    def outline(self, n=24):
        a = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
        return np.column_stack([self.cx + self.radius * np.cos(a), self.cy + self.radius * np.sin(a)])

    def moved(self, dx, dy, yaw):
        c, s = math.cos(yaw), math.sin(yaw)
        return Disc(self.cx * c - self.cy * s + dx, self.cx * s + self.cy * c + dy, self.radius)


@dataclass(frozen=True)
class Silhouette:
    parts: tuple

    def contains(self, x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        out = np.zeros(np.broadcast(x, y).shape, dtype=bool)
        for p in self.parts:
            out |= p.contains(x, y)
        return out

    def outline(self):
        return np.concatenate([p.outline() for p in self.parts])

    def moved(self, center, yaw_deg):
        yaw = math.radians(yaw_deg)
        return Silhouette(tuple(p.moved(center[0], center[1], yaw) for p in self.parts))

    def bounds(self):
        pts = self.outline()
        return pts.min(axis=0), pts.max(axis=0)


def body_silhouette(scale=1.0):
    """Top-down outline of a person lying on their back with arms raised.

    Head disc r=0.10, torso 0.50 x 0.35, legs 0.75 x 0.12 splayed 8 deg,
    arms 0.55 x 0.10 raised overhead and splayed 25 deg; all x ``scale``.
    """
    if not scale > 0:
        raise ValueError("scale must be positive")
    k = float(scale)
    leg_splay, arm_splay = math.radians(8.0), math.radians(25.0)
    parts = [Rect(0.25 * k, 0.0, 0.25 * k, 0.175 * k, 0.0)]  # torso, hips at x=0
    parts.append(Disc(0.60 * k, 0.0, 0.10 * k))
    for side in (1.0, -1.0):
        hip = np.array([0.0, side * 0.09 * k])
        d = np.array([-math.cos(leg_splay), side * math.sin(leg_splay)])
        c = hip + d * 0.375 * k
        parts.append(Rect(c[0], c[1], 0.375 * k, 0.06 * k, math.atan2(d[1], d[0])))
        shoulder = np.array([0.45 * k, side * 0.15 * k])
        d = np.array([math.cos(arm_splay), side * math.sin(arm_splay)])
        c = shoulder + d * 0.275 * k
        parts.append(Rect(c[0], c[1], 0.275 * k, 0.05 * k, math.atan2(d[1], d[0])))
    sil = Silhouette(tuple(parts))
    lo, hi = sil.bounds()
    return sil.moved((-(lo[0] + hi[0]) / 2.0, 0.0), 0.0)


def silhouette_length(sil):
    lo, hi = sil.bounds()
    return float(hi[0] - lo[0])


def rasterize_silhouette(sil, cell_size, origin, shape, supersample=SUPERSAMPLE):
    """Cells (rows along y, cols along x) touched by the silhouette, probed
    on a ``supersample`` x ``supersample`` lattice inside each cell."""
    h, w = shape
    sub = (np.arange(supersample) + 0.5) / supersample
    xs = origin[0] + (np.arange(w)[:, None] + sub[None, :]).ravel() * cell_size
    ys = origin[1] + (np.arange(h)[:, None] + sub[None, :]).ravel() * cell_size
    inside = sil.contains(xs[None, :], ys[:, None])
    inside = inside.reshape(h, supersample, w, supersample)
    return inside.any(axis=(1, 3)).astype(np.uint8)


def body_template(cell_size=DEFAULT_CELL_SIZE, scale=1.0):
    """Grid-map template of the silhouette, head along +u, centred on the canvas."""
    sil = body_silhouette(scale)
    lo, hi = sil.bounds()
    half_w = math.ceil(max(-lo[0], hi[0]) / cell_size - 1e-9)
    half_h = math.ceil(max(-lo[1], hi[1]) / cell_size - 1e-9)
    mask = rasterize_silhouette(
        sil, cell_size, (-half_w * cell_size, -half_h * cell_size), (2 * half_h, 2 * half_w)
    )
    return Template(cell_size, mask)


@dataclass(frozen=True)
class CameraModel:
    horizontal_fov: float = 58.0
    vertical_fov: float = 45.0
    image_width: int = 640
    image_height: int = 480
    min_range: float = 0.8
    max_range: float = 3.5

    def __post_init__(self):
        if not (0 < self.horizontal_fov < 180 and 0 < self.vertical_fov < 180):
            raise ValueError("field of view must be in (0, 180) degrees")
        if not 0 < self.min_range < self.max_range:
            raise ValueError("need 0 < min_range < max_range")

    @property
    def focal(self):
        fx = self.image_width / 2.0 / math.tan(math.radians(self.horizontal_fov) / 2.0)
        fy = self.image_height / 2.0 / math.tan(math.radians(self.vertical_fov) / 2.0)
        return fx, fy

    def ray_directions(self):
        """Unit viewing ray per pixel, row-major, camera frame, ``(H*W, 3)``."""
        fx, fy = self.focal
        u = (np.arange(self.image_width) + 0.5 - self.image_width / 2.0) / fx
        v = (np.arange(self.image_height) + 0.5 - self.image_height / 2.0) / fy
        uu, vv = np.meshgrid(u, v)
        d = np.stack([uu.ravel(), vv.ravel(), np.ones(uu.size)], axis=1)
        return d / np.linalg.norm(d, axis=1, keepdims=True)

    def project(self, p_cam):
        """Pixel coordinates of camera-frame points (columns, rows)."""
        p = np.asarray(p_cam, dtype=np.float64).reshape(-1, 3)
        fx, fy = self.focal
        with np.errstate(divide="ignore", invalid="ignore"):
            col = fx * p[:, 0] / p[:, 2] + self.image_width / 2.0
            row = fy * p[:, 1] / p[:, 2] + self.image_height / 2.0
        return col, row


@dataclass(frozen=True)
class Scenario:
    camera_pitch: float = 30.0  # degrees below horizontal
    camera_height: float = CAMERA_HEIGHT
    body_center: tuple = (2.0, 0.0)
    body_yaw: float = 0.0
    noise_sigma: float = DEFAULT_NOISE
    seed: int = MASTER_SEED
    body_height: float = BODY_HEIGHT
    body_scale: float = 1.0
    name: str = ""

    def silhouette(self):
        return body_silhouette(self.body_scale).moved(self.body_center, self.body_yaw)


def camera_pose(scenario):
    """Rotation (camera axes as columns, floor coords) and camera centre."""
    th = math.radians(scenario.camera_pitch)
    z_c = np.array([math.cos(th), 0.0, -math.sin(th)])
    x_c = np.array([0.0, -1.0, 0.0])
    y_c = np.cross(z_c, x_c)
    return np.column_stack([x_c, y_c, z_c]), np.array([0.0, 0.0, scenario.camera_height])


@dataclass
class GroundTruth:
    """Known answer for a generated scene.

    ``plane`` is the floor expressed in the camera frame (the frame of the
    generated cloud); ``body_center`` / ``body_yaw`` are in the floor frame;
    ``body_mask`` is the rasterised silhouette on the floor frame lattice.
    """

    plane: PlaneModel
    body_center: tuple
    body_yaw: float
    body_mask: GridMap
    rotation: np.ndarray
    camera_center: np.ndarray
    labels: np.ndarray = field(repr=False, default=None)

    def to_camera(self, p_floor):
        return (np.asarray(p_floor, dtype=np.float64) - self.camera_center) @ self.rotation

    def to_floor(self, p_cam):
        return np.asarray(p_cam, dtype=np.float64) @ self.rotation.T + self.camera_center

    def head_direction_camera(self):
        a = math.radians(self.body_yaw)
        return np.array([math.cos(a), math.sin(a), 0.0]) @ self.rotation


def body_mask(sil, cell_size=DEFAULT_CELL_SIZE):
    """Silhouette cells on the floor lattice anchored at the floor origin."""
    lo, hi = sil.bounds()
    i0 = math.floor(lo[0] / cell_size) - 1
    j0 = math.floor(lo[1] / cell_size) - 1
    i1 = math.floor(hi[0] / cell_size) + 2
    j1 = math.floor(hi[1] / cell_size) + 2
    origin = (i0 * cell_size, j0 * cell_size)
    cells = rasterize_silhouette(sil, cell_size, origin, (j1 - j0, i1 - i0))
    floor = PlaneModel([0.0, 0.0, 1.0], [0.0, 0.0, 0.0])
    return GridMap(cell_size, origin, cells, floor, PlaneBasis([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]))


def _slab(o, d, lo, hi):
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = (lo - o) / d
        t2 = (hi - o) / d
    parallel = d == 0
    inside = (o >= lo) & (o <= hi)
    enter = np.where(parallel, np.where(inside, -np.inf, np.inf), np.minimum(t1, t2))
    leave = np.where(parallel, np.where(inside, np.inf, -np.inf), np.maximum(t1, t2))
    return enter, leave


def _part_hit(part, origin, dirs, height):
    """Entry distance of each ray into one extruded part (inf on miss)."""
    z_in, z_out = _slab(origin[2], dirs[:, 2], 0.0, height)
    if isinstance(part, Rect):
        c, s = math.cos(part.angle), math.sin(part.angle)
        ox, oy = origin[0] - part.cx, origin[1] - part.cy
        lx0, ly0 = ox * c + oy * s, -ox * s + oy * c
        ldx = dirs[:, 0] * c + dirs[:, 1] * s
        ldy = -dirs[:, 0] * s + dirs[:, 1] * c
        x_in, x_out = _slab(lx0, ldx, -part.half_len, part.half_len)
        y_in, y_out = _slab(ly0, ldy, -part.half_wid, part.half_wid)
        enter = np.maximum(np.maximum(x_in, y_in), z_in)
        leave = np.minimum(np.minimum(x_out, y_out), z_out)
    else:
        ox, oy = origin[0] - part.cx, origin[1] - part.cy
        a = dirs[:, 0] ** 2 + dirs[:, 1] ** 2
        b = 2.0 * (ox * dirs[:, 0] + oy * dirs[:, 1])
        c0 = ox**2 + oy**2 - part.radius**2
        disc = b * b - 4.0 * a * c0
        ok = (disc >= 0) & (a > 0)
        sq = np.sqrt(np.where(ok, disc, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            r_in = np.where(ok, (-b - sq) / (2 * a), np.inf)
            r_out = np.where(ok, (-b + sq) / (2 * a), -np.inf)
        enter = np.maximum(r_in, z_in)
        leave = np.minimum(r_out, z_out)
    hit = (enter <= leave) & (enter > 0)
    return np.where(hit, enter, np.inf)


def make_scene(scenario=Scenario(), cam=CameraModel()):
    """Ray-cast one depth frame. Returns ``(PointCloud, GroundTruth)``."""
    R, C = camera_pose(scenario)
    d_cam = cam.ray_directions()
    d = d_cam @ R.T
    sil = scenario.silhouette()

    with np.errstate(divide="ignore"):
        t_floor = np.where(d[:, 2] < 0, -C[2] / d[:, 2], np.inf)
    t_body = np.full(len(d), np.inf)
    for part in sil.parts:
        np.minimum(t_body, _part_hit(part, C, d, scenario.body_height), out=t_body)
    t = np.minimum(t_floor, t_body)
    label = np.where(t_body < t_floor, BODY, FLOOR)

    rng = np.random.default_rng(scenario.seed)
    noise = rng.standard_normal(len(d)) * scenario.noise_sigma
    rng_t = t + noise
    keep = np.isfinite(t) & (rng_t >= cam.min_range) & (rng_t <= cam.max_range)
    if not np.any(keep & (label == BODY)):
        raise BodyNotVisible(f"no ray hits the body in scenario {scenario.name or scenario}")

    points = d_cam[keep] * rng_t[keep, None]
    floor_cam = PlaneModel(np.array([0.0, 0.0, 1.0]) @ R, -C @ R)
    truth = GroundTruth(
        plane=floor_cam,
        body_center=tuple(float(c) for c in scenario.body_center),
        body_yaw=float(scenario.body_yaw),
        body_mask=body_mask(sil),
        rotation=R,
        camera_center=C,
        labels=label[keep],
    )
    return PointCloud(points, frame_label="camera"), truth


def body_fully_visible(scenario, cam=CameraModel(), range_margin=0.05, pixel_margin=2.0):
    """Whether the whole silhouette top lies inside the image and depth band."""
    R, C = camera_pose(scenario)
    xy = scenario.silhouette().outline()
    pts = np.column_stack([xy, np.full(len(xy), scenario.body_height)])
    p_cam = (pts - C) @ R
    if np.any(p_cam[:, 2] <= 0):
        return False
    rng_ = np.linalg.norm(p_cam, axis=1)
    if rng_.min() < cam.min_range + range_margin or rng_.max() > cam.max_range - range_margin:
        return False
    col, row = cam.project(p_cam)
    return bool(
        np.all(col >= pixel_margin)
        and np.all(col <= cam.image_width - pixel_margin)
        and np.all(row >= pixel_margin)
        and np.all(row <= cam.image_height - pixel_margin)
    )


def _derived_seed(master, index):
    return int(np.random.SeedSequence([master, index]).generate_state(1, np.uint64)[0])


def scenario_catalog(noise_sigma=DEFAULT_NOISE, seed=MASTER_SEED, cam=CameraModel(), max_tries=20000):
    """The 16 pitch x yaw scenarios; 1-4 share the shallowest pitch."""
    out = []
    for i, (pitch, yaw) in enumerate((p, y) for p in CATALOG_PITCHES for y in CATALOG_YAWS):
        rng = np.random.default_rng([seed, i])
        base = Scenario(camera_pitch=pitch, body_yaw=yaw, noise_sigma=noise_sigma,
                        seed=_derived_seed(seed, i), name=f"scenario-{i + 1:02d}")
        for _ in range(max_tries):
            center = (float(rng.uniform(0.3, 3.5)), float(rng.uniform(-1.5, 1.5)))
            candidate = replace(base, body_center=center)
            if body_fully_visible(candidate, cam):
                out.append(candidate)
                break
        else:
            raise BodyNotVisible(f"no fully visible body placement for pitch {pitch}, yaw {yaw}")
    return out
