import math

import numpy as np
import pytest
from shapely.geometry import Point, Polygon, box
from shapely.ops import unary_union

from gppc.errors import BodyNotVisible
from gppc.synth import (
    BODY,
    FLOOR,
    CameraModel,
    Disc,
    Scenario,
    body_silhouette,
    body_template,
    camera_pose,
    make_scene,
    scenario_catalog,
    silhouette_length,
)


def shapely_silhouette(sil):
    shapes = []
    for p in sil.parts:
        if isinstance(p, Disc):
            shapes.append(Point(p.cx, p.cy).buffer(p.radius, 256))
        else:
            c, s = math.cos(p.angle), math.sin(p.angle)
            corners = [(a * p.half_len, b * p.half_wid) for a, b in ((-1, -1), (1, -1), (1, 1), (-1, 1))]
            shapes.append(Polygon([(p.cx + x * c - y * s, p.cy + x * s + y * c) for x, y in corners]))
    return unary_union(shapes)


def test_silhouette_length_is_human():
    assert 1.6 <= silhouette_length(body_silhouette()) <= 1.8
    assert silhouette_length(body_silhouette(2.0)) == pytest.approx(2 * silhouette_length(body_silhouette()))


def test_template_cell_count():
    tpl = body_template(0.05)
    assert 250 <= tpl.mask.sum() <= 400
    assert tpl.width > tpl.height  # head along +u


def test_scale_must_be_positive():
    with pytest.raises(ValueError):
        body_silhouette(0)


def test_body_behind_camera():
    with pytest.raises(BodyNotVisible):
        make_scene(Scenario(body_center=(-3.0, 0.0), noise_sigma=0.0))


def test_noiseless_floor_is_exact():
    sc = Scenario(camera_pitch=30, body_center=(2.0, 0.0), noise_sigma=0.0)
    cloud, truth = make_scene(sc)
    floor = truth.to_floor(cloud.points[truth.labels == FLOOR])
    assert len(floor) > 1000
    assert np.abs(floor[:, 2]).max() <= 1e-9
    np.testing.assert_allclose(np.abs((cloud.points[truth.labels == FLOOR] - truth.plane.anchor) @ truth.plane.normal), 0, atol=1e-9)


def test_noiseless_body_points_lie_on_the_body():
    sc = Scenario(camera_pitch=30, body_center=(2.0, 0.0), body_yaw=30, noise_sigma=0.0)
    cloud, truth = make_scene(sc)
    body = truth.to_floor(cloud.points[truth.labels == BODY])
    assert len(body) > 100
    assert body[:, 2].min() >= -1e-9 and body[:, 2].max() <= sc.body_height + 1e-9
    shape = shapely_silhouette(sc.silhouette()).buffer(1e-6)
    assert all(shape.covers(Point(x, y)) for x, y in body[:, :2])


def test_range_noise_is_gaussian_along_rays():
    sigma = 0.005
    sc = Scenario(camera_pitch=30, body_center=(2.0, 0.0), noise_sigma=sigma)
    cloud, truth = make_scene(sc)
    pts = cloud.points[truth.labels == FLOOR]
    rng = np.linalg.norm(pts, axis=1)
    d = (pts / rng[:, None]) @ truth.rotation.T  # ray directions in the floor frame
    true_range = -truth.camera_center[2] / d[:, 2]
    err = np.abs(rng - true_range)
    assert np.mean(err <= 3 * sigma) >= 0.95
    assert np.mean(err <= 4 * sigma) >= 0.99
    assert np.std(rng - true_range) == pytest.approx(sigma, rel=0.05)
    height = np.abs(truth.to_floor(pts)[:, 2])
    assert np.mean(height <= 3 * sigma) >= 0.95
    assert np.mean(height <= 4 * sigma) >= 0.99


def test_points_respect_range_band_and_image_size():
    cam = CameraModel()
    cloud, _ = make_scene(Scenario(camera_pitch=45, body_center=(1.2, 0.3)))
    r = np.linalg.norm(cloud.points, axis=1)
    assert r.min() >= cam.min_range and r.max() <= cam.max_range
    assert len(cloud) <= cam.image_width * cam.image_height


def test_scene_is_deterministic():
    sc = Scenario(camera_pitch=25, body_center=(2.2, -0.4), body_yaw=45)
    a, _ = make_scene(sc)
    b, _ = make_scene(sc)
    np.testing.assert_array_equal(a.points, b.points)
    c, _ = make_scene(Scenario(camera_pitch=25, body_center=(2.2, -0.4), body_yaw=45, seed=8))
    assert not np.array_equal(a.points, c.points)


def test_camera_pose_is_a_rotation():
    R, C = camera_pose(Scenario(camera_pitch=35))
    np.testing.assert_allclose(R.T @ R, np.eye(3), atol=1e-12)
    assert np.linalg.det(R) == pytest.approx(1.0)
    # optical axis points down by the pitch angle
    assert math.degrees(math.asin(-R[2, 2])) == pytest.approx(35.0)
    assert C[2] == Scenario().camera_height


def test_catalog_layout():
    cat = scenario_catalog()
    assert len(cat) == 16
    assert len({s.name for s in cat}) == 16
    for k in range(4):
        group = cat[4 * k : 4 * k + 4]
        assert len({s.camera_pitch for s in group}) == 1
        assert sorted(s.body_yaw for s in group) == [0, 45, 90, 135]
    assert scenario_catalog() == cat


def test_every_catalog_scene_generates():
    for sc in scenario_catalog():
        cloud, truth = make_scene(sc)
        assert np.count_nonzero(truth.labels == BODY) > 200


def test_body_mask_against_exact_geometry():
    sc = Scenario(body_center=(2.03, -0.41), body_yaw=37)
    _, truth = make_scene(sc)
    mask = truth.body_mask
    shape = shapely_silhouette(sc.silhouette())
    cs = mask.cell_size
    area = cs * cs
    for row in range(mask.height):
        for col in range(mask.width):
            u = mask.origin[0] + col * cs
            v = mask.origin[1] + row * cs
            covered = shape.intersection(box(u, v, u + cs, v + cs)).area / area
            if mask.cells[row, col]:
                assert covered > 0
            elif covered >= 0.25:
                pytest.fail(f"cell {(row, col)} is {covered:.2f} covered but empty")
    assert mask.cells.sum() * area >= shape.area
