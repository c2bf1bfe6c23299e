"""Sweep the body template over a grid map and show the score per angle.

Run: python3 demos/03_template_matching.py
"""

import numpy as np

from gppc import MatchConfig, detect_casualty, plane_basis
from gppc.geometry import direction_angle
from gppc.gridmap import project_cloud, rasterize
from gppc.matcher import score_maps
from gppc.pipeline import grid_bounds
from gppc.ransac import estimate_ground_plane
from gppc.synth import Scenario, body_template, make_scene

cell = 0.05
tpl = body_template(cell)
print(f"template {tpl.height} x {tpl.width} cells, {tpl.mask.sum()} occupied")

scenario = Scenario(camera_pitch=25, body_center=(2.2, 0.3), body_yaw=90)
cloud, truth = make_scene(scenario)
fit = estimate_ground_plane(cloud)
uv = project_cloud(cloud, fit.outlier_indices, fit.plane, plane_basis(fit.plane))
grid = rasterize(uv, cell, grid_bounds(uv, tpl, cell), fit.plane, plane_basis(fit.plane))

cfg = MatchConfig()
best = [(a, s.max()) for a, _, s in score_maps(grid, tpl, cfg.angles())]
print("\nbest score per angle (every 30 deg):")
for a, s in best[::6]:
    print(f"  {a:5.0f} deg  {s:.3f}  " + "*" * int(round(40 * s)))

dets = detect_casualty(grid, tpl, cfg)
for d in dets:
    xyz = grid.to_world(d.center)
    print(f"\ndetection at {np.round(xyz, 3)} (camera frame), angle {d.angle:g} deg, score {d.score:.3f}")
true_xyz = truth.to_camera([*scenario.body_center, 0.0])
print(f"true body centre {np.round(true_xyz, 3)}")
# angles live in the fitted plane's (u, v) frame, not the floor frame
head = direction_angle(truth.head_direction_camera(), fit.plane, plane_basis(fit.plane))
print(f"true head direction {head:.1f} deg in the plane frame (yaw {scenario.body_yaw:g} on the floor)")
