"""Fit the floor in a synthetic depth frame and drop the remaining points onto it.

Run: python3 demos/01_ground_plane.py
"""

import numpy as np

from gppc import RansacConfig, estimate_ground_plane, plane_basis, required_iterations
from gppc.gridmap import project_cloud
from gppc.synth import BODY, Scenario, make_scene

scenario = Scenario(camera_pitch=30, body_center=(2.0, 0.1), body_yaw=20)
cloud, truth = make_scene(scenario)
print(f"generated {len(cloud)} points, {np.count_nonzero(truth.labels == BODY)} of them on the body")

cfg = RansacConfig()
print(f"iterations needed for p={cfg.confidence}, u={cfg.assumed_inlier_ratio}: "
      f"{required_iterations(cfg.confidence, cfg.assumed_inlier_ratio)}")

fit = estimate_ground_plane(cloud, cfg)
angle = np.degrees(np.arccos(abs(fit.plane.normal @ truth.plane.normal)))
print(f"ran {fit.iterations_run} iterations")
print(f"fitted normal {np.round(fit.plane.normal, 4)}, {angle:.3f} deg from the true floor")
print(f"{len(fit.inlier_indices)} floor inliers, {len(fit.outlier_indices)} points left over")

# the leftover points should be mostly body
labels = truth.labels[fit.outlier_indices]
print(f"body share of the leftovers: {np.mean(labels == BODY):.1%}")

uv = project_cloud(cloud, fit.outlier_indices, fit.plane, plane_basis(fit.plane))
span = uv.max(axis=0) - uv.min(axis=0)
print(f"projected footprint spans {span[0]:.2f} m x {span[1]:.2f} m in the plane frame")
