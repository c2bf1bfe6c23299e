"""Turn the projected leftovers into a binary grid map and draw it as text.

Run: python3 demos/02_grid_map.py
"""

from gppc import plane_basis
from gppc.gridmap import occupancy_fraction, project_cloud, rasterize
from gppc.ransac import estimate_ground_plane
from gppc.synth import Scenario, make_scene

cloud, truth = make_scene(Scenario(camera_pitch=35, body_center=(1.8, -0.2), body_yaw=45))
fit = estimate_ground_plane(cloud)
uv = project_cloud(cloud, fit.outlier_indices, fit.plane, plane_basis(fit.plane))

for cell in (0.1, 0.05):
    grid = rasterize(uv, cell)
    print(f"cell {cell} m: {grid.height} x {grid.width} cells, "
          f"{occupancy_fraction(grid):.1%} occupied")

grid = rasterize(uv, 0.05)
print()
# row 0 is the lowest v, so print top-down with v increasing upward
for row in grid.cells[::-1]:
    print("".join("#" if c else "." for c in row))
