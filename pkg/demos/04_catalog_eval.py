"""Score the full pipeline on all sixteen camera-pitch / body-yaw combinations.

Run: python3 demos/04_catalog_eval.py [noise_sigma]
"""

import sys

from gppc.pipeline import run_eval

sigma = float(sys.argv[1]) if len(sys.argv) > 1 else 0.005
report = run_eval(noise_sigma=sigma)
print(f"range noise sigma = {sigma} m\n")
print("scenario     pitch  yaw   hit   score  centre err  angle err")
for r in report.results:
    print(f"{r.name}  {r.camera_pitch:5g}  {r.body_yaw:4g}  {'yes' if r.hit else 'no ':3}  "
          f"{r.score or 0:6.3f}  {r.center_error or 0:8.3f} m  {r.angle_error or 0:6.1f} deg")
print(f"\ndetected {report.summary}")
