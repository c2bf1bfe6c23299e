"""Command line entry point: ``gppc detect | synth | eval``."""

import argparse
import logging
import os
import sys

import numpy as np

from . import io
from .errors import GPPCError, StageError
from .gridmap import DEFAULT_CELL_SIZE
from .matcher import MatchConfig
from .pipeline import SCHEMA_VERSION, PipelineConfig, run_detect, run_eval
from .ransac import RansacConfig
from .synth import DEFAULT_NOISE, MASTER_SEED, body_template, make_scene, scenario_catalog


def _scenario_indices(text):
    if text == "all":
        return list(range(1, 17))
    try:
        i = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 1..16 or 'all', got {text!r}") from None
    if not 1 <= i <= 16:
        raise argparse.ArgumentTypeError(f"scenario must be in 1..16, got {i}")
    return [i]


def build_parser():
    p = argparse.ArgumentParser(prog="gppc", description="Casualty detection on ground-projected point clouds.")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("detect", help="detect a lying body in a PCD point cloud")
    d.add_argument("--input", required=True, help="ASCII PCD file")
    d.add_argument("--template", required=True, help="PGM grid-map template")
    d.add_argument("--cell-size", type=float, default=DEFAULT_CELL_SIZE)
    d.add_argument("--ransac-threshold", type=float, default=0.02)
    d.add_argument("--ransac-confidence", type=float, default=0.99)
    d.add_argument("--inlier-ratio", type=float, default=0.5)
    d.add_argument("--max-iters", type=int, default=1000)
    d.add_argument("--early-stop", type=float, default=0.9)
    d.add_argument("--angle-step", type=float, default=5.0)
    d.add_argument("--score-threshold", type=float, default=0.5)
    d.add_argument("--max-detections", type=int, default=4)
    d.add_argument("--seed", type=int, default=42)
    d.add_argument("--grid-out", help="write the grid map as PGM")
    d.add_argument("--report", help="write the JSON report here instead of stdout")
    d.add_argument("--no-timing", action="store_true", help="omit per-stage timings from the report")

    s = sub.add_parser("synth", help="generate catalog scenes as PCD + truth JSON")
    s.add_argument("--scenario", type=_scenario_indices, required=True, help="1..16 or 'all'")
    s.add_argument("--noise", type=float, default=DEFAULT_NOISE)
    s.add_argument("--seed", type=int, default=MASTER_SEED)
    s.add_argument("--cell-size", type=float, default=DEFAULT_CELL_SIZE, help="cell size of template.pgm")
    s.add_argument("--out-dir", required=True)

    e = sub.add_parser("eval", help="score detection on the 16-scenario catalog")
    e.add_argument("--noise", type=float, default=DEFAULT_NOISE)
    e.add_argument("--scenario", type=_scenario_indices, default=None, help="1..16 or 'all' (default)")
    e.add_argument("--report", help="write the JSON summary here")
    return p


def _cmd_detect(args):
    try:
        cfg = PipelineConfig(
            input_path=args.input,
            template_path=args.template,
            cell_size=args.cell_size,
            ransac=RansacConfig(args.ransac_threshold, args.ransac_confidence, args.inlier_ratio,
                                args.max_iters, args.early_stop, args.seed),
            match=MatchConfig(args.angle_step, args.score_threshold, args.max_detections),
            grid_out=args.grid_out,
            report_path=args.report,
            timing=not args.no_timing,
        )
    except ValueError as e:
        print(f"error [config]: {e}", file=sys.stderr)
        return 1
    try:
        report = run_detect(cfg)
    except StageError as e:
        print(f"error {e}", file=sys.stderr)
        return 1
    if not args.report:
        sys.stdout.write(io.dumps_json(report.to_dict(cfg.timing)))
    return report.exit_code


def _truth_dict(scenario, cloud, truth):
    mask = truth.body_mask
    rows, cols = np.nonzero(mask.cells)
    center_cam = truth.to_camera([truth.body_center[0], truth.body_center[1], 0.0])
    return {
        "schema_version": SCHEMA_VERSION,
        "scenario": {
            "name": scenario.name,
            "camera_pitch_deg": scenario.camera_pitch,
            "camera_height_m": scenario.camera_height,
            "body_center_floor": list(scenario.body_center),
            "body_yaw_deg": scenario.body_yaw,
            "noise_sigma": scenario.noise_sigma,
            "seed": scenario.seed,
        },
        "floor_plane_camera": {"normal": truth.plane.normal.tolist(), "anchor": truth.plane.anchor.tolist()},
        "body_center_camera": center_cam.tolist(),
        "head_direction_camera": truth.head_direction_camera().tolist(),
        "camera_pose": {"rotation": truth.rotation.tolist(), "center": truth.camera_center.tolist()},
        "point_count": len(cloud),
        "body_point_count": int(np.count_nonzero(truth.labels == 1)),
        "body_mask": {
            "cell_size": mask.cell_size,
            "origin": list(mask.origin),
            "width": mask.width,
            "height": mask.height,
            "cells": [[int(r), int(c)] for r, c in zip(rows, cols)],
        },
    }


def _cmd_synth(args):
    catalog = scenario_catalog(noise_sigma=args.noise, seed=args.seed)
    os.makedirs(args.out_dir, exist_ok=True)
    io.write_pgm(body_template(args.cell_size), os.path.join(args.out_dir, "template.pgm"))
    for i in args.scenario:
        sc = catalog[i - 1]
        cloud, truth = make_scene(sc)
        target = os.path.join(args.out_dir, sc.name)
        os.makedirs(target, exist_ok=True)
        io.write_pcd(cloud, os.path.join(target, "scene.pcd"))
        io.write_json(_truth_dict(sc, cloud, truth), os.path.join(target, "truth.json"))
        print(f"{sc.name}: pitch {sc.camera_pitch:g} yaw {sc.body_yaw:g} -> {len(cloud)} points in {target}")
    return 0


def _cmd_eval(args):
    report = run_eval(args.scenario, noise_sigma=args.noise)
    for r in report.results:
        if r.error:
            print(f"{r.name}  pitch {r.camera_pitch:4g}  yaw {r.body_yaw:5g}  ERROR {r.error}")
            continue
        status = "HIT " if r.hit else "MISS"
        score = "-" if r.score is None else f"{r.score:.3f}"
        cerr = "-" if r.center_error is None else f"{r.center_error:.3f} m"
        aerr = "-" if r.angle_error is None else f"{r.angle_error:.1f} deg"
        print(f"{r.name}  pitch {r.camera_pitch:4g}  yaw {r.body_yaw:5g}  {status}  "
              f"score {score}  center err {cerr}  angle err {aerr}")
    print(f"detected {report.summary}")
    if args.report:
        io.write_json(report.to_dict(), args.report)
    return 0


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return {"detect": _cmd_detect, "synth": _cmd_synth, "eval": _cmd_eval}[args.command](args)
    except GPPCError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
