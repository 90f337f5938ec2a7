"""Command line front end: ``run``, ``theory`` and ``simulate``."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import os
import sys
from contextlib import contextmanager
from typing import Iterator, List, Optional, Sequence, TextIO

import numpy as np

from .config import ConfigError, load_config
from .geometry import StereoRig, GeometryError, depth_bounds, disparity_for_distance
from .localization import write_estimates_csv, write_stats_csv
from .pipeline import run_pipeline
from .synth import generate_streams, load_scene, write_ground_truth
from .thermal import FrameFormatError, read_stream, write_stream

log = logging.getLogger("thermostereo")

THEORY_COLUMNS = ("baseline", "z", "disparity", "z_min", "z_max")


def _setup_logging() -> None:
    level = os.environ.get("THERMOSTEREO_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


@contextmanager
def _open_out(path: Optional[str]) -> Iterator[TextIO]:
    if path is None or path == "-":
        yield sys.stdout
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        yield fh


def theory_rows(rig: StereoRig, z_values: Sequence[float], baselines: Sequence[float]) -> List[tuple]:
    rows = []
    for b in baselines:
        r = dataclasses.replace(rig, baseline=b)
        for z in z_values:
            bounds = depth_bounds(r, z)
            rows.append((b, z, disparity_for_distance(r, z), bounds.nearest, bounds.farthest))
    return rows


def cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    out_estimates = args.out_estimates or config.out_estimates
    out_stats = args.out_stats or config.out_stats
    if out_estimates is None or out_stats is None:
        raise ConfigError("run needs --out-estimates and --out-stats (or the matching config keys)")
    left = read_stream(args.left)
    right = read_stream(args.right)
    for frames, camera in ((left, "left"), (right, "right")):
        wrong = [f for f in frames if f.camera_id != camera]
        if wrong:
            raise FrameFormatError(f"{camera} stream contains a {wrong[0].camera_id!r} frame at t={wrong[0].timestamp}")
    output = run_pipeline(left, right, config)
    with _open_out(out_estimates) as fh:
        write_estimates_csv(fh, output.estimates)
    with _open_out(out_stats) as fh:
        write_stats_csv(fh, output.stats)
    return 0


def cmd_theory(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    if not 0 < args.z_min <= args.z_max or args.z_step <= 0:
        raise ConfigError("theory needs 0 < --z-min <= --z-max and --z-step > 0")
    count = int(np.floor((args.z_max - args.z_min) / args.z_step + 1e-9)) + 1
    z_values = [args.z_min + i * args.z_step for i in range(count)]
    baselines = args.baselines or [config.rig.baseline]
    with _open_out(args.out) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(THEORY_COLUMNS)
        for row in theory_rows(config.rig, z_values, baselines):
            writer.writerow([f"{v:.6f}" for v in row])
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    scene = load_scene(args.scene)
    if args.seed is not None:
        scene = dataclasses.replace(scene, rng_seed=args.seed)
    left, right = generate_streams(scene)
    write_stream(args.out_left, left)
    write_stream(args.out_right, right)
    if args.out_truth:
        with _open_out(args.out_truth) as fh:
            write_ground_truth(fh, scene)
    log.info("wrote %d left and %d right frames", len(left), len(right))
    return 0


def _float_list(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thermostereo", description="Stereo thermal target localization")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="localize heat sources in recorded left/right frame streams")
    run.add_argument("--config", help="pipeline config JSON")
    run.add_argument("--left", required=True, help="left camera NDJSON frame stream")
    run.add_argument("--right", required=True, help="right camera NDJSON frame stream")
    run.add_argument("--out-estimates", help="per-estimate CSV output")
    run.add_argument("--out-stats", help="window statistics CSV output")
    run.set_defaults(func=cmd_run)

    theory = sub.add_parser("theory", help="tabulate disparity and +-1 px depth bounds")
    theory.add_argument("--config", help="pipeline config JSON (only the rig is used)")
    theory.add_argument("--z-min", type=float, default=0.5)
    theory.add_argument("--z-max", type=float, default=10.0)
    theory.add_argument("--z-step", type=float, default=0.5)
    theory.add_argument("--baselines", type=_float_list, help="comma-separated baselines in meters")
    theory.add_argument("--out", help="CSV output (default stdout)")
    theory.set_defaults(func=cmd_theory)

    sim = sub.add_parser("simulate", help="render a synthetic scene into frame streams")
    sim.add_argument("--scene", required=True, help="scene JSON")
    sim.add_argument("--seed", type=int, help="override the scene's rng_seed")
    sim.add_argument("--out-left", required=True)
    sim.add_argument("--out-right", required=True)
    sim.add_argument("--out-truth", help="ground truth CSV")
    sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FrameFormatError, GeometryError) as exc:
        print(f"thermostereo {args.command}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"thermostereo {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
