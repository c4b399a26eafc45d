"""Command line entry point: trace scenes, run the check suite, print the version.

Exit codes: 0 success, 1 scene error, 2 numeric failure, 3 check-suite failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .emit import emit_csv, emit_svg
from .fronts import propagate_fan
from .scenefile import SceneError, SceneFile, parse_scene


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reebtrace",
                                     description="Ray and wavefront tracer for conformal optical media")
    sub = parser.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("trace", help="trace a scene file and write rays/fronts/figure")
    tr.add_argument("--scene", required=True, help="scene JSON file")
    tr.add_argument("--out", required=True, help="output directory (created if missing)")
    tr.add_argument("--format", default="csv,svg", help="comma list of outputs: csv,svg")
    tr.add_argument("--threads", type=int, default=1, help="ray tracing worker threads")
    tr.add_argument("--tir-mode", choices=["terminate", "reflect"], default=None,
                    help="override the scene's total-internal-reflection handling")
    tr.add_argument("--projection", choices=["chart", "poincare-disc"], default=None,
                    help="override the scene's plotting projection")

    ck = sub.add_parser("check", help="run the seeded invariant battery")
    ck.add_argument("--seed", type=int, default=0)
    ck.add_argument("--samples", type=int, default=1000)

    sub.add_parser("version", help="print the package version")
    return parser


def _run_trace(args) -> int:
    try:
        scene_file = parse_scene(Path(args.scene).read_bytes())
    except OSError as e:
        print(f"scene error: {e}", file=sys.stderr)
        return 1
    except SceneError as e:
        print(f"scene error: {e}", file=sys.stderr)
        return 1

    if args.tir_mode:
        scene_file = SceneFile(**{**scene_file.__dict__, "tir_mode": args.tir_mode})
    if args.projection:
        if args.projection == "poincare-disc" and not scene_file.geometry.hyperbolic:
            print("scene error: projection: poincare-disc projection requires the hyperbolic geometry",
                  file=sys.stderr)
            return 1
        scene_file = SceneFile(**{**scene_file.__dict__, "projection": args.projection})

    formats = [f.strip() for f in args.format.split(",") if f.strip()]
    unknown = [f for f in formats if f not in ("csv", "svg")]
    if unknown:
        print(f"scene error: unknown output format(s) {unknown}", file=sys.stderr)
        return 1

    try:
        rays, fronts = propagate_fan(
            scene_file.scene, scene_file.fan, scene_file.t_max, scene_file.dt,
            scene_file.resolved_front_times(), tir_mode=scene_file.tir_mode,
            workers=max(1, args.threads),
        )
    except (ValueError, OverflowError, RuntimeError) as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return 2

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if "csv" in formats:
        rays_csv, fronts_csv = emit_csv(rays, fronts)
        (out / "rays.csv").write_bytes(rays_csv)
        (out / "fronts.csv").write_bytes(fronts_csv)
    if "svg" in formats:
        (out / "figure.svg").write_bytes(emit_svg(scene_file, rays, fronts))

    n_events = sum(len(r.events) for r in rays)
    print(f"traced {len(rays)} rays ({n_events} interface events), "
          f"{len(fronts)} fronts -> {out}")
    return 0


def _run_check(args) -> int:
    from .checks import run_checks

    try:
        report = run_checks(seed=args.seed, samples=args.samples)
    except ValueError as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return 2
    print(report.to_text())
    if report.all_pass:
        print(f"all {len(report.records)} checks passed (seed={args.seed})")
        return 0
    failed = sum(1 for r in report.records if not r.passed)
    print(f"{failed} of {len(report.records)} checks FAILED (seed={args.seed})", file=sys.stderr)
    return 3


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "trace":
        return _run_trace(args)
    if args.command == "check":
        return _run_check(args)
    print(f"reebtrace {__version__}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
