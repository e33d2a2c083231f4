"""Command line entry point: ``isoforge run <dir> --manifest m.json``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .pipeline import PipelineConfig, ProjectError, emit_report, read_manifest, report_csv, \
    run_pipeline, summary_text
from .testgen import ExplorationConfig


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="isoforge",
                                description="Dependency isolation for white-box test generation")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="generate tests with and without isolation and compare")
    run.add_argument("project", type=Path)
    run.add_argument("--manifest", type=Path, default=None,
                     help="unit manifest (default: <project>/manifest.json)")
    arms = run.add_mutually_exclusive_group()
    arms.add_argument("--isolated-only", action="store_true")
    arms.add_argument("--plain-only", action="store_true")
    run.add_argument("--emit-transformed", type=Path, metavar="DIR")
    run.add_argument("--emit-fakes", type=Path, metavar="DIR")
    run.add_argument("--emit-tests", type=Path, metavar="DIR")
    run.add_argument("--repeat", type=_positive, default=1)
    run.add_argument("--max-tests", type=_positive, default=64)
    run.add_argument("--max-choice-depth", type=_positive, default=8)
    run.add_argument("--time-budget", type=float, default=10.0,
                     help="seconds of exploration per entry method")
    run.add_argument("--jobs", type=_positive, default=1)
    run.add_argument("--env", choices=["hostile", "permissive"], default="hostile",
                     help="behaviour of real-world primitives in un-isolated code")
    run.add_argument("--out", type=Path, default=None, help="CSV report path (JSON written alongside)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.time_budget <= 0:
        print("isoforge: --time-budget must be positive", file=sys.stderr)
        return 1
    config = PipelineConfig(
        exploration=ExplorationConfig(max_tests=args.max_tests,
                                      max_choice_depth=args.max_choice_depth,
                                      time_budget=args.time_budget, env_mode=args.env),
        run_plain=not args.isolated_only,
        run_isolated=not args.plain_only,
        repeat=args.repeat,
        jobs=args.jobs,
        emit_transformed=args.emit_transformed,
        emit_fakes=args.emit_fakes,
        emit_tests=args.emit_tests,
    )
    try:
        manifest = args.manifest or args.project / "manifest.json"
        units = read_manifest(manifest)
        report = run_pipeline(args.project, units, config)
    except ProjectError as exc:
        print(f"isoforge: {exc}", file=sys.stderr)
        return 1
    if args.out is not None:
        try:
            emit_report(report, args.out)
        except OSError as exc:
            print(f"isoforge: cannot write report: {exc}", file=sys.stderr)
            return 1
    else:
        sys.stdout.write(report_csv(report))
    print(summary_text(report), file=sys.stderr)
    return 2 if report.failures else 0


if __name__ == "__main__":
    sys.exit(main())
