#!/usr/bin/env python3
"""Run both arms over the bundled corpus and print a per-method comparison.

Writes results/corpus.csv and results/corpus.json unless --out is given.
"""
import argparse
import time
from pathlib import Path

from isoforge.pipeline import CORPUS_DIR, PipelineConfig, emit_report, run_pipeline, summary_text
from isoforge.testgen import ExplorationConfig


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=3, help="timing repetitions (median)")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--env", choices=["hostile", "permissive"], default="hostile")
    ap.add_argument("--out", type=Path, default=Path("results/corpus.csv"))
    args = ap.parse_args(argv)

    cfg = PipelineConfig(exploration=ExplorationConfig(env_mode=args.env),
                         repeat=args.repeat, jobs=args.jobs)
    t0 = time.perf_counter()
    report = run_pipeline(CORPUS_DIR, config=cfg)
    wall = time.perf_counter() - t0

    print(f"{'method':24s} {'SC plain':>9s} {'SC iso':>7s} {'BC plain':>9s} {'BC iso':>7s} "
          f"{'TC':>5s} {'IM':>3s} {'IMb':>3s} {'iso ms':>7s} {'gen ms':>7s}")
    for r in report.rows:
        iso_ms = 1000 * (r.tTransform + r.tCodeGen + r.tTypeCheck)
        print(f"{r.method:24s} {r.scPlain:9.1f} {r.scIso:7.1f} {r.bcPlain:9.1f} {r.bcIso:7.1f} "
              f"{r.tcPlain:>2d}/{r.tcIso:<2d} {r.iMethods:3d} {r.iMembers:3d} "
              f"{iso_ms:7.2f} {1000 * r.tTestGenIso:7.2f}")
    print()
    print(summary_text(report))
    print(f"wall time {wall:.2f}s for {args.repeat} repetition(s)")
    for p in emit_report(report, args.out):
        print(f"wrote {p}")


if __name__ == "__main__":
    main()
