#!/usr/bin/env python3
"""Rewrite the expected outputs under tests/golden/ from each case.json.

Review the diff by hand before committing; the test suite treats these files
as the reference.
"""
import argparse
import json
import sys
from pathlib import Path

from isoforge.parser import parse_text
from isoforge.pipeline import isolation_sources
from isoforge.semantics import UnitSpec, resolve
from isoforge.syntax import Program

TESTS = Path(__file__).resolve().parents[1] / "tests"


def load_case(case_dir: Path):
    spec = json.loads((case_dir / "case.json").read_text())
    trees = []
    for rel in spec["sources"]:
        path = (TESTS / rel).resolve()
        trees.append(parse_text(path.read_text(), path.name))
    program = Program(trees)
    return spec, program, resolve(program), UnitSpec.of(*spec["unit"])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("cases", nargs="*", help="case directory names (default: all)")
    args = ap.parse_args(argv)
    dirs = sorted(p.parent for p in (TESTS / "golden").glob("*/case.json"))
    if args.cases:
        dirs = [d for d in dirs if d.name in args.cases]
    for d in dirs:
        _, program, table, unit = load_case(d)
        for old in d.glob("*.ul"):
            old.unlink()
        for name, text in isolation_sources(program, table, unit).items():
            (d / name).write_text(text)
        print(f"wrote {d.relative_to(TESTS.parent)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
