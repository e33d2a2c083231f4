#!/usr/bin/env python3
"""Money-transfer example: generated tests with and without isolation.

Prints one table per arm (plain/hostile, plain/permissive stub, isolated)
in the shape: test id, inputs, oracle choices, outcome.
"""
import argparse

from isoforge.pipeline import CORPUS_DIR, build_isolated, load_project
from isoforge.runtime import Executable
from isoforge.semantics import UnitSpec, resolve
from isoforge.testgen import ExplorationConfig, explore

ENTRY = "Bank.TransferMoney"


def show(title, tests, report):
    print(f"\n{title}: {len(tests)} tests, sc={report.sc:.1f}% bc={report.bc:.1f}%")
    for i, t in enumerate(tests, 1):
        args = ", ".join("null" if a is None else str(a) for a in t.args)
        choices = ", ".join(f"{k.split('_')[0]}={v[0]}" for k, v in t.oracle_script.items())
        print(f"  T{i}  ({args})  {choices or '-':32s} {t.outcome}")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-tests", type=int, default=64)
    args = ap.parse_args(argv)

    program = load_project(CORPUS_DIR)
    table = resolve(program)
    plain = Executable(program, table)
    iso = build_isolated(program, table, UnitSpec.of("Bank"))[2]

    cfg = ExplorationConfig(max_tests=args.max_tests)
    show("original, hostile environment", *explore(plain, ENTRY, cfg))
    show("original, stubbed environment", *explore(
        plain, ENTRY, ExplorationConfig(max_tests=args.max_tests, env_mode="permissive")))
    show("isolated", *explore(iso, ENTRY, cfg, isolated=True))


if __name__ == "__main__":
    main()
