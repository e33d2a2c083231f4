"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Tolerances are pinned in the constants below. Run standalone with
``python3 tests/test_acceptance.py`` to see only the gate lines.
"""
from __future__ import annotations

import random
import sys
import time
from collections import defaultdict

import pytest

from isoforge.fakegen import generate_basic_environment, generate_fake_code
from isoforge.pipeline import (
    CORPUS_DIR, PipelineConfig, build_isolated, entry_methods, load_project, read_manifest,
    run_pipeline,
)
from isoforge.printer import pretty_print
from isoforge.runtime import ChoiceOracle, Executable, run_entry
from isoforge.semantics import UnitSpec, check, resolve
from isoforge.syntax import method_params, param_type
from isoforge.testgen import (
    BoundsExceeded, ExplorationConfig, Infeasible, brute_force_oracle, explore, harvest_literals,
    read_tests, replay,
)
from isoforge.transform import isolate_unit

from conftest import FIXTURES_DIR, GOLDEN_DIR
from test_transform import load_case

BANK = "Bank.TransferMoney"

RUNNING_EXAMPLE_SECONDS = 5.0
TYPECHECK_SECONDS = 10.0
FUZZ_RUNS = 1000
FUZZ_SEED = 20240917
MIN_SC_IMPROVED = 4
MIN_BC_IMPROVED = 2
RATIO_RANGE = (0.1, 10.0)
TIMING_REPEAT = 3
FULL_RUN_SECONDS = 60.0


def gate(capsys, number: int, ok: bool, detail: str):
    with capsys.disabled():
        print(f"\n[criterion {number:2d}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def corpus_ctx():
    program = load_project(CORPUS_DIR)
    table = resolve(program)
    units = read_manifest(CORPUS_DIR / "manifest.json")
    return program, table, units


def corpus_classes(table):
    return sorted(c for c in table.classes if c != "Sys")


# 1 ---------------------------------------------------------------------------------

def test_criterion_01_running_example(capsys, corpus_ctx):
    program, table, _ = corpus_ctx
    t0 = time.perf_counter()
    plain_tests, plain = explore(Executable(program, table), BANK)
    iso_exe = build_isolated(program, table, UnitSpec.of("Bank"))[2]
    iso_tests, iso = explore(iso_exe, BANK, isolated=True)
    elapsed = time.perf_counter() - t0
    plain_kinds = sorted(t.outcome.kind for t in plain_tests)
    iso_outcomes = {(t.outcome.kind, t.outcome.detail) for t in iso_tests}
    want = {("Threw", "Invalid amount to transfer"), ("Threw", "Not enough balance"),
            ("Returned", True), ("Returned", False)}
    ok = (plain_kinds == ["EnvFault", "Threw"] and plain.sc < 50
          and len(iso_tests) == 4 and iso_outcomes == want
          and iso.sc == 100.0 and iso.bc == 100.0 and elapsed < RUNNING_EXAMPLE_SECONDS)
    gate(capsys, 1, ok,
         f"plain {len(plain_tests)} tests {plain_kinds} sc={plain.sc:.1f}; "
         f"isolated {len(iso_tests)} tests sc={iso.sc:.1f} bc={iso.bc:.1f}; {elapsed:.2f}s")


# 2 ---------------------------------------------------------------------------------

def test_criterion_02_manual_stub(capsys, corpus_ctx):
    program, table, _ = corpus_ctx
    exe = Executable(program, table)
    t0 = time.perf_counter()
    tests, report = explore(exe, BANK, ExplorationConfig(env_mode="permissive"))
    elapsed = time.perf_counter() - t0
    one_statement = 100.0 / exe.method_totals(BANK)[0]
    ok = (len(tests) == 2 and all(t.outcome.kind == "Threw" for t in tests)
          and abs(report.sc - 50.0) <= one_statement and elapsed < RUNNING_EXAMPLE_SECONDS)
    gate(capsys, 2, ok, f"{len(tests)} tests {[t.outcome.kind for t in tests]} "
                        f"sc={report.sc:.1f} (50 +/- {one_statement:.1f}); {elapsed:.2f}s")


# 3 ---------------------------------------------------------------------------------

def test_criterion_03_well_typed(capsys, corpus_ctx):
    program, table, _ = corpus_ctx
    t0 = time.perf_counter()
    checked, bad = 0, []
    for name in corpus_classes(table):
        result = isolate_unit(program, table, UnitSpec.of(name))
        if not result.is_success:
            continue
        fakes = generate_fake_code(result.records, table)
        fakes.environment = generate_basic_environment()
        diags = check(program.replace_or_add(result.trees + fakes.trees()))
        checked += 1
        if diags:
            bad.append((name, [str(d) for d in diags]))
    elapsed = time.perf_counter() - t0
    ok = checked > 0 and not bad and elapsed < TYPECHECK_SECONDS
    gate(capsys, 3, ok, f"{checked} classes type-check whole-program, {len(bad)} with "
                        f"diagnostics {bad[:1]}; {elapsed:.2f}s")


# 4 ---------------------------------------------------------------------------------

def _random_value(rng: random.Random, vtype: str, harvested: dict):
    if vtype in ("int", "long"):
        if rng.random() < 0.5:
            return rng.choice(harvested[vtype])
        return rng.randint(-(2 ** 63), 2 ** 63 - 1) if rng.random() < 0.1 else rng.randint(-2000, 2000)
    if vtype == "bool":
        return rng.random() < 0.5
    if vtype == "string":
        return rng.choice(harvested["string"] + ["fast", "zz"])
    return None


def _random_arg(rng, exe, ptype, harvested):
    if ptype in ("int", "long", "bool", "string"):
        return _random_value(rng, ptype, harvested)
    if ptype in exe.table.classes and not exe.table.types[ptype].is_static:
        return rng.choice([None, {"uninitialized": ptype}])
    return None


def test_criterion_04_isolation_soundness(capsys, corpus_ctx):
    program, table, units = corpus_ctx
    rng = random.Random(FUZZ_SEED)
    total = violations = uninit_dispatch = 0
    for unit in units:
        _, fakes, exe, _, _ = build_isolated(program, table, unit)
        if exe is None:
            continue
        labels = fakes.choice_labels
        for entry in entry_methods(table, unit):
            harvested = harvest_literals(exe, entry)
            decl = exe.method(entry)
            ctor = exe.table.ctor_decl(entry.split(".")[0])
            for _ in range(FUZZ_RUNS):
                args = [_random_arg(rng, exe, param_type(p), harvested) for p in method_params(decl)]
                cargs = ([_random_arg(rng, exe, param_type(p), harvested) for p in method_params(ctor)]
                         if ctor is not None and "static" not in decl.flags else [])
                script = {label: [_random_value(rng, vtype, harvested)
                                  for _ in range(rng.randint(0, 3))]
                          for label, vtype in labels}
                r = run_entry(exe, entry, args, ChoiceOracle(script), ctor_args=cargs)
                total += 1
                if len(r.log) or r.outcome.kind == "EnvFault":
                    violations += 1
                uninit_dispatch += r.outcome.detail == "uninitialized-dispatch"
    ok = total > 0 and violations == 0 and uninit_dispatch == 0
    gate(capsys, 4, ok, f"{total} fuzzed runs, {violations} with side effects or EnvFault "
                        f"(uninitialized dispatch faults: {uninit_dispatch})")


# 5 ---------------------------------------------------------------------------------

def test_criterion_05_identity(capsys, corpus_ctx):
    program, table, _ = corpus_ctx
    total = same = 0
    for case_dir in sorted(p.parent for p in GOLDEN_DIR.glob("identity*/case.json")):
        _, prog, tab, unit = load_case(case_dir)
        result = isolate_unit(prog, tab, unit)
        for before, after in zip(prog.trees, result.trees):
            total += 1
            golden = (case_dir / before.file.path).read_text()
            same += (after.structure() == before.structure() and pretty_print(after) == golden)
    for name in corpus_classes(table):
        unit = UnitSpec.of(name)
        result = isolate_unit(program, table, unit)
        if result.records or result.creations:
            continue
        for after in result.trees:
            before = next(t for t in program.trees if t.file.path == after.file.path)
            total += 1
            same += after.structure() == before.structure()
    gate(capsys, 5, total > 0 and same == total, f"{same}/{total} isolation-free trees unchanged")


# 6 ---------------------------------------------------------------------------------

def test_criterion_06_oracle_equivalence(capsys, corpus_ctx):
    program, table, units = corpus_ctx
    plain = Executable(program, table)
    compared, mismatches, skipped = 0, [], 0
    for unit in units:
        iso = build_isolated(program, table, unit)[2]
        for entry in entry_methods(table, unit):
            for exe in (plain, iso):
                if exe is None:
                    continue
                try:
                    oracle = brute_force_oracle(exe, entry)
                except BoundsExceeded:
                    skipped += 1
                    continue
                try:
                    _, rep = explore(exe, entry)
                    got = (rep.sc, rep.bc)
                except Infeasible:
                    got = (0.0, 0.0)
                compared += 1
                if got != (oracle.sc, oracle.bc):
                    mismatches.append((entry, got, (oracle.sc, oracle.bc)))
    gate(capsys, 6, compared > 0 and not mismatches,
         f"{compared} (method, arm) pairs compared, {len(mismatches)} mismatches, "
         f"{skipped} beyond oracle bounds {mismatches[:2]}")


# 7 ---------------------------------------------------------------------------------

@pytest.fixture(scope="module")
def corpus_report():
    t0 = time.perf_counter()
    report = run_pipeline(CORPUS_DIR)
    return report, time.perf_counter() - t0


def test_criterion_07_monotonicity(capsys, corpus_report):
    report, _ = corpus_report
    rows = report.rows
    regress = [r.method for r in rows
               if r.scIso is None or r.scIso < r.scPlain or r.bcIso < r.bcPlain]
    sc_up = sum(1 for r in rows if r.scIso is not None and r.scIso > r.scPlain)
    bc_up = sum(1 for r in rows if r.bcIso is not None and r.bcIso > r.bcPlain)
    ok = (len(rows) >= 12 and not regress
          and sc_up >= MIN_SC_IMPROVED and bc_up >= MIN_BC_IMPROVED)
    gate(capsys, 7, ok, f"{len(rows)} methods, {len(regress)} regressions, "
                        f"{sc_up} strict SC gains (>= {MIN_SC_IMPROVED}), "
                        f"{bc_up} strict BC gains (>= {MIN_BC_IMPROVED})")


# 8 ---------------------------------------------------------------------------------

def test_criterion_08_operator_diagnostic(capsys):
    report = run_pipeline(FIXTURES_DIR / "operator")
    (row,) = report.rows
    diagnosed = any("UnsupportedConstruct" in d and "operator" in d for d in row.diagnostics)
    ok = diagnosed and row.scIso is None and row.scPlain is not None and report.failures == 1
    gate(capsys, 8, ok, f"diagnostics={row.diagnostics[:1]}; isolated arm "
                        f"{'skipped' if row.scIso is None else 'ran'}; plain sc={row.scPlain}")


# 9 ---------------------------------------------------------------------------------

def test_criterion_09_timing(capsys, corpus_report):
    report, full_run = corpus_report
    timed = run_pipeline(CORPUS_DIR, config=PipelineConfig(repeat=TIMING_REPEAT))
    per_class = defaultdict(lambda: [0.0, 0.0])
    for r in timed.rows:
        cls = r.method.split(".")[0]
        per_class[cls][0] = r.tTransform + r.tCodeGen + r.tTypeCheck
        per_class[cls][1] += r.tTestGenIso
    ratios = {c: iso / gen for c, (iso, gen) in per_class.items() if gen > 0}
    lo, hi = RATIO_RANGE
    outside = {c: round(v, 2) for c, v in ratios.items() if not lo <= v <= hi}
    ok = len(ratios) == len(per_class) and not outside and full_run < FULL_RUN_SECONDS
    gate(capsys, 9, ok, f"isolator/testgen ratio per class in [{min(ratios.values()):.2f}, "
                        f"{max(ratios.values()):.2f}] (allowed {lo}-{hi}), outside={outside}; "
                        f"full corpus run {full_run:.2f}s")


# 10 --------------------------------------------------------------------------------

def test_criterion_10_replay(capsys, corpus_ctx, tmp_path):
    program, table, units = corpus_ctx
    report = run_pipeline(CORPUS_DIR, units, PipelineConfig(emit_tests=tmp_path))
    plain = Executable(program, table)
    iso_by_entry = {e: u.isolated for u in report.units for e in u.iso_tests}
    total = mismatched = 0
    for arm in ("plain", "isolated"):
        for path in sorted((tmp_path / arm).glob("*.json")):
            for t in read_tests(path):
                exe = plain if arm == "plain" else iso_by_entry[t.entry]
                outcome, snap = replay(exe, t)
                total += 1
                mismatched += (outcome != t.outcome or snap != t.coverage_delta)
    gate(capsys, 10, total > 0 and mismatched == 0,
         f"{total} emitted tests replayed, {mismatched} mismatches")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
