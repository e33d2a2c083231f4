from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from isoforge.pipeline import build_isolated, entry_methods
from isoforge.runtime import ExecOutcome, Executable
from isoforge.semantics import UnitSpec, resolve
from isoforge.testgen import (
    BoundsExceeded, ExplorationConfig, GeneratedTest, Infeasible, brute_force_oracle, explore,
    harvest_literals, minimize, read_tests, replay, union_coverage, write_tests, _hits,
)

from conftest import program_of

BANK = "Bank.TransferMoney"


@pytest.fixture(scope="module")
def plain(corpus, corpus_table):
    return Executable(corpus, corpus_table)


@pytest.fixture(scope="module")
def iso_bank(corpus, corpus_table):
    return build_isolated(corpus, corpus_table, UnitSpec.of("Bank"))[2]


def kinds(tests):
    return sorted(t.outcome.kind for t in tests)


# --- harvesting ----------------------------------------------------------------------

def test_harvest_transfer_money(plain):
    ints = harvest_literals(plain, BANK)["int"]
    assert {-1, 0, 1} <= set(ints)


def test_harvest_no_literals():
    exe = Executable(program_of("class A { static int f(int x) { return x; } }"))
    h = harvest_literals(exe, "A.f")
    assert h["int"] == [0, 1, -1]
    assert h["bool"] == [True, False]
    assert h["string"] == ["", "x"]


def test_harvest_neighbourhood():
    exe = Executable(program_of("class A { static bool f(int x) { return x == 861; } }"))
    assert {860, 861, 862} <= set(harvest_literals(exe, "A.f")["int"])


def test_harvest_only_comparisons():
    exe = Executable(program_of("class A { static int f(int x) { return x + 40; } }"))
    assert harvest_literals(exe, "A.f")["int"] == [0, 1, -1]


def test_harvest_compared_strings():
    exe = Executable(program_of("class A { static bool f(string s) { return s == \"go\"; } }"))
    assert harvest_literals(exe, "A.f")["string"] == ["", "x", "go"]


# --- running example ----------------------------------------------------------------

def test_plain_arm(plain):
    tests, report = explore(plain, BANK)
    assert kinds(tests) == ["EnvFault", "Threw"]
    assert report.sc < 50 and report.tc == 2


def test_permissive_arm(plain):
    tests, report = explore(plain, BANK, ExplorationConfig(env_mode="permissive"))
    assert kinds(tests) == ["Threw", "Threw"]
    assert report.sc == pytest.approx(50.0)


def test_isolated_arm(iso_bank):
    tests, report = explore(iso_bank, BANK, isolated=True)
    outcomes = {(t.outcome.kind, t.outcome.detail) for t in tests}
    assert outcomes == {("Threw", "Invalid amount to transfer"), ("Threw", "Not enough balance"),
                        ("Returned", True), ("Returned", False)}
    assert len(tests) == 4
    assert (report.sc, report.bc) == (100.0, 100.0)
    assert report.side_effects == []


def test_branchless_method():
    exe = Executable(program_of("class A { static int f(int x) { return x * 2; } }"))
    tests, report = explore(exe, "A.f")
    assert len(tests) == 1 and (report.sc, report.bc) == (100.0, 100.0)


def test_bool_choice_oracle():
    src = """
    class Flag { bool on() { return Sys.netSend("q"); } }
    class A {
        static int f(Flag g) {
            if (g.on()) return 1; else return 2;
        }
    }
    """
    program = program_of(src)
    exe = build_isolated(program, resolve(program), UnitSpec.of("A"))[2]
    result = brute_force_oracle(exe, "A.f")
    assert {o for o in result.outcomes if o[0] == "Returned"} == {("Returned", "1"), ("Returned", "2")}
    tests, report = explore(exe, "A.f")
    assert report.sc == 100.0 and len(tests) == 2


def test_infeasible_receiver():
    exe = Executable(program_of(
        "class A { int k; A() { k = Sys.dbQuery(\"boot\"); } int f() { return k; } }"))
    with pytest.raises(Infeasible):
        explore(exe, "A.f")


def test_config_validation():
    with pytest.raises(ValueError):
        ExplorationConfig(max_tests=0)
    with pytest.raises(ValueError):
        ExplorationConfig(time_budget=-1)


def test_max_tests_boundary(iso_bank):
    tests, report = explore(iso_bank, BANK, ExplorationConfig(max_tests=1))
    assert len(tests) == 1
    assert "max-tests" in report.boundaries


def test_choice_depth_boundary(iso_bank):
    tests, report = explore(iso_bank, BANK, ExplorationConfig(max_choice_depth=1))
    assert "max-choice-depth" in report.boundaries
    assert all(sum(len(v) for v in t.oracle_script.values()) <= 1 for t in tests)


def test_step_budget_boundary():
    exe = Executable(program_of(
        "class A { static int f(int n) { if (n > 0) return f(n); return 0; } }"))
    tests, report = explore(exe, "A.f", ExplorationConfig(step_budget=200))
    assert "step-budget" in report.boundaries
    assert all(t.outcome.kind != "StepBudgetExceeded" for t in tests)


def test_oracle_bounds():
    exe = Executable(program_of(
        "class A { static int f(int a, int b, int c, int d, int e) { return a; } }"))
    with pytest.raises(BoundsExceeded):
        brute_force_oracle(exe, "A.f")


# --- corpus-wide properties ----------------------------------------------------------

def _corpus_entries(corpus, table):
    out = []
    for name in sorted(table.classes):
        if name == "Sys":
            continue
        unit = UnitSpec.of(name)
        for entry in entry_methods(table, unit):
            out.append((unit, entry))
    return out


def test_oracle_equivalence_plain(corpus, corpus_table, plain):
    checked = 0
    for _, entry in _corpus_entries(corpus, corpus_table):
        try:
            oracle = brute_force_oracle(plain, entry)
        except BoundsExceeded:
            continue
        try:
            _, report = explore(plain, entry)
            got = (report.sc, report.bc)
        except Infeasible:
            got = (0.0, 0.0)
        assert got == (oracle.sc, oracle.bc), entry
        checked += 1
    assert checked >= 12


def test_minimal_and_replayable(corpus, corpus_table, tmp_path):
    for unit, entry in _corpus_entries(corpus, corpus_table):
        exe = build_isolated(corpus, corpus_table, unit)[2]
        tests, report = explore(exe, entry)
        for i, t in enumerate(tests):
            rest = set().union(*(_hits(o) for j, o in enumerate(tests) if j != i))
            assert not _hits(t) <= rest, (entry, i)
        assert union_coverage(tests, exe, entry) == (report.sc, report.bc)
        path = tmp_path / f"{entry}.json"
        write_tests(tests, path)
        for t in read_tests(path):
            outcome, snap = replay(exe, t)
            assert outcome == t.outcome and snap == t.coverage_delta


def _fake_test(stmts, branches=()):
    return GeneratedTest("A.f", [], {}, ExecOutcome("Returned", 0),
                         {"statements": list(stmts), "branches": [list(b) for b in branches],
                          "entered": True})


@settings(max_examples=80, deadline=None)
@given(st.lists(st.sets(st.integers(0, 8), min_size=1), min_size=1, max_size=8))
def test_minimize_keeps_union_and_every_test_matters(hit_sets):
    tests = [_fake_test(sorted(s)) for s in hit_sets]
    kept = minimize(tests)
    union_before = set().union(*(_hits(t) for t in tests))
    union_after = set().union(*(_hits(t) for t in kept))
    assert union_before == union_after
    for i, t in enumerate(kept):
        rest = set().union(*(_hits(o) for j, o in enumerate(kept) if j != i))
        assert not _hits(t) <= rest


def test_generated_test_json_roundtrip(iso_bank):
    tests, _ = explore(iso_bank, BANK)
    for t in tests:
        again = GeneratedTest.from_json(t.to_json())
        assert again == t
