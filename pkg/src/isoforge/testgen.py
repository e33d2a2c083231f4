"""Bounded white-box test generation over entry arguments and choice-oracle values."""
from __future__ import annotations

import itertools
import json
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .runtime import (
    DEFAULT_BUDGET, ChoiceOracle, ExecOutcome, Executable, as_executable, run_entry,
    snapshot_coverage,
)
from .syntax import AstNode, method_body, method_params, param_type

COMPARISONS = frozenset({"<", "<=", ">", ">=", "==", "!="})
BASE_INTS = (0, 1, -1)


class Infeasible(Exception):
    """No generated input reached the entry method."""


class BoundsExceeded(Exception):
    pass


@dataclass
class ExplorationConfig:
    max_tests: int = 64
    max_choice_depth: int = 8
    time_budget: float = 10.0
    max_runs: int = 20_000
    step_budget: int = DEFAULT_BUDGET
    env_mode: str = "hostile"

    def __post_init__(self):
        for name in ("max_tests", "max_choice_depth", "time_budget", "max_runs", "step_budget"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class GeneratedTest:
    entry: str
    args: list
    oracle_script: dict
    outcome: ExecOutcome
    coverage_delta: dict          # hit-set snapshot of the entry method for this test
    ctor_args: list = field(default_factory=list)
    sc: float = 0.0
    bc: float = 0.0

    def to_json(self) -> dict:
        return {"entry": self.entry, "args": self.args, "ctorArgs": self.ctor_args,
                "oracleScript": self.oracle_script, "outcome": self.outcome.to_json(),
                "coverage": self.coverage_delta, "sc": self.sc, "bc": self.bc}

    @classmethod
    def from_json(cls, d: dict) -> "GeneratedTest":
        return cls(d["entry"], d["args"], d["oracleScript"], ExecOutcome.from_json(d["outcome"]),
                   d["coverage"], d.get("ctorArgs", []), d.get("sc", 0.0), d.get("bc", 0.0))


@dataclass
class CoverageReport:
    entry: str
    sc: float
    bc: float
    tests: list
    runs: int = 0
    boundaries: list = field(default_factory=list)
    statements: list = field(default_factory=list)
    branches: list = field(default_factory=list)
    side_effects: list = field(default_factory=list)   # environment calls made while exploring
    isolated: bool = False

    @property
    def tc(self) -> int:
        return len(self.tests)


# --- literal harvesting --------------------------------------------------------------

def _literal_int(node: AstNode) -> Optional[int]:
    if node.kind == "Literal" and node.text.lstrip("-").isdigit():
        return int(node.text)
    return None


def _literal_str(node: AstNode) -> Optional[str]:
    if node.kind == "Literal" and node.text.startswith('"'):
        return json.loads(node.text)
    return None


def _harvest_from(decl: AstNode, ints: list, strings: list):
    body = method_body(decl)
    if body is None:
        return
    for node in body.walk():
        if node.kind == "BinaryOp" and node.text in COMPARISONS:
            for operand in node.children:
                c = _literal_int(operand)
                if c is not None:
                    for v in (c - 1, c, c + 1):
                        if v not in ints:
                            ints.append(v)
                s = _literal_str(operand)
                if s is not None and s not in strings:
                    strings.append(s)


def harvest_literals(program, entry: str) -> dict:
    """Candidate values per primitive type for one entry method.

    Ints: 0, 1, -1, then c-1, c, c+1 for every int literal c compared in the
    method (and, for instance entries, its class's constructor).
    """
    exe = as_executable(program)
    decl = exe.method(entry)
    ints = list(BASE_INTS)
    strings = ["", "x"]
    _harvest_from(decl, ints, strings)
    if "static" not in decl.flags:
        ctor = exe.table.ctor_decl(entry.partition(".")[0])
        if ctor is not None:
            _harvest_from(ctor, ints, strings)
    return {"int": ints, "long": list(ints), "bool": [True, False], "string": strings}


def fresh_int(candidates: list) -> int:
    return max(candidates) + 1


def param_candidates(exe: Executable, type_name: str, harvested: dict) -> list:
    if type_name in harvested:
        return list(harvested[type_name])
    t = exe.table
    if type_name in t.classes and not t.types[type_name].is_static:
        return [None, {"uninitialized": type_name}]
    return [None]


def choice_candidates(value_type: str, harvested: dict) -> list:
    if value_type in ("int", "long"):
        ints = harvested[value_type]
        return list(ints) + [fresh_int(ints)]
    return list(harvested[value_type])


def _arg_space(exe: Executable, entry: str, harvested: dict) -> tuple[list, list]:
    """(candidate lists for ctor args, candidate lists for entry args)."""
    decl = exe.method(entry)
    ctor_space = []
    if "static" not in decl.flags:
        ctor = exe.table.ctor_decl(entry.partition(".")[0])
        if ctor is not None:
            ctor_space = [param_candidates(exe, param_type(p), harvested)
                          for p in method_params(ctor)]
    arg_space = [param_candidates(exe, param_type(p), harvested) for p in method_params(decl)]
    return ctor_space, arg_space


def _script_depth(script: dict) -> int:
    return sum(len(v) for v in script.values())


def _extend(script: dict, label: str, value) -> dict:
    new = {k: list(v) for k, v in script.items()}
    new.setdefault(label, []).append(value)
    return new


# --- coverage-directed search -----------------------------------------------------------

def explore(program, entry: str, config: Optional[ExplorationConfig] = None,
            isolated: bool = False) -> tuple[list, CoverageReport]:
    """Greedy coverage-directed search over argument tuples and oracle choices.

    Argument tuples are enumerated from harvested candidates; for each, choice
    points are expanded breadth-first (bool choices ahead of pending int
    values). A completed run is kept when it adds entry-method coverage; the
    kept suite is then reduced so every test contributes.
    """
    config = config or ExplorationConfig()
    exe = as_executable(program)
    harvested = harvest_literals(exe, entry)
    ctor_space, arg_space = _arg_space(exe, entry, harvested)
    n_ctor = len(ctor_space)
    stmt_total, branch_total = exe.method_totals(entry)

    union_stmts: set = set()
    union_edges: set = set()
    entered = False
    tests: list[GeneratedTest] = []
    boundaries: list[str] = []
    side_effects: list = []
    runs = 0
    started = time.monotonic()

    def full() -> bool:
        return (len(union_stmts) == stmt_total and len(union_edges) == branch_total
                and entered)

    def stop(reason: str) -> bool:
        if reason not in boundaries:
            boundaries.append(reason)
        return True

    halted = False
    for combo in itertools.product(*(ctor_space + arg_space)):
        if halted or full():
            break
        ctor_args, args = list(combo[:n_ctor]), list(combo[n_ctor:])
        queue = deque([{}])
        while queue:
            if runs >= config.max_runs:
                halted = stop("max-runs")
                break
            if time.monotonic() - started > config.time_budget:
                halted = stop("time-budget")
                break
            script = queue.popleft()
            result = run_entry(exe, entry, args, ChoiceOracle({k: list(v) for k, v in script.items()}),
                               config.step_budget, config.env_mode, ctor_args)
            runs += 1
            side_effects.extend(result.log.entries)
            kind = result.outcome.kind
            if kind == "ChoiceExhausted":
                label, vtype = result.pending_choice
                if _script_depth(script) >= config.max_choice_depth:
                    stop("max-choice-depth")
                    continue
                expansions = [_extend(script, label, v)
                              for v in choice_candidates(vtype, harvested)]
                if vtype == "bool":
                    queue.extendleft(reversed(expansions))
                else:
                    queue.extend(expansions)
                continue
            if kind == "StepBudgetExceeded":
                stop("step-budget")
                continue
            cov = result.coverage.methods[entry]
            snap = cov.snapshot()
            new_stmts = cov.statements_hit - union_stmts
            new_edges = cov.branch_edges_hit - union_edges
            newly_entered = cov.entries > 0 and not entered
            if new_stmts or new_edges or newly_entered:
                union_stmts |= cov.statements_hit
                union_edges |= cov.branch_edges_hit
                entered = entered or cov.entries > 0
                sc, bc = snapshot_coverage(snap, stmt_total, branch_total)
                tests.append(GeneratedTest(entry, args, script, result.outcome, snap,
                                           ctor_args, sc, bc))
                if len(tests) >= config.max_tests:
                    halted = stop("max-tests")
                    break
                if full():
                    break

    if not entered:
        raise Infeasible(f"no generated input executed {entry}")
    tests = minimize(tests)
    union = {"statements": sorted(union_stmts), "branches": sorted(union_edges), "entered": entered}
    sc, bc = snapshot_coverage(union, stmt_total, branch_total)
    report = CoverageReport(entry, sc, bc, tests, runs, boundaries,
                            sorted(union_stmts), sorted(union_edges), side_effects, isolated)
    return tests, report


def _hits(test: GeneratedTest) -> set:
    snap = test.coverage_delta
    hits = {("s", s) for s in snap["statements"]}
    hits |= {("b", b, d) for b, d in snap["branches"]}
    if snap["entered"]:
        hits.add(("entered",))
    return hits


def minimize(tests: list[GeneratedTest]) -> list[GeneratedTest]:
    """Drop tests whose hits are covered by the rest of the suite."""
    kept = list(tests)
    i = 0
    while i < len(kept):
        others = set()
        for j, t in enumerate(kept):
            if j != i:
                others |= _hits(t)
        if _hits(kept[i]) <= others:
            del kept[i]
        else:
            i += 1
    return kept


def union_coverage(tests: list[GeneratedTest], program, entry: str) -> tuple[float, float]:
    exe = as_executable(program)
    stmts, edges, entered = set(), set(), False
    for t in tests:
        stmts |= set(t.coverage_delta["statements"])
        edges |= {tuple(b) for b in t.coverage_delta["branches"]}
        entered = entered or t.coverage_delta["entered"]
    return snapshot_coverage({"statements": stmts, "branches": edges, "entered": entered},
                             *exe.method_totals(entry))


# --- exhaustive reference ------------------------------------------------------------

@dataclass
class OracleResult:
    outcomes: set
    sc: float
    bc: float
    runs: int


def brute_force_oracle(program, entry: str, max_choice_depth: int = 8,
                       env_mode: str = "hostile", max_params: int = 4,
                       max_choice_points: int = 6, step_budget: int = DEFAULT_BUDGET) -> OracleResult:
    """Exhaustively run every candidate argument tuple against every choice
    sequence (depth-first) and report the reachable outcomes and the union
    coverage of the entry method."""
    exe = as_executable(program)
    harvested = harvest_literals(exe, entry)
    ctor_space, arg_space = _arg_space(exe, entry, harvested)
    if len(ctor_space) + len(arg_space) > max_params:
        raise BoundsExceeded(f"{entry}: more than {max_params} parameters")
    stmt_total, branch_total = exe.method_totals(entry)
    outcomes = set()
    stmts, edges = set(), set()
    entered = False
    runs = 0

    def dfs(ctor_args, args, script):
        nonlocal entered, runs
        if _script_depth(script) > max_choice_points:
            raise BoundsExceeded(f"{entry}: more than {max_choice_points} choice points")
        result = run_entry(exe, entry, args, ChoiceOracle({k: list(v) for k, v in script.items()}),
                           step_budget, env_mode, ctor_args)
        runs += 1
        if result.outcome.kind == "ChoiceExhausted":
            label, vtype = result.pending_choice
            if _script_depth(script) >= max_choice_depth:
                return
            for v in choice_candidates(vtype, harvested):
                dfs(ctor_args, args, _extend(script, label, v))
            return
        if result.outcome.kind == "StepBudgetExceeded":
            return
        outcomes.add((result.outcome.kind, json.dumps(result.outcome.detail, sort_keys=True)))
        cov = result.coverage.methods[entry]
        stmts.update(cov.statements_hit)
        edges.update(cov.branch_edges_hit)
        entered = entered or cov.entries > 0

    n = len(ctor_space)
    for combo in itertools.product(*(ctor_space + arg_space)):
        dfs(list(combo[:n]), list(combo[n:]), {})
    sc, bc = snapshot_coverage({"statements": stmts, "branches": edges, "entered": entered},
                               stmt_total, branch_total)
    return OracleResult(outcomes, sc, bc, runs)


# --- replay --------------------------------------------------------------------------

def replay(program, test: GeneratedTest, env_mode: str = "hostile",
           step_budget: int = DEFAULT_BUDGET) -> tuple[ExecOutcome, dict]:
    result = run_entry(program, test.entry, test.args,
                       ChoiceOracle({k: list(v) for k, v in test.oracle_script.items()}),
                       step_budget, env_mode, test.ctor_args)
    return result.outcome, result.coverage.methods[test.entry].snapshot()


def write_tests(tests: list[GeneratedTest], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([t.to_json() for t in tests], fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_tests(path) -> list[GeneratedTest]:
    with open(path, encoding="utf-8") as fh:
        return [GeneratedTest.from_json(d) for d in json.load(fh)]
