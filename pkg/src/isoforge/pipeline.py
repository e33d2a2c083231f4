"""End-to-end isolation workflow with per-phase timing and plain-vs-isolated comparison."""
from __future__ import annotations

import csv
import io
import json
import logging
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .fakegen import FakeArtifact, generate_basic_environment, generate_fake_code
from .parser import SyntaxError as ParseError, parse
from .printer import pretty_print
from .runtime import Executable
from .semantics import (
    SymbolTable, UnitSpec, count_accesses, load_manifest, resolve,
)
from .syntax import Program, SourceFile, class_members, method_body
from .testgen import ExplorationConfig, Infeasible, explore, write_tests
from .transform import TransformResult, isolate_unit

log = logging.getLogger(__name__)

REPORT_COLUMNS = [
    "method", "scPlain", "bcPlain", "tcPlain", "scIso", "bcIso", "tcIso",
    "iMethods", "iMembers", "tTransform", "tCodeGen", "tTypeCheck",
    "tTestGenPlain", "tTestGenIso", "boundaries", "diagnostics",
]

CORPUS_DIR = Path(__file__).parent / "corpus"


class ProjectError(Exception):
    """The project could not be read, parsed or resolved."""


@dataclass
class PipelineConfig:
    exploration: ExplorationConfig = field(default_factory=ExplorationConfig)
    run_plain: bool = True
    run_isolated: bool = True
    repeat: int = 1
    jobs: int = 1
    emit_transformed: Optional[Path] = None
    emit_fakes: Optional[Path] = None
    emit_tests: Optional[Path] = None


@dataclass
class MethodRow:
    method: str
    scPlain: Optional[float] = None
    bcPlain: Optional[float] = None
    tcPlain: Optional[int] = None
    scIso: Optional[float] = None
    bcIso: Optional[float] = None
    tcIso: Optional[int] = None
    iMethods: int = 0
    iMembers: int = 0
    tTransform: float = 0.0
    tCodeGen: float = 0.0
    tTypeCheck: float = 0.0
    tTestGenPlain: float = 0.0
    tTestGenIso: float = 0.0
    boundaries: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    sideEffectsPlain: int = 0
    sideEffectsIso: int = 0

    def csv_row(self) -> list:
        out = []
        for col in REPORT_COLUMNS:
            v = getattr(self, col)
            if v is None:
                out.append("")
            elif isinstance(v, list):
                out.append(";".join(v))
            elif isinstance(v, float):
                out.append(f"{v:.6f}" if col.startswith("t") else f"{v:.2f}")
            else:
                out.append(str(v))
        return out

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class UnitResult:
    unit: UnitSpec
    rows: list
    transform: Optional[TransformResult] = None
    fakes: Optional[FakeArtifact] = None
    isolated: Optional[Executable] = None
    plain_tests: dict = field(default_factory=dict)     # entry -> GeneratedTest list
    iso_tests: dict = field(default_factory=dict)
    failed: bool = False


@dataclass
class RunReport:
    rows: list = field(default_factory=list)
    units: list = field(default_factory=list)
    failures: int = 0

    def summary(self) -> dict:
        """Improved/equal/regressed counts over methods where both arms ran."""
        out = {}
        for metric in ("sc", "bc"):
            counts = {"improved": 0, "equal": 0, "regressed": 0}
            for r in self.rows:
                plain = getattr(r, f"{metric}Plain")
                iso = getattr(r, f"{metric}Iso")
                if plain is None or iso is None:
                    continue
                if iso > plain + 1e-9:
                    counts["improved"] += 1
                elif iso < plain - 1e-9:
                    counts["regressed"] += 1
                else:
                    counts["equal"] += 1
            out[metric] = counts
        out["methods"] = len(self.rows)
        out["failedUnits"] = self.failures
        return out


# --- loading -----------------------------------------------------------------------

def load_project(project_dir) -> Program:
    root = Path(project_dir)
    if not root.is_dir():
        raise ProjectError(f"{root}: not a directory")
    trees = []
    for path in sorted(root.rglob("*.ul")):
        rel = path.relative_to(root).as_posix()
        try:
            content = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise ProjectError(f"{path}: {exc}") from exc
        try:
            trees.append(parse(SourceFile(rel, content)))
        except ParseError as exc:
            raise ProjectError(str(exc)) from exc
    return Program(trees)


def read_manifest(path) -> list[UnitSpec]:
    try:
        return load_manifest(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError, KeyError) as exc:
        raise ProjectError(f"{path}: invalid manifest: {exc}") from exc


def entry_methods(table: SymbolTable, unit: UnitSpec) -> list[str]:
    names = []
    for cls in sorted(unit.class_names, key=lambda c: (table.class_files[c], c)):
        for m in class_members(table.classes[cls]):
            if m.kind == "MethodDecl" and method_body(m) is not None:
                names.append(f"{cls}.{m.text}")
    if unit.entry_methods:
        wanted = set(unit.entry_methods)
        names = [n for n in names if n in wanted or n.partition(".")[2] in wanted]
    return names


# --- arms --------------------------------------------------------------------------

def _explore_arm(exe, entry, config: ExplorationConfig, isolated: bool):
    t0 = time.perf_counter()
    try:
        tests, report = explore(exe, entry, config, isolated=isolated)
        sc, bc, tc, bounds, effects = report.sc, report.bc, report.tc, report.boundaries, \
            len(report.side_effects)
    except Infeasible:
        tests, sc, bc, tc, bounds, effects = [], 0.0, 0.0, 0, ["infeasible"], 0
    return tests, sc, bc, tc, bounds, effects, time.perf_counter() - t0


def build_isolated(program: Program, table: SymbolTable, unit: UnitSpec):
    """Transform, generate fakes and type-check; returns timings and artifacts."""
    t0 = time.perf_counter()
    result = isolate_unit(program, table, unit)
    t1 = time.perf_counter()
    fakes = None
    diagnostics = list(result.diagnostics)
    exe = None
    t2 = t3 = t1
    if result.is_success:
        fakes = generate_fake_code(result.records, table)
        fakes.environment = generate_basic_environment()
        t2 = time.perf_counter()
        # only the isolated unit and the declarations it names are re-checked
        iso_program = program.replace_or_add(result.trees + fakes.trees())
        iso_program = iso_program.closure(result.trees + fakes.trees())
        iso_table = resolve(iso_program, strict=False)
        t3 = time.perf_counter()
        if iso_table.diagnostics:
            diagnostics += [f"error: {d}" for d in iso_table.diagnostics]
        else:
            exe = Executable(iso_program, iso_table)
    return result, fakes, exe, diagnostics, (t1 - t0, t2 - t1, t3 - t2)


def process_unit(program: Program, table: SymbolTable, plain: Executable, unit: UnitSpec,
                 config: PipelineConfig) -> UnitResult:
    entries = entry_methods(table, unit)
    rows = {e: MethodRow(e) for e in entries}
    out = UnitResult(unit, [rows[e] for e in entries])
    timings: dict = {e: {"plain": [], "iso": []} for e in entries}
    phase_times = []

    for rep in range(config.repeat):
        if config.run_plain:
            for e in entries:
                tests, sc, bc, tc, bounds, effects, dt = _explore_arm(
                    plain, e, config.exploration, False)
                timings[e]["plain"].append(dt)
                if rep == 0:
                    r = rows[e]
                    r.scPlain, r.bcPlain, r.tcPlain = sc, bc, tc
                    r.boundaries += [f"plain:{b}" for b in bounds]
                    r.sideEffectsPlain = effects
                    out.plain_tests[e] = tests
        if config.run_isolated:
            result, fakes, exe, diagnostics, phases = build_isolated(program, table, unit)
            phase_times.append(phases)
            if rep == 0:
                out.transform, out.fakes, out.isolated = result, fakes, exe
                imethods, imembers = count_accesses(result.records)
                for r in rows.values():
                    r.iMethods, r.iMembers = imethods, imembers
                    r.diagnostics = list(diagnostics)
                if exe is None:
                    out.failed = True
                    log.warning("isolation failed for %s: %s", sorted(unit.class_names),
                                "; ".join(diagnostics))
            if exe is not None:
                for e in entries:
                    tests, sc, bc, tc, bounds, effects, dt = _explore_arm(
                        exe, e, config.exploration, True)
                    timings[e]["iso"].append(dt)
                    if rep == 0:
                        r = rows[e]
                        r.scIso, r.bcIso, r.tcIso = sc, bc, tc
                        r.boundaries += [f"iso:{b}" for b in bounds]
                        r.sideEffectsIso = effects
                        out.iso_tests[e] = tests

    if phase_times:
        med = [statistics.median(p[i] for p in phase_times) for i in range(3)]
        for r in rows.values():
            r.tTransform, r.tCodeGen, r.tTypeCheck = med
    for e, t in timings.items():
        if t["plain"]:
            rows[e].tTestGenPlain = statistics.median(t["plain"])
        if t["iso"]:
            rows[e].tTestGenIso = statistics.median(t["iso"])
    return out


def isolation_sources(program: Program, table: SymbolTable, unit: UnitSpec) -> dict[str, str]:
    """Pretty-printed transformed unit files plus generated fakes, keyed by file name."""
    result, fakes, _, diagnostics, _ = build_isolated(program, table, unit)
    if fakes is None:
        raise ValueError("; ".join(diagnostics))
    out = {Path(t.file.path).name: pretty_print(t) for t in result.trees}
    out.update({t.file.path: pretty_print(t) for t in fakes.trees()})
    return out


def _emit(unit_result: UnitResult, config: PipelineConfig):
    label = "+".join(sorted(unit_result.unit.class_names))
    if config.emit_transformed is not None and unit_result.transform is not None:
        d = Path(config.emit_transformed) / label
        for tree in unit_result.transform.trees:
            target = d / tree.file.path
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(pretty_print(tree), encoding="utf-8")
    if config.emit_fakes is not None and unit_result.fakes is not None:
        d = Path(config.emit_fakes) / label
        d.mkdir(parents=True, exist_ok=True)
        for tree in unit_result.fakes.trees():
            (d / tree.file.path).write_text(pretty_print(tree), encoding="utf-8")
    if config.emit_tests is not None:
        for arm, suites in (("plain", unit_result.plain_tests), ("isolated", unit_result.iso_tests)):
            d = Path(config.emit_tests) / arm
            d.mkdir(parents=True, exist_ok=True)
            for entry, tests in suites.items():
                write_tests(tests, d / f"{entry}.json")


def run_pipeline(project_dir, units: Optional[list[UnitSpec]] = None,
                 config: Optional[PipelineConfig] = None) -> RunReport:
    """Run both arms for every unit in the manifest.

    Per-unit isolation failures are recorded in the rows' diagnostics and
    never abort the run; an unreadable project raises ProjectError.
    """
    config = config or PipelineConfig()
    program = load_project(project_dir)
    if units is None:
        units = read_manifest(Path(project_dir) / "manifest.json")
    try:
        table = resolve(program)
    except Exception as exc:   # SemanticError carries positioned diagnostics
        raise ProjectError(str(exc)) from exc
    for u in units:
        try:
            u.validate(table)
        except Exception as exc:
            raise ProjectError(str(exc)) from exc
    plain = Executable(program, table)

    def work(unit):
        return process_unit(program, table, plain, unit, config)

    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(work, units))
    else:
        results = [work(u) for u in units]

    report = RunReport()
    for res in results:
        report.units.append(res)
        report.rows.extend(res.rows)
        report.failures += int(res.failed)
        _emit(res, config)
    return report


# --- reports -------------------------------------------------------------------------

def report_csv(report: RunReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for r in report.rows:
        writer.writerow(r.csv_row())
    return buf.getvalue()


def report_json(report: RunReport) -> str:
    return json.dumps({"rows": [r.to_json() for r in report.rows],
                       "summary": report.summary()}, indent=2, sort_keys=True) + "\n"


def summary_text(report: RunReport) -> str:
    s = report.summary()
    lines = [f"methods: {s['methods']}  failed units: {s['failedUnits']}"]
    for metric in ("sc", "bc"):
        c = s[metric]
        lines.append(f"{metric.upper()}: improved {c['improved']}, equal {c['equal']}, "
                     f"regressed {c['regressed']}")
    return "\n".join(lines)


def emit_report(report: RunReport, out_csv, fmt: str = "both") -> list[Path]:
    """Write the CSV and/or JSON report; returns written paths."""
    out_csv = Path(out_csv)
    written = []
    try:
        if fmt in ("csv", "both"):
            out_csv.parent.mkdir(parents=True, exist_ok=True)
            out_csv.write_text(report_csv(report), encoding="utf-8")
            written.append(out_csv)
        if fmt in ("json", "both"):
            jpath = out_csv.with_suffix(".json")
            jpath.parent.mkdir(parents=True, exist_ok=True)
            jpath.write_text(report_json(report), encoding="utf-8")
            written.append(jpath)
    except OSError as exc:
        raise OSError(f"{exc.filename or out_csv}: {exc.strerror or exc}") from exc
    return written
