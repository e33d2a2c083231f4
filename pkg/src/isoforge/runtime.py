"""Tree-walking interpreter with statement/branch coverage, simulated environment
primitives, uninitialized objects and a scripted choice oracle."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Union

from .semantics import IntrinsicRef, LocalRef, MemberRef, SymbolTable, TypeNameRef, resolve
from .syntax import (
    STATEMENT_KINDS, AstNode, Program, class_members, invocation_parts, method_body,
    method_params,
)

DEFAULT_BUDGET = 100_000

ENV_PRIMITIVES = {"Sys.dbQuery": "db.query", "Sys.netSend": "net.send", "Sys.fsRead": "fs.read"}
PERMISSIVE_DEFAULTS = {"db.query": 0, "net.send": True, "fs.read": ""}

_INT_MASK = (1 << 64) - 1


def wrap64(v: int) -> int:
    v &= _INT_MASK
    return v - (1 << 64) if v >> 63 else v


# --- values -----------------------------------------------------------------------

@dataclass(eq=False)
class Obj:
    object_id: int
    type_name: str
    fields: dict
    initialized: bool = True
    ctor_args: tuple = ()

    def __repr__(self):
        state = "" if self.initialized else " uninitialized"
        return f"<{self.type_name}#{self.object_id}{state}>"


Value = Union[int, bool, str, None, Obj]


def default_value(type_name: str) -> Value:
    if type_name in ("int", "long"):
        return 0
    if type_name == "bool":
        return False
    if type_name == "string":
        return ""
    return None


def value_to_json(v: Value):
    if isinstance(v, Obj):
        return {"object": v.type_name, "initialized": v.initialized}
    return v


def format_value(v: Value) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


# --- outcomes and faults ------------------------------------------------------------

OUTCOME_KINDS = ("Returned", "Threw", "EnvFault", "RuntimeFault", "ChoiceExhausted",
                 "StepBudgetExceeded")


@dataclass(frozen=True)
class ExecOutcome:
    kind: str
    detail: object = None     # returned value (JSON form), message, fault kind or label

    def __post_init__(self):
        if self.kind not in OUTCOME_KINDS:
            raise ValueError(f"unknown outcome kind {self.kind!r}")

    def to_json(self) -> dict:
        return {"kind": self.kind, "detail": self.detail}

    @classmethod
    def from_json(cls, data: dict) -> "ExecOutcome":
        return cls(data["kind"], data.get("detail"))

    def __str__(self):
        return f"{self.kind}({json.dumps(self.detail)})"


class Fault(Exception):
    kind = "RuntimeFault"

    def __init__(self, detail):
        self.detail = detail
        super().__init__(f"{self.kind}: {detail}")


class EnvFault(Fault):
    kind = "EnvFault"


class RuntimeFault(Fault):
    kind = "RuntimeFault"


class ChoiceExhausted(Fault):
    kind = "ChoiceExhausted"

    def __init__(self, label: str, value_type: str):
        self.label = label
        self.value_type = value_type
        super().__init__(label)


class StepBudgetExceeded(Fault):
    kind = "StepBudgetExceeded"


class _Thrown(Exception):
    def __init__(self, message: str):
        self.message = message


class _Return(Exception):
    def __init__(self, value):
        self.value = value


# --- oracle, log, coverage ------------------------------------------------------------

@dataclass
class ChoiceOracle:
    script: dict = field(default_factory=dict)     # label -> ordered values
    log: list = field(default_factory=list)        # (label, value) in consumption order

    def __post_init__(self):
        self._cursor = {}

    def consume(self, label: str, value_type: str) -> Value:
        queue = self.script.get(label, [])
        i = self._cursor.get(label, 0)
        if i >= len(queue):
            raise ChoiceExhausted(label, value_type)
        self._cursor[label] = i + 1
        value = queue[i]
        self.log.append((label, value))
        return value

    def to_json(self) -> str:
        return json.dumps(self.script, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ChoiceOracle":
        return cls({k: list(v) for k, v in json.loads(text).items()})


@dataclass
class SideEffectLog:
    entries: list = field(default_factory=list)    # (primitive, args)

    def append(self, primitive: str, args: tuple):
        self.entries.append((primitive, tuple(args)))

    def __len__(self):
        return len(self.entries)


def simulate_environment(primitive: str, args: tuple, mode: str = "hostile",
                         log: Optional[SideEffectLog] = None) -> Value:
    """Simulated real-world dependency: hostile mode always faults, permissive
    mode returns a fixed stub value. Every call is logged."""
    if primitive not in PERMISSIVE_DEFAULTS:
        raise ValueError(f"unknown environment primitive {primitive!r}")
    if log is not None:
        log.append(primitive, args)
    if mode == "hostile":
        raise EnvFault(primitive.split(".")[0])
    if mode == "permissive":
        return PERMISSIVE_DEFAULTS[primitive]
    raise ValueError(f"unknown environment mode {mode!r}")


@dataclass
class MethodCoverage:
    statements: frozenset            # instrumented statement node ids
    branches: frozenset              # instrumented If node ids
    statements_hit: set = field(default_factory=set)
    branch_edges_hit: set = field(default_factory=set)   # (if node id, taken)
    entries: int = 0

    @property
    def statements_total(self) -> int:
        return len(self.statements)

    @property
    def branches_total(self) -> int:
        return 2 * len(self.branches)

    def snapshot(self) -> dict:
        return {"statements": sorted(self.statements_hit),
                "branches": sorted([i, bool(d)] for i, d in self.branch_edges_hit),
                "entered": self.entries > 0}


class UnknownMethod(KeyError):
    pass


@dataclass
class CoverageMap:
    methods: dict = field(default_factory=dict)    # qualified name -> MethodCoverage

    def merge(self, other: "CoverageMap"):
        for name, cov in other.methods.items():
            mine = self.methods.get(name)
            if mine is None:
                mine = self.methods[name] = MethodCoverage(cov.statements, cov.branches)
            mine.statements_hit |= cov.statements_hit
            mine.branch_edges_hit |= cov.branch_edges_hit
            mine.entries += cov.entries


def percent(hit: int, total: int) -> float:
    return 100.0 * hit / total if total else 0.0


def coverage(cmap: CoverageMap, method: str) -> tuple[float, float]:
    """(statement %, branch %) for one method; branchless methods count 100% once entered."""
    cov = cmap.methods.get(method)
    if cov is None:
        raise UnknownMethod(method)
    sc = percent(len(cov.statements_hit), cov.statements_total)
    if cov.branches_total == 0:
        bc = 100.0 if cov.entries else 0.0
    else:
        bc = percent(len(cov.branch_edges_hit), cov.branches_total)
    if cov.statements_total == 0:
        sc = 100.0 if cov.entries else 0.0
    return sc, bc


def snapshot_coverage(snap: dict, statements_total: int, branches_total: int) -> tuple[float, float]:
    sc = percent(len(snap["statements"]), statements_total)
    bc = percent(len(snap["branches"]), branches_total)
    if statements_total == 0:
        sc = 100.0 if snap["entered"] else 0.0
    if branches_total == 0:
        bc = 100.0 if snap["entered"] else 0.0
    return sc, bc


# --- executable program ------------------------------------------------------------

def _instrumentation(decl: AstNode) -> tuple[frozenset, frozenset]:
    body = method_body(decl)
    if body is None:
        return frozenset(), frozenset()
    stmts = frozenset(n.node_id for n in body.walk() if n.kind in STATEMENT_KINDS)
    ifs = frozenset(n.node_id for n in body.walk() if n.kind == "If")
    return stmts, ifs


class Executable:
    """A resolved program plus per-method instrumentation, reusable across runs."""

    def __init__(self, program: Program, table: Optional[SymbolTable] = None):
        self.program = program
        self.table = table if table is not None else resolve(program)
        self.instrumented = {}
        for cname, cls in self.table.classes.items():
            for m in class_members(cls):
                if m.kind in ("MethodDecl", "CtorDecl") and method_body(m) is not None:
                    self.instrumented[f"{cname}.{m.text}"] = _instrumentation(m)

    def fresh_coverage(self) -> CoverageMap:
        return CoverageMap({name: MethodCoverage(s, b)
                            for name, (s, b) in self.instrumented.items()})

    def method(self, qualified: str) -> AstNode:
        return self.table.method_node(qualified)

    def method_totals(self, qualified: str) -> tuple[int, int]:
        s, b = self.instrumented[qualified]
        return len(s), 2 * len(b)


def as_executable(program) -> Executable:
    return program if isinstance(program, Executable) else Executable(program)


# --- interpreter -------------------------------------------------------------------

class Interpreter:
    def __init__(self, exe: Executable, oracle: Optional[ChoiceOracle] = None,
                 env_mode: str = "hostile", budget: int = DEFAULT_BUDGET):
        self.exe = exe
        self.t = exe.table
        self.oracle = oracle if oracle is not None else ChoiceOracle()
        self.env_mode = env_mode
        self.budget = budget
        self.steps = 0
        self.cov = exe.fresh_coverage()
        self.log = SideEffectLog()
        self.statics: dict = {}
        self.next_id = 1
        self.fake: Optional[Obj] = None
        self.isolated_receivers: list = []

    # -- objects

    def allocate(self, type_name: str, initialized: bool, ctor_args=()) -> Obj:
        fields = {}
        for c in reversed(self.t.supertypes(type_name)):
            for m in self.t.types[c].members:
                if m.kind == "field" and not m.is_static:
                    fields[m.name] = default_value(m.return_type)
        obj = Obj(self.next_id, type_name, fields, initialized, tuple(ctor_args))
        self.next_id += 1
        return obj

    def construct(self, type_name: str, args: list) -> Obj:
        obj = self.allocate(type_name, True, args)
        ctor = self.t.ctor_decl(type_name)
        if ctor is not None:
            self.invoke(ctor, type_name, obj, args)
        return obj

    def static_fields(self, cls: str) -> dict:
        store = self.statics.get(cls)
        if store is None:
            store = self.statics[cls] = {
                m.name: default_value(m.return_type)
                for m in self.t.types[cls].members if m.kind == "field" and m.is_static}
        return store

    # -- execution

    def tick(self):
        self.steps += 1
        if self.steps > self.budget:
            raise StepBudgetExceeded(self.budget)

    def invoke(self, decl: AstNode, cls: str, this: Optional[Obj], args: list) -> Value:
        if "native" in decl.flags:
            return self.native(f"{cls}.{decl.text}", args)
        qualified = f"{cls}.{decl.text}"
        cov = self.cov.methods.get(qualified)
        if cov is not None:
            cov.entries += 1
        frame = {p.text: a for p, a in zip(method_params(decl), args)}
        try:
            self.block(method_body(decl), frame, this, cls, cov)
        except _Return as r:
            return r.value
        if decl.kind == "MethodDecl" and decl.children[0].text != "void":
            raise RuntimeFault("missing-return")
        return None

    def native(self, qualified: str, args: list) -> Value:
        primitive = ENV_PRIMITIVES.get(qualified)
        if primitive is not None:
            return simulate_environment(primitive, tuple(args), self.env_mode, self.log)
        if qualified == "Env.isolate":
            return self.isolate(args[0])
        if qualified == "Env.allocate":
            name = args[0]
            if name not in self.t.classes:
                raise RuntimeFault("unknown-type")
            return self.allocate(name, False)
        for vtype, name in (("int", "chooseInt"), ("long", "chooseLong"),
                            ("bool", "chooseBool"), ("string", "chooseString")):
            if qualified == f"Env.{name}":
                return self.oracle.consume(args[0], vtype)
        raise RuntimeFault(f"unbound-native {qualified}")

    def isolate(self, receiver: Value) -> Obj:
        if self.fake is None:
            self.fake = self.allocate("Fake", True)
        self.isolated_receivers.append(receiver.object_id if isinstance(receiver, Obj) else None)
        return self.fake

    def block(self, blk: AstNode, frame: dict, this, cls: str, cov):
        for s in blk.children:
            self.stmt(s, frame, this, cls, cov)

    def stmt(self, s: AstNode, frame: dict, this, cls: str, cov):
        self.tick()
        if cov is not None:
            cov.statements_hit.add(s.node_id)
        k = s.kind
        if k == "If":
            cond = self.eval(s.children[0], frame, this, cls)
            if cov is not None:
                cov.branch_edges_hit.add((s.node_id, bool(cond)))
            if cond:
                self.block(s.children[1], frame, this, cls, cov)
            elif len(s.children) > 2:
                self.block(s.children[2], frame, this, cls, cov)
        elif k == "Return":
            value = self.eval(s.children[0], frame, this, cls) if s.children else None
            raise _Return(value)
        elif k == "Throw":
            raise _Thrown(self.eval(s.children[0], frame, this, cls))
        elif k == "LocalDecl":
            if len(s.children) > 1:
                frame[s.text] = self.eval(s.children[1], frame, this, cls)
            else:
                frame[s.text] = default_value(s.children[0].text)
        elif k == "Assign":
            self.assign(s.children[0], self.eval(s.children[1], frame, this, cls),
                        frame, this, cls)
        elif k == "ExprStmt":
            self.eval(s.children[0], frame, this, cls)
        else:
            raise RuntimeFault(f"bad-statement {k}")

    def assign(self, target: AstNode, value, frame, this, cls):
        ref = self.t.refs.get(target)
        if isinstance(ref, LocalRef):
            frame[target.text] = value
        elif isinstance(ref, MemberRef):
            if ref.member.is_static:
                self.static_fields(ref.container.name)[ref.member.name] = value
            else:
                obj = this if ref.implicit else self.eval(target.children[0], frame, this, cls)
                self.deref(obj).fields[ref.member.name] = value
        else:
            raise RuntimeFault("bad-assignment")

    def deref(self, obj) -> Obj:
        if obj is None:
            raise RuntimeFault("null-dereference")
        return obj

    def eval(self, e: AstNode, frame: dict, this, cls: str) -> Value:
        self.tick()
        k = e.kind
        if k == "Literal":
            text = e.text
            if text == "true":
                return True
            if text == "false":
                return False
            if text == "null":
                return None
            if text.startswith('"'):
                return json.loads(text)
            return int(text)
        if k == "Identifier":
            if e.text == "this":
                return this
            ref = self.t.refs.get(e)
            if isinstance(ref, LocalRef):
                return frame[e.text]
            if isinstance(ref, MemberRef):
                if ref.member.is_static:
                    return self.static_fields(ref.container.name)[ref.member.name]
                return self.deref(this).fields[ref.member.name]
            raise RuntimeFault(f"unresolved {e.text}")
        if k == "MemberAccess":
            ref = self.t.refs.get(e)
            if ref.member.is_static:
                return self.static_fields(ref.container.name)[ref.member.name]
            obj = self.deref(self.eval(e.children[0], frame, this, cls))
            return obj.fields[ref.member.name]
        if k == "Invocation":
            return self.call(e, frame, this, cls)
        if k == "ObjectCreation":
            args = [self.eval(a, frame, this, cls) for a in e.children[1:]]
            return self.construct(e.children[0].text, args)
        if k == "BinaryOp":
            return self.binary(e, frame, this, cls)
        if k == "UnaryOp":
            v = self.eval(e.children[0], frame, this, cls)
            ref = self.t.refs.get(e)
            if isinstance(v, Obj) and not v.initialized:
                raise RuntimeFault("operator-on-uninitialized")
            if isinstance(ref, MemberRef):
                return self.invoke(self.t.method_decl(ref.container.name, ref.member.name),
                                   ref.container.name, None, [v])
            if e.text == "!":
                return not v
            return wrap64(-v)
        raise RuntimeFault(f"bad-expression {k}")

    def call(self, e: AstNode, frame, this, cls) -> Value:
        ref = self.t.refs.get(e)
        callee, _, arg_nodes = invocation_parts(e)
        if isinstance(ref, IntrinsicRef):
            if ref.name == "isolate":
                return self.isolate(self.eval(callee.children[0], frame, this, cls))
            args = [self.eval(a, frame, this, cls) for a in arg_nodes]
            if ref.name == "allocate":
                return self.allocate(ref.type_arg, False, args)
            return self.oracle.consume(args[0], ref.type_arg)
        if not isinstance(ref, MemberRef):
            raise RuntimeFault("unresolved-call")
        sig = ref.member
        if sig.is_static:
            args = [self.eval(a, frame, this, cls) for a in arg_nodes]
            decl = self.t.method_decl(ref.container.name, sig.name)
            return self.invoke(decl, ref.container.name, None, args)
        if ref.implicit:
            receiver = this
        else:
            receiver = self.eval(callee.children[0], frame, this, cls)
        args = [self.eval(a, frame, this, cls) for a in arg_nodes]
        obj = self.deref(receiver)
        if not obj.initialized:
            raise RuntimeFault("uninitialized-dispatch")
        for c in self.t.supertypes(obj.type_name):
            decl = self.t.method_decl(c, sig.name)
            if decl is not None:
                owner = next(x for x in self.t.supertypes(c)
                             if any(m is decl for m in class_members(self.t.classes[x])))
                return self.invoke(decl, owner, obj, args)
        raise RuntimeFault("missing-method")

    def binary(self, e: AstNode, frame, this, cls) -> Value:
        op = e.text
        if op in ("&&", "||"):
            left = self.eval(e.children[0], frame, this, cls)
            if op == "&&" and not left:
                return False
            if op == "||" and left:
                return True
            return bool(self.eval(e.children[1], frame, this, cls))
        a = self.eval(e.children[0], frame, this, cls)
        b = self.eval(e.children[1], frame, this, cls)
        uninit = any(isinstance(v, Obj) and not v.initialized for v in (a, b))
        if uninit:
            if op == "==":
                return a is b
            if op == "!=":
                return a is not b
            raise RuntimeFault("operator-on-uninitialized")
        ref = self.t.refs.get(e)
        if isinstance(ref, MemberRef):
            decl = self.t.method_decl(ref.container.name, ref.member.name)
            return self.invoke(decl, ref.container.name, None, [a, b])
        if op == "==":
            return a is b if isinstance(a, Obj) or isinstance(b, Obj) else a == b
        if op == "!=":
            return a is not b if isinstance(a, Obj) or isinstance(b, Obj) else a != b
        if op == "+" and (isinstance(a, str) or isinstance(b, str)):
            return format_value(a) + format_value(b)
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        if op == ">=":
            return a >= b
        if op == "+":
            return wrap64(a + b)
        if op == "-":
            return wrap64(a - b)
        if op == "*":
            return wrap64(a * b)
        if op in ("/", "%"):
            if b == 0:
                raise RuntimeFault("division-by-zero")
            q = abs(a) // abs(b)
            if (a < 0) != (b < 0):
                q = -q
            return wrap64(q) if op == "/" else wrap64(a - q * b)
        raise RuntimeFault(f"bad-operator {op}")


# --- entry point -------------------------------------------------------------------

def value_from_json(v, interp: Interpreter) -> Value:
    if isinstance(v, dict):
        return interp.allocate(v["uninitialized"], False)
    return v


@dataclass
class RunResult:
    outcome: ExecOutcome
    coverage: CoverageMap
    log: SideEffectLog
    pending_choice: Optional[tuple] = None    # (label, value type) when ChoiceExhausted
    oracle_log: list = field(default_factory=list)


def run_entry(program, entry: str, args: list, oracle: Optional[ChoiceOracle] = None,
              budget: int = DEFAULT_BUDGET, env_mode: str = "hostile",
              ctor_args: Optional[list] = None) -> RunResult:
    exe = as_executable(program)
    interp = Interpreter(exe, oracle, env_mode, budget)
    cls, _, _ = entry.partition(".")
    decl = exe.method(entry)
    pending = None
    try:
        this = None
        if "static" not in decl.flags:
            cargs = [value_from_json(a, interp) for a in (ctor_args or [])]
            this = interp.construct(cls, cargs)
        values = [value_from_json(a, interp) for a in args]
        result = interp.invoke(decl, cls, this, values)
        outcome = ExecOutcome("Returned", value_to_json(result))
    except _Thrown as t:
        outcome = ExecOutcome("Threw", t.message)
    except ChoiceExhausted as c:
        outcome = ExecOutcome("ChoiceExhausted", c.label)
        pending = (c.label, c.value_type)
    except Fault as f:
        outcome = ExecOutcome(f.kind, f.detail)
    except RecursionError:
        outcome = ExecOutcome("RuntimeFault", "stack-overflow")
    return RunResult(outcome, interp.cov, interp.log, pending, list(interp.oracle.log))


def execute(program, entry: str, args: list, oracle: Optional[ChoiceOracle] = None,
            budget: int = DEFAULT_BUDGET, env_mode: str = "hostile",
            ctor_args: Optional[list] = None):
    """Run ``entry`` ("Class.method") on JSON-form arguments.

    Arguments are ints, bools, strings, None, or ``{"uninitialized": "Type"}``
    for a fresh uninitialized instance. Instance entries get a receiver built
    with ``ctor_args``. Returns (ExecOutcome, CoverageMap, SideEffectLog).
    """
    r = run_entry(program, entry, args, oracle, budget, env_mode, ctor_args)
    return r.outcome, r.coverage, r.log
