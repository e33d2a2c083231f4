"""Name/type resolution and internal-vs-external classification of member accesses."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional

from .parser import parse_text
from .syntax import (
    PRIMITIVE_TYPES, AstNode, Program, SyntaxTree, class_members, class_supertype,
    invocation_parts, method_body, method_params, method_type_params,
)

PRELUDE_PATH = "<prelude>"
PRELUDE_SOURCE = """\
static class Sys {
    native static int dbQuery(string query);
    native static bool netSend(string message);
    native static string fsRead(string path);
}
"""

# operator -> overload method name looked up on class-typed operands
OPERATOR_METHODS = {
    "+": "op_add", "-": "op_sub", "*": "op_mul", "/": "op_div", "%": "op_mod",
    "<": "op_lt", "<=": "op_le", ">": "op_gt", ">=": "op_ge",
    "==": "op_eq", "!=": "op_ne",
}
UNARY_OPERATOR_METHODS = {"-": "op_neg", "!": "op_not"}

CHOOSE_NATIVES = {"int": "chooseInt", "long": "chooseLong", "bool": "chooseBool",
                  "string": "chooseString"}

ANY = "any"      # opaque method type parameter
NULL = "null"


@lru_cache(maxsize=1)
def prelude_tree() -> SyntaxTree:
    return parse_text(PRELUDE_SOURCE, PRELUDE_PATH)


# --- domain types ------------------------------------------------------------

@dataclass(frozen=True)
class MemberSig:
    name: str
    kind: str                          # "method" or "field"
    param_types: tuple = ()
    type_params: tuple = ()
    return_type: str = "void"
    is_static: bool = False
    container: str = ""
    param_names: tuple = ()
    is_native: bool = False


@dataclass(frozen=True)
class TypeInfo:
    name: str
    is_primitive: bool
    is_static: bool = False
    declared_supertype: Optional[str] = None
    members: tuple = ()

    def member(self, name: str) -> Optional[MemberSig]:
        for m in self.members:
            if m.name == name:
                return m
        return None


@dataclass(frozen=True)
class UnitSpec:
    class_names: frozenset
    entry_methods: tuple = ()

    def __post_init__(self):
        if not self.class_names:
            raise ValueError("unit must name at least one class")

    @classmethod
    def of(cls, *names: str, entry_methods: Iterable[str] = ()) -> "UnitSpec":
        return cls(frozenset(names), tuple(entry_methods))

    def validate(self, table: "SymbolTable"):
        missing = sorted(n for n in self.class_names if n not in table.classes)
        if missing:
            raise NameResolutionError([Diagnostic("NameError", f"unit class not found: {n}")
                                       for n in missing])


def load_manifest(text: str) -> list[UnitSpec]:
    """Parse a unit manifest.

    Accepts either a single unit ``{"unit": [...], "entryMethods": [...]}`` or a
    corpus manifest ``{"units": [<unit>, ...]}``.
    """
    data = json.loads(text)
    entries = data["units"] if "units" in data else [data]
    units = []
    for e in entries:
        names = e["unit"]
        if isinstance(names, str):
            names = [names]
        units.append(UnitSpec.of(*names, entry_methods=e.get("entryMethods", ())))
    return units


@dataclass(frozen=True)
class MemberAccessRecord:
    callsite_index: int
    container_type: TypeInfo
    member: MemberSig
    receiver_is_static_type: bool
    type_args: tuple
    node_id: int
    enclosing_method: str
    caller_bases: tuple = ()     # caller class followed by its supertype chain
    node: Optional[AstNode] = field(default=None, compare=False, repr=False)

    @property
    def is_static(self) -> bool:
        return self.member.is_static or self.container_type.is_static


# --- resolution results --------------------------------------------------------

@dataclass(frozen=True)
class LocalRef:
    name: str


@dataclass(frozen=True)
class TypeNameRef:
    name: str


@dataclass(frozen=True)
class MemberRef:
    container: TypeInfo
    member: MemberSig
    receiver_is_type: bool
    implicit: bool = False


@dataclass(frozen=True)
class IntrinsicRef:
    name: str            # "isolate", "allocate" or "choose"
    type_arg: str = ""


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    message: str
    path: str = ""
    line: int = 0
    col: int = 0

    def __str__(self):
        return f"{self.path}:{self.line}:{self.col}: {self.kind}: {self.message}"


class SemanticError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("\n".join(str(d) for d in diagnostics))


class NameResolutionError(SemanticError):
    pass


class TypeCheckError(SemanticError):
    pass


@dataclass(eq=False)
class SymbolTable:
    types: dict = field(default_factory=dict)
    classes: dict = field(default_factory=dict)
    ctors: dict = field(default_factory=dict)
    class_files: dict = field(default_factory=dict)
    expr_types: dict = field(default_factory=dict)
    refs: dict = field(default_factory=dict)
    enclosing: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)

    def supertypes(self, name: str) -> list[str]:
        chain = []
        while name is not None and name in self.types and name not in chain:
            chain.append(name)
            name = self.types[name].declared_supertype
        return chain

    def is_subtype(self, sub: str, sup: str) -> bool:
        return sup in self.supertypes(sub)

    def lookup(self, cls: str, name: str) -> Optional[tuple[TypeInfo, MemberSig]]:
        for c in self.supertypes(cls):
            m = self.types[c].member(name)
            if m is not None:
                return self.types[c], m
        return None

    def method_decl(self, cls: str, name: str) -> Optional[AstNode]:
        for c in self.supertypes(cls):
            for m in class_members(self.classes[c]):
                if m.kind == "MethodDecl" and m.text == name:
                    return m
        return None

    def ctor_decl(self, cls: str) -> Optional[AstNode]:
        return self.classes[cls].child("CtorDecl")

    def is_reference(self, t: str) -> bool:
        return t in self.classes or t in ("object", NULL, ANY)

    def assignable(self, src: str, dst: str) -> bool:
        if src == dst or ANY in (src, dst):
            return True
        if src == "int" and dst == "long":
            return True
        if src == NULL:
            return dst in self.classes or dst == "object"
        if src in self.classes:
            return dst == "object" or self.is_subtype(src, dst)
        return False

    def method_node(self, qualified: str) -> AstNode:
        cls, _, name = qualified.partition(".")
        if cls not in self.classes:
            raise KeyError(f"unknown class {cls!r}")
        for m in class_members(self.classes[cls]):
            if m.kind == "MethodDecl" and m.text == name:
                return m
        raise KeyError(f"unknown method {qualified!r}")


# --- checker -------------------------------------------------------------------

class _Scope:
    def __init__(self, params: dict):
        self.frames = [dict(params)]

    def lookup(self, name):
        for f in reversed(self.frames):
            if name in f:
                return f[name]
        return None


class _Checker:
    def __init__(self, program: Program, table: SymbolTable):
        self.program = program
        self.t = table
        self.path = ""
        self.cls = ""
        self.static_ctx = False
        self.tparams: set = set()
        self.ret = "void"
        self.method_name = ""
        self.scope = _Scope({})

    # -- reporting

    def err(self, kind: str, node: AstNode, message: str):
        self.t.diagnostics.append(
            Diagnostic(kind, message, self.path, node.span.line, node.span.col))

    def name_error(self, node, message):
        self.err("NameError", node, message)

    def type_error(self, node, message):
        self.err("TypeError", node, message)

    # -- declarations

    def declare(self, trees: list[SyntaxTree]):
        t = self.t
        for tree in trees:
            self.path = tree.file.path
            for cls in tree.classes():
                if cls.text in t.classes or cls.text in PRIMITIVE_TYPES:
                    self.name_error(cls, f"duplicate class {cls.text!r}")
                    continue
                t.classes[cls.text] = cls
                t.class_files[cls.text] = tree.file.path
        for p in sorted(PRIMITIVE_TYPES):
            t.types[p] = TypeInfo(p, True)
        for tree in trees:
            self.path = tree.file.path
            for cls in tree.classes():
                if t.classes.get(cls.text) is cls:
                    t.types[cls.text] = self.type_info(cls)
        for tree in trees:
            self.path = tree.file.path
            for cls in tree.classes():
                sup = class_supertype(cls)
                if sup is not None:
                    if sup not in t.classes:
                        self.name_error(cls.children[0], f"unknown supertype {sup!r}")
                    elif cls.text in t.supertypes(sup):
                        self.type_error(cls, f"cyclic inheritance through {cls.text!r}")

    def type_info(self, cls: AstNode) -> TypeInfo:
        is_static = "static" in cls.flags
        members = []
        seen = set()
        ctors = []
        for m in class_members(cls):
            if m.kind == "CtorDecl":
                ctors.append(m)
                if is_static:
                    self.type_error(m, "static class cannot declare a constructor")
                continue
            if m.text in seen:
                self.type_error(m, f"duplicate member {m.text!r} in {cls.text}")
                continue
            seen.add(m.text)
            static = "static" in m.flags
            if is_static and not static:
                self.type_error(m, f"static class {cls.text} has instance member {m.text!r}")
            if m.kind == "FieldDecl":
                self.check_type_name(m.children[0], set(), allow_void=False)
                members.append(MemberSig(m.text, "field", return_type=m.children[0].text,
                                         is_static=static, container=cls.text))
            else:
                tps = method_type_params(m)
                params = method_params(m)
                self.check_type_name(m.children[0], set(tps), allow_void=True)
                for p in params:
                    self.check_type_name(p.children[0], set(tps), allow_void=False)
                if "native" in m.flags and not static:
                    self.type_error(m, "native methods must be static")
                members.append(MemberSig(
                    m.text, "method",
                    param_types=tuple(p.children[0].text for p in params),
                    type_params=tuple(tps),
                    return_type=m.children[0].text,
                    is_static=static, container=cls.text,
                    param_names=tuple(p.text for p in params),
                    is_native="native" in m.flags))
        if len(ctors) > 1:
            self.type_error(ctors[1], f"class {cls.text} declares more than one constructor")
        if ctors:
            for p in method_params(ctors[0]):
                self.check_type_name(p.children[0], set(), allow_void=False)
            self.t.ctors[cls.text] = tuple(p.children[0].text for p in method_params(ctors[0]))
        else:
            self.t.ctors[cls.text] = ()
        return TypeInfo(cls.text, False, is_static, class_supertype(cls), tuple(members))

    def check_type_name(self, tref: AstNode, tparams: set, allow_void: bool):
        name = tref.text
        if name == "void" and allow_void:
            return
        if name in PRIMITIVE_TYPES or name == "object" or name in tparams:
            return
        if name in self.t.classes:
            return
        self.name_error(tref, f"unknown type {name!r}")

    def value_type(self, name: str) -> str:
        return ANY if name in self.tparams else name

    # -- bodies

    def check_bodies(self, trees: list[SyntaxTree]):
        for tree in trees:
            self.path = tree.file.path
            for cls in tree.classes():
                if self.t.classes.get(cls.text) is not cls:
                    continue
                self.cls = cls.text
                for m in class_members(cls):
                    if m.kind == "MethodDecl" and method_body(m) is not None:
                        self.check_callable(m, "static" in m.flags, set(method_type_params(m)),
                                            m.children[0].text)
                    elif m.kind == "CtorDecl":
                        self.check_callable(m, False, set(), "void")

    def check_callable(self, m: AstNode, static: bool, tparams: set, ret: str):
        self.static_ctx = static
        self.tparams = tparams
        self.ret = self.value_type(ret)
        self.method_name = f"{self.cls}.{m.text}"
        params = {}
        for p in method_params(m):
            if p.text in params:
                self.type_error(p, f"duplicate parameter {p.text!r}")
            params[p.text] = self.value_type(p.children[0].text)
        self.scope = _Scope(params)
        self.block(method_body(m))

    def block(self, blk: AstNode):
        self.scope.frames.append({})
        for s in blk.children:
            self.stmt(s)
        self.scope.frames.pop()

    def stmt(self, s: AstNode):
        k = s.kind
        if k == "If":
            self.expect_type(s.children[0], "bool")
            self.block(s.children[1])
            if len(s.children) > 2:
                self.block(s.children[2])
        elif k == "Return":
            if s.children:
                if self.ret == "void":
                    self.type_error(s, "void method cannot return a value")
                    self.expr(s.children[0])
                else:
                    self.expect_type(s.children[0], self.ret)
            elif self.ret != "void":
                self.type_error(s, f"missing return value of type {self.ret}")
        elif k == "Throw":
            self.expect_type(s.children[0], "string")
        elif k == "LocalDecl":
            tref = s.children[0]
            self.check_type_name(tref, self.tparams, allow_void=False)
            ltype = self.value_type(tref.text)
            if self.scope.lookup(s.text) is not None:
                self.type_error(s, f"duplicate local {s.text!r}")
            if len(s.children) > 1:
                self.expect_type(s.children[1], ltype)
            self.scope.frames[-1][s.text] = ltype
        elif k == "Assign":
            target, value = s.children
            ttype = self.expr(target, assign_target=True)
            if ttype is not None:
                self.expect_type(value, ttype)
            else:
                self.expr(value)
        elif k == "ExprStmt":
            e = s.children[0]
            if e.kind not in ("Invocation", "ObjectCreation"):
                self.type_error(s, "expression statement must be a call or creation")
            self.expr(e)
        else:
            self.type_error(s, f"unexpected statement {k}")

    def expect_type(self, e: AstNode, want: str):
        got = self.expr(e)
        if got is not None and not self.t.assignable(got, want):
            self.type_error(e, f"expected {want}, got {got}")

    def note(self, e: AstNode, typ: Optional[str]) -> Optional[str]:
        if typ is not None:
            self.t.expr_types[e] = typ
        return typ

    def expr(self, e: AstNode, assign_target: bool = False) -> Optional[str]:
        typ = self._expr(e, assign_target)
        return self.note(e, typ)

    def _expr(self, e: AstNode, assign_target: bool) -> Optional[str]:
        k = e.kind
        if k == "Literal":
            if e.text in ("true", "false"):
                return "bool"
            if e.text == "null":
                return NULL
            if e.text.startswith('"'):
                return "string"
            return "int"
        if k == "Identifier":
            return self.identifier(e, assign_target)
        if k == "MemberAccess":
            return self.member_value(e, assign_target)
        if k == "Invocation":
            return self.invocation(e)
        if k == "ObjectCreation":
            return self.creation(e)
        if k == "BinaryOp":
            return self.binary(e)
        if k == "UnaryOp":
            return self.unary(e)
        self.type_error(e, f"unexpected expression {k}")
        return None

    def is_type_name(self, e: AstNode) -> bool:
        return (e.kind == "Identifier" and not e.children and e.text in self.t.classes
                and self.scope.lookup(e.text) is None
                and self.t.lookup(self.cls, e.text) is None)

    def identifier(self, e: AstNode, assign_target: bool) -> Optional[str]:
        name = e.text
        if e.children:
            self.type_error(e, f"type arguments on {name!r} only allowed in New<T>.get(...)")
            return None
        if name == "this":
            if assign_target:
                self.type_error(e, "cannot assign to this")
            if self.static_ctx:
                self.type_error(e, "'this' in static context")
                return None
            return self.cls
        local = self.scope.lookup(name)
        if local is not None:
            self.t.refs[e] = LocalRef(name)
            return local
        found = self.t.lookup(self.cls, name)
        if found is not None:
            info, sig = found
            if sig.kind != "field":
                self.type_error(e, f"method {name!r} used as value")
                return None
            if not sig.is_static and self.static_ctx:
                self.type_error(e, f"instance field {name!r} in static context")
            self.t.refs[e] = MemberRef(info, sig, sig.is_static, implicit=True)
            self.t.enclosing[e] = self.method_name
            return self.value_type(sig.return_type)
        if name in self.t.classes:
            self.type_error(e, f"type {name!r} used as value")
            return None
        self.name_error(e, f"unresolved identifier {name!r}")
        return None

    def member_value(self, e: AstNode, assign_target: bool) -> Optional[str]:
        recv = e.children[0]
        if self.is_type_name(recv):
            self.t.refs[recv] = TypeNameRef(recv.text)
            found = self.t.lookup(recv.text, e.text)
            if found is None or found[1].kind != "field":
                self.name_error(e, f"no static field {e.text!r} on {recv.text}")
                return None
            info, sig = found
            if not sig.is_static:
                self.type_error(e, f"field {e.text!r} is not static")
            self.t.refs[e] = MemberRef(info, sig, True)
            self.t.enclosing[e] = self.method_name
            return sig.return_type
        rtype = self.expr(recv)
        if rtype is None:
            return None
        if rtype not in self.t.classes:
            self.type_error(e, f"type {rtype} has no members")
            return None
        found = self.t.lookup(rtype, e.text)
        if found is None or found[1].kind != "field":
            self.name_error(e, f"no field {e.text!r} on {rtype}")
            return None
        info, sig = found
        if sig.is_static:
            self.type_error(e, f"static field {e.text!r} accessed through an instance")
        self.t.refs[e] = MemberRef(info, sig, False)
        self.t.enclosing[e] = self.method_name
        return sig.return_type

    def env_native(self, e: AstNode, name: str) -> Optional[MemberSig]:
        env = self.t.types.get("Env")
        sig = env.member(name) if env is not None else None
        if sig is None or not sig.is_native:
            self.name_error(e, f"isolation environment missing Env.{name}")
            return None
        return sig

    def check_args(self, e: AstNode, sig_params: tuple, args: list[AstNode], tparams: tuple,
                   what: str):
        if len(args) != len(sig_params):
            self.type_error(e, f"{what} expects {len(sig_params)} argument(s), got {len(args)}")
            for a in args:
                self.expr(a)
            return
        for a, p in zip(args, sig_params):
            self.expect_type(a, ANY if p in tparams else p)

    def invocation(self, e: AstNode) -> Optional[str]:
        callee, tal, args = invocation_parts(e)
        targs = tuple(t.text for t in tal.children) if tal else ()
        for t in (tal.children if tal else []):
            self.check_type_name(t, self.tparams, allow_void=False)
        if callee.kind == "Identifier":
            name = callee.text
            found = self.t.lookup(self.cls, name) if not callee.children else None
            if found is None and name == "choose" and len(targs) == 1:
                native = CHOOSE_NATIVES.get(targs[0])
                if native is None:
                    self.type_error(e, f"choose<{targs[0]}> needs a primitive type")
                    return None
                sig = self.env_native(e, native)
                self.t.refs[e] = IntrinsicRef("choose", targs[0])
                self.check_args(e, ("string",), args, (), "choose")
                return targs[0] if sig else None
            if found is None or found[1].kind != "method":
                self.name_error(callee, f"unresolved method {name!r}")
                for a in args:
                    self.expr(a)
                return None
            info, sig = found
            if not sig.is_static and self.static_ctx:
                self.type_error(e, f"instance method {name!r} called from static context")
            self.t.refs[e] = MemberRef(info, sig, sig.is_static, implicit=True)
            self.t.enclosing[e] = self.method_name
            return self.finish_call(e, sig, targs, args)
        if callee.kind != "MemberAccess":
            self.type_error(e, "invalid callee")
            return None
        recv = callee.children[0]
        name = callee.text
        # isolator: recv._()
        if name == "_" and not args and not targs:
            rtype = self.expr(recv)
            sig = self.env_native(e, "isolate")
            if rtype is not None and not self.t.is_reference(rtype):
                self.type_error(e, f"isolator applied to non-reference type {rtype}")
            self.t.refs[e] = IntrinsicRef("isolate")
            return sig.return_type if sig else None
        # uninitialized instantiation: New<T>.get(args)
        if (recv.kind == "Identifier" and recv.text == "New" and recv.children
                and name == "get" and not targs and self.scope.lookup("New") is None
                and "New" not in self.t.classes):
            tnames = [t.text for t in recv.children[0].children]
            sig = self.env_native(e, "allocate")
            for a in args:
                self.expr(a)
            if len(tnames) != 1 or tnames[0] not in self.t.classes:
                self.type_error(e, f"New<{', '.join(tnames)}> needs a class type")
                return None
            if self.t.types[tnames[0]].is_static:
                self.type_error(e, f"cannot instantiate static class {tnames[0]}")
            self.t.refs[e] = IntrinsicRef("allocate", tnames[0])
            return tnames[0] if sig else None
        if self.is_type_name(recv):
            self.t.refs[recv] = TypeNameRef(recv.text)
            found = self.t.lookup(recv.text, name)
            if found is None or found[1].kind != "method":
                self.name_error(callee, f"no static method {name!r} on {recv.text}")
                for a in args:
                    self.expr(a)
                return None
            info, sig = found
            if not sig.is_static:
                self.type_error(e, f"method {name!r} is not static")
            self.t.refs[e] = MemberRef(info, sig, True)
            self.t.enclosing[e] = self.method_name
            return self.finish_call(e, sig, targs, args)
        rtype = self.expr(recv)
        if rtype is None:
            for a in args:
                self.expr(a)
            return None
        if rtype not in self.t.classes:
            self.type_error(e, f"type {rtype} has no methods")
            return None
        found = self.t.lookup(rtype, name)
        if found is None or found[1].kind != "method":
            self.name_error(callee, f"no method {name!r} on {rtype}")
            for a in args:
                self.expr(a)
            return None
        info, sig = found
        if sig.is_static:
            self.type_error(e, f"static method {name!r} called through an instance")
        self.t.refs[e] = MemberRef(info, sig, False)
        self.t.enclosing[e] = self.method_name
        return self.finish_call(e, sig, targs, args)

    def finish_call(self, e, sig: MemberSig, targs: tuple, args) -> str:
        if targs and len(targs) != len(sig.type_params):
            self.type_error(e, f"{sig.name} takes {len(sig.type_params)} type argument(s)")
        self.check_args(e, sig.param_types, args, sig.type_params, sig.name)
        if sig.return_type in sig.type_params:
            return ANY
        return sig.return_type

    def creation(self, e: AstNode) -> Optional[str]:
        tname = e.children[0].text
        args = e.children[1:]
        if tname not in self.t.classes:
            self.name_error(e.children[0], f"unknown class {tname!r}")
            for a in args:
                self.expr(a)
            return None
        if self.t.types[tname].is_static:
            self.type_error(e, f"cannot instantiate static class {tname}")
        self.check_args(e, self.t.ctors[tname], args, (), f"new {tname}")
        return tname

    def overload(self, e: AstNode, method: str, operand_types: list[str]) -> Optional[str]:
        for ot in operand_types:
            if ot in self.t.classes:
                found = self.t.lookup(ot, method)
                if found is not None and found[1].kind == "method" and found[1].is_static \
                        and len(found[1].param_types) == len(operand_types):
                    info, sig = found
                    for a, p in zip(e.children, sig.param_types):
                        at = self.t.expr_types.get(a)
                        if at is not None and not self.t.assignable(at, p):
                            self.type_error(a, f"operator operand: expected {p}, got {at}")
                    self.t.refs[e] = MemberRef(info, sig, True)
                    self.t.enclosing[e] = self.method_name
                    return sig.return_type
        return None

    def binary(self, e: AstNode) -> Optional[str]:
        op = e.text
        lt = self.expr(e.children[0])
        rt = self.expr(e.children[1])
        if lt is None or rt is None:
            return None
        if op in OPERATOR_METHODS and (lt in self.t.classes or rt in self.t.classes):
            result = self.overload(e, OPERATOR_METHODS[op], [lt, rt])
            if result is not None:
                return result
        numeric = {"int", "long"}
        if op in ("&&", "||"):
            if lt == rt == "bool":
                return "bool"
        elif op in ("==", "!="):
            if (lt in numeric and rt in numeric) or lt == rt == "bool" or lt == rt == "string":
                return "bool"
            if self.t.is_reference(lt) and self.t.is_reference(rt):
                return "bool"
        elif op in ("<", "<=", ">", ">="):
            if lt in numeric and rt in numeric:
                return "bool"
        elif op == "+" and "string" in (lt, rt):
            if lt in PRIMITIVE_TYPES and rt in PRIMITIVE_TYPES:
                return "string"
        else:
            if lt in numeric and rt in numeric:
                return "long" if "long" in (lt, rt) else "int"
        self.type_error(e, f"operator {op!r} not defined for {lt} and {rt}")
        return None

    def unary(self, e: AstNode) -> Optional[str]:
        op = e.text
        t = self.expr(e.children[0])
        if t is None:
            return None
        if t in self.t.classes:
            result = self.overload(e, UNARY_OPERATOR_METHODS[op], [t])
            if result is not None:
                return result
        if op == "!" and t == "bool":
            return "bool"
        if op == "-" and t in ("int", "long"):
            return t
        self.type_error(e, f"operator {op!r} not defined for {t}")
        return None


def resolve(program: Program, strict: bool = True) -> SymbolTable:
    """Resolve names and check types; the built-in prelude is always in scope.

    With ``strict`` the first batch of diagnostics is raised as a
    NameResolutionError (any unresolved name) or TypeCheckError.
    """
    table = SymbolTable()
    trees = [prelude_tree()] + list(program.trees)
    checker = _Checker(program, table)
    checker.declare(trees)
    checker.check_bodies(trees)
    if strict and table.diagnostics:
        if any(d.kind == "NameError" for d in table.diagnostics):
            raise NameResolutionError(table.diagnostics)
        raise TypeCheckError(table.diagnostics)
    return table


def check(program: Program) -> list[Diagnostic]:
    return resolve(program, strict=False).diagnostics


# --- external access classification ----------------------------------------------

def is_external(record: MemberAccessRecord, unit: UnitSpec) -> bool:
    """External iff the member's container lies outside the unit and the caller
    is not a subtype of that container."""
    container = record.container_type.name
    if container in unit.class_names:
        return False
    return container not in record.caller_bases


def _member_access_nodes(cls: AstNode, table: SymbolTable):
    """Pre-order (node, MemberRef) pairs for explicit member accesses in a class.

    Invocation callees and assignment targets are skipped: the invocation
    itself carries the record, and writes are not isolatable accesses.
    """
    skip = set()
    for node in cls.walk():
        if node.kind == "Invocation":
            skip.add(node.children[0])
        elif node.kind == "Assign":
            skip.add(node.children[0])
        if node in skip:
            continue
        ref = table.refs.get(node)
        if not isinstance(ref, MemberRef) or ref.implicit:
            continue
        if node.kind in ("Invocation", "MemberAccess"):
            yield node, ref


def collect_external_accesses(program: Program, table: SymbolTable,
                              unit: UnitSpec) -> list[MemberAccessRecord]:
    records = []
    for tree in program.trees:
        for cls in tree.classes():
            if cls.text not in unit.class_names:
                continue
            bases = tuple(table.supertypes(cls.text))
            for node, ref in _member_access_nodes(cls, table):
                targs = ()
                if node.kind == "Invocation":
                    _, tal, _ = invocation_parts(node)
                    targs = tuple(t.text for t in tal.children) if tal else ()
                rec = MemberAccessRecord(
                    callsite_index=len(records),
                    container_type=ref.container,
                    member=ref.member,
                    receiver_is_static_type=ref.receiver_is_type,
                    type_args=targs,
                    node_id=node.node_id,
                    enclosing_method=table.enclosing.get(node, ""),
                    caller_bases=bases,
                    node=node,
                )
                if is_external(rec, unit):
                    records.append(rec)
    return records


def count_accesses(records: list[MemberAccessRecord]) -> tuple[int, int]:
    """(IMethods, IMembers)."""
    methods = sum(1 for r in records if r.member.kind == "method")
    return methods, len(records) - methods
