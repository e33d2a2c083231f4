"""Generation of the Fake singleton, static fake classes and the isolation environment."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .parser import parse_text
from .semantics import MemberAccessRecord, SymbolTable
from .syntax import PRIMITIVE_TYPES, AstNode, SyntaxTree
from .transform import mangle, static_fake_class

FAKE_CLASS = "Fake"
ENV_FILE = "Env.ul"

ENV_SOURCE = """\
static class Env {
    native static Fake isolate(object receiver);
    native static object allocate(string typeName);
    native static int chooseInt(string label);
    native static long chooseLong(string label);
    native static bool chooseBool(string label);
    native static string chooseString(string label);
}
"""


class DuplicateLabel(Exception):
    pass


class UnknownType(Exception):
    pass


@dataclass(eq=False)
class FakeArtifact:
    singleton: SyntaxTree
    static_classes: dict = field(default_factory=dict)    # container -> SyntaxTree
    choice_labels: list = field(default_factory=list)     # (label, value type)
    environment: Optional[SyntaxTree] = None
    member_names: list = field(default_factory=list)      # mangled name per record

    def trees(self) -> list[SyntaxTree]:
        out = [self.singleton] + [self.static_classes[k] for k in sorted(self.static_classes)]
        if self.environment is not None:
            out.append(self.environment)
        return out

    def member_count(self) -> int:
        return sum(len(_methods(t)) for t in [self.singleton, *self.static_classes.values()])


def _methods(tree: SyntaxTree) -> list[AstNode]:
    return [m for c in tree.classes() for m in c.children if m.kind == "MethodDecl"]


def choice_label(record: MemberAccessRecord) -> str:
    return f"{mangle(record).text}.ret"


def assign_choice_labels(records: list[MemberAccessRecord]) -> list[tuple[str, str]]:
    """One label per primitive-returning record, in callsite order."""
    labels = []
    seen = set()
    for r in records:
        if r.member.return_type in PRIMITIVE_TYPES:
            label = choice_label(r)
            if label in seen:
                raise DuplicateLabel(label)
            seen.add(label)
            labels.append((label, r.member.return_type))
    return labels


def _return_statement(record: MemberAccessRecord, table: Optional[SymbolTable]) -> str:
    rtype = record.member.return_type
    if rtype == "void":
        return ""
    if rtype in PRIMITIVE_TYPES:
        return f"return choose<{rtype}>({json.dumps(choice_label(record))});"
    if rtype == "object" or rtype in record.member.type_params:
        return "return null;"
    if table is not None and rtype not in table.classes:
        raise UnknownType(rtype)
    return f"return New<{rtype}>.get();"


def _fake_member(record: MemberAccessRecord, table: Optional[SymbolTable], static: bool) -> str:
    m = record.member
    name = mangle(record).text
    tparams = f"<{', '.join(m.type_params)}>" if m.type_params else ""
    params = ", ".join(f"{t} {n}" for t, n in zip(m.param_types, m.param_names))
    modifier = "static " if static else ""
    body = _return_statement(record, table)
    lines = [f"    {modifier}{m.return_type} {name}{tparams}({params}) {{"]
    if body:
        lines.append(f"        {body}")
    lines.append("    }")
    return "\n".join(lines)


def generate_fake_code(records: list[MemberAccessRecord],
                       table: Optional[SymbolTable] = None) -> FakeArtifact:
    """Build one fake member per record; static accesses go to ``FAKE_<Container>``."""
    instance_members = []
    static_members: dict[str, list[str]] = {}
    names = []
    for r in records:
        names.append(mangle(r).text)
        if r.is_static:
            static_members.setdefault(r.container_type.name, []).append(
                _fake_member(r, table, static=True))
        else:
            instance_members.append(_fake_member(r, table, static=False))
    singleton_src = "\n".join([f"class {FAKE_CLASS} {{"] + instance_members + ["}"]) + "\n"
    singleton = parse_text(singleton_src, f"{FAKE_CLASS}.ul")
    statics = {}
    for container, members in static_members.items():
        cname = static_fake_class(container)
        src = "\n".join([f"static class {cname} {{"] + members + ["}"]) + "\n"
        statics[container] = parse_text(src, f"{cname}.ul")
    return FakeArtifact(singleton, statics, assign_choice_labels(records), None, names)


def generate_basic_environment() -> SyntaxTree:
    """Declarations backing the isolator ``_()``, ``New<T>.get(...)`` and ``choose<T>(label)``."""
    return parse_text(ENV_SOURCE, ENV_FILE)
