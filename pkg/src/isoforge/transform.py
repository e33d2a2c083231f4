"""Isolating AST rewrites: external member accesses and external object creations."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from .semantics import (
    MemberAccessRecord, MemberRef, SymbolTable, UnitSpec, collect_external_accesses,
)
from .syntax import AstNode, Program, SyntaxTree, Span, clone, number_nodes

STATIC_FAKE_PREFIX = "FAKE_"
ISOLATOR = "_"

_DOTNET_NAMES = {"int": "Int32", "long": "Int64", "bool": "Boolean", "string": "String",
                 "void": "Void", "object": "Object"}


@dataclass(frozen=True)
class MangledName:
    text: str
    parts: tuple   # (container, member, param type names, return type name, callsite index)

    def __str__(self):
        return self.text


def type_token(name: str) -> str:
    return _DOTNET_NAMES.get(name, name)


def upper_camel(name: str) -> str:
    return name[:1].upper() + name[1:]


def mangle(record: MemberAccessRecord) -> MangledName:
    """Unique fake-member name for one callsite.

    Instance members carry the container name, static members rely on the
    ``FAKE_<Container>`` class for it. Field accesses are prefixed ``Member``.
    """
    m = record.member
    container = record.container_type.name
    params = "".join(type_token(p) for p in m.param_types)
    ret = type_token(m.return_type)
    if record.is_static:
        stem = upper_camel(m.name) if m.kind == "field" else m.name
    else:
        stem = container + upper_camel(m.name)
    if m.kind == "field":
        stem = "Member" + stem
    text = f"{stem}{params}{ret}_{record.callsite_index}"
    return MangledName(text, (container, m.name, m.param_types, m.return_type,
                              record.callsite_index))


def static_fake_class(container: str) -> str:
    return STATIC_FAKE_PREFIX + container


@dataclass(eq=False)
class TransformResult:
    trees: list
    records: list
    creations: list = field(default_factory=list)    # (node_id, created type, ctor arg count)
    diagnostics: list = field(default_factory=list)
    rewritten_accesses: int = 0

    @property
    def is_success(self) -> bool:
        return not any(d.startswith("error") for d in self.diagnostics)


def _synth(kind: str, span: Span, text: str = "", children=None) -> AstNode:
    return AstNode(kind, text, list(children or []), frozenset(), span)


def _unit_trees(program: Program, unit: UnitSpec) -> list[SyntaxTree]:
    return [t for t in program.trees if any(c.text in unit.class_names for c in t.classes())]


def _diag(node: AstNode, path: str, message: str) -> str:
    return f"error: {path}:{node.span.line}:{node.span.col}: UnsupportedConstruct: {message}"


def _check_unsupported(cls: AstNode, table: SymbolTable, unit: UnitSpec, path: str) -> list[str]:
    """Constructs the rewrite cannot isolate: operators dispatching to external
    overloads, writes to external fields, external members yielding unit types."""
    out = []
    bases = set(table.supertypes(cls.text))
    def external(container: str) -> bool:
        return container not in unit.class_names and container not in bases
    for node in cls.walk():
        ref = table.refs.get(node)
        if node.kind in ("BinaryOp", "UnaryOp") and isinstance(ref, MemberRef):
            if external(ref.container.name):
                out.append(_diag(node, path, f"operator {node.text!r} on external type "
                                             f"{ref.container.name} cannot be isolated"))
        elif node.kind == "Assign":
            target_ref = table.refs.get(node.children[0])
            if (node.children[0].kind == "MemberAccess" and isinstance(target_ref, MemberRef)
                    and external(target_ref.container.name)):
                out.append(_diag(node, path, f"write to external field "
                                             f"{target_ref.container.name}.{target_ref.member.name}"))
        elif (node.kind in ("Invocation", "MemberAccess") and isinstance(ref, MemberRef)
              and not ref.implicit and external(ref.container.name)
              and ref.member.return_type in unit.class_names):
            out.append(_diag(node, path, f"external member {ref.container.name}.{ref.member.name} "
                                         f"returns unit type {ref.member.return_type}"))
    return out


def _rewrite_access(node: AstNode, new_children: list[AstNode], rec: MemberAccessRecord) -> AstNode:
    span = node.span
    name = mangle(rec).text
    if node.kind == "Invocation":
        callee = new_children[0]
        receiver = callee.children[0]
        rest = new_children[1:]          # optional TypeArgList then arguments
    else:
        receiver = new_children[0]
        rest = []
    if rec.is_static:
        target = _synth("Identifier", receiver.span, static_fake_class(rec.container_type.name))
    else:
        isolator = _synth("MemberAccess", span, ISOLATOR, [receiver])
        target = _synth("Invocation", span, children=[isolator])
    access = _synth("MemberAccess", span, name, [target])
    return _synth("Invocation", span, children=[access] + rest)


def _rebuild(node: AstNode, visit) -> AstNode:
    children = [_rebuild(c, visit) for c in node.children]
    return visit(node, children)


def transform_member_accesses(program: Program, table: SymbolTable,
                              unit: UnitSpec) -> TransformResult:
    """Route every external member access of the unit through a fake.

    Instance accesses become ``recv._().<Mangled>(args)``; static ones become
    ``FAKE_<Container>.<Mangled>(args)``. Field reads become zero-argument calls.
    """
    records = collect_external_accesses(program, table, unit)
    by_node = {r.node: r for r in records}
    diagnostics = []
    trees = []
    rewritten = 0

    def visit(node, children):
        nonlocal rewritten
        rec = by_node.get(node)
        if rec is None:
            return AstNode(node.kind, node.text, children, node.flags, node.span, node.node_id)
        rewritten += 1
        return _rewrite_access(node, children, rec)

    for tree in _unit_trees(program, unit):
        classes = []
        for cls in tree.root.children:
            if cls.text in unit.class_names:
                diagnostics += _check_unsupported(cls, table, unit, tree.file.path)
                classes.append(_rebuild(cls, visit))
            else:
                classes.append(clone(cls))
        root = AstNode(tree.root.kind, tree.root.text, classes, tree.root.flags, tree.root.span)
        number_nodes(root)
        trees.append(SyntaxTree(root, tree.file))
    return TransformResult(trees, records, [], diagnostics, rewritten)


def transform_object_creations(result: TransformResult, unit: UnitSpec) -> TransformResult:
    """Replace ``new T(args)`` for external T by ``New<T>.get(args)``."""
    creations = []

    def visit(node, children):
        if node.kind == "ObjectCreation" and node.children[0].text not in unit.class_names:
            tname = node.children[0].text
            creations.append((node.node_id, tname, len(children) - 1))
            span = node.span
            tal = _synth("TypeArgList", span, children=[_synth("TypeRef", span, tname)])
            new_ident = _synth("Identifier", span, "New", [tal])
            access = _synth("MemberAccess", span, "get", [new_ident])
            return _synth("Invocation", span, children=[access] + children[1:])
        return AstNode(node.kind, node.text, children, node.flags, node.span, node.node_id)

    trees = []
    for tree in result.trees:
        classes = []
        for cls in tree.root.children:
            classes.append(_rebuild(cls, visit) if cls.text in unit.class_names else cls)
        root = AstNode(tree.root.kind, tree.root.text, classes, tree.root.flags, tree.root.span)
        number_nodes(root)
        trees.append(SyntaxTree(root, tree.file))
    return replace(result, trees=trees, creations=creations)


def isolate_unit(program: Program, table: SymbolTable, unit: UnitSpec) -> TransformResult:
    return transform_object_creations(transform_member_accesses(program, table, unit), unit)
