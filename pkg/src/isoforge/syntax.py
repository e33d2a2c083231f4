"""AST node types shared by the parser, printer, transformer and interpreter."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

NODE_KINDS = frozenset({
    "CompilationUnit",
    "ClassDecl", "MethodDecl", "FieldDecl", "CtorDecl", "Param",
    "Block", "If", "Return", "Throw", "LocalDecl", "Assign", "ExprStmt",
    "MemberAccess", "Invocation", "ObjectCreation", "BinaryOp", "UnaryOp",
    "Literal", "Identifier", "TypeRef", "TypeArgList",
})

STATEMENT_KINDS = frozenset({"If", "Return", "Throw", "LocalDecl", "Assign", "ExprStmt"})

PRIMITIVE_TYPES = frozenset({"int", "long", "bool", "string"})


@dataclass(frozen=True)
class Span:
    line: int
    col: int
    length: int
    offset: int = 0

    def contains(self, other: "Span") -> bool:
        return (self.offset <= other.offset
                and other.offset + other.length <= self.offset + self.length)


NO_SPAN = Span(0, 0, 0, 0)


@dataclass(eq=False)
class AstNode:
    """One syntax node.

    ``text`` holds the kind-specific payload: a name for declarations,
    identifiers and type references, the operator for BinaryOp/UnaryOp, the
    member name for MemberAccess, and the canonical lexeme for Literal.
    Nodes hash by identity so they can key side tables.
    """
    kind: str
    text: str = ""
    children: list["AstNode"] = field(default_factory=list)
    flags: frozenset = frozenset()
    span: Span = NO_SPAN
    node_id: int = -1

    def walk(self) -> Iterator["AstNode"]:
        """Pre-order traversal."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def structure(self) -> tuple:
        return (self.kind, self.text, tuple(sorted(self.flags)),
                tuple(c.structure() for c in self.children))

    def child(self, kind: str) -> Optional["AstNode"]:
        for c in self.children:
            if c.kind == kind:
                return c
        return None

    def children_of(self, kind: str) -> list["AstNode"]:
        return [c for c in self.children if c.kind == kind]

    def __repr__(self) -> str:
        return f"AstNode({self.kind}, {self.text!r}, #{self.node_id})"


@dataclass(frozen=True)
class SourceFile:
    path: str
    content: str


@dataclass(eq=False)
class SyntaxTree:
    root: AstNode
    file: SourceFile

    def classes(self) -> list[AstNode]:
        return self.root.children_of("ClassDecl")

    def structure(self) -> tuple:
        return self.root.structure()


def number_nodes(root: AstNode) -> int:
    """Assign pre-order ids 0..N-1; returns N."""
    n = 0
    for n, node in enumerate(root.walk()):
        node.node_id = n
    return n + 1


def clone(node: AstNode) -> AstNode:
    return AstNode(node.kind, node.text, [clone(c) for c in node.children],
                   node.flags, node.span, node.node_id)


# --- accessors for declaration nodes -------------------------------------

def class_supertype(cls: AstNode) -> Optional[str]:
    if cls.children and cls.children[0].kind == "TypeRef":
        return cls.children[0].text
    return None


def class_members(cls: AstNode) -> list[AstNode]:
    return [c for c in cls.children if c.kind != "TypeRef"]


def method_return_type(m: AstNode) -> str:
    return m.children[0].text


def method_type_params(m: AstNode) -> list[str]:
    tal = m.child("TypeArgList")
    return [t.text for t in tal.children] if tal else []


def method_params(m: AstNode) -> list[AstNode]:
    return m.children_of("Param")


def method_body(m: AstNode) -> Optional[AstNode]:
    return m.child("Block")


def param_type(p: AstNode) -> str:
    return p.children[0].text


def invocation_parts(inv: AstNode) -> tuple[AstNode, Optional[AstNode], list[AstNode]]:
    """Split an Invocation into (callee, type-arg list or None, args)."""
    callee = inv.children[0]
    rest = inv.children[1:]
    if rest and rest[0].kind == "TypeArgList":
        return callee, rest[0], rest[1:]
    return callee, None, rest


@dataclass(eq=False)
class Program:
    """An ordered set of syntax trees (one per source file)."""
    trees: list[SyntaxTree] = field(default_factory=list)

    def __post_init__(self):
        paths = [t.file.path for t in self.trees]
        if len(set(paths)) != len(paths):
            raise ValueError("duplicate source path in program")

    def class_decls(self) -> list[AstNode]:
        return [c for t in self.trees for c in t.classes()]

    def tree_of_class(self, name: str) -> Optional[SyntaxTree]:
        for t in self.trees:
            if any(c.text == name for c in t.classes()):
                return t
        return None

    def replace_or_add(self, trees: list[SyntaxTree]) -> "Program":
        """New program where trees with a matching path replace the old ones."""
        incoming = {t.file.path: t for t in trees}
        out = [incoming.pop(t.file.path, t) for t in self.trees]
        out.extend(t for t in trees if t.file.path in incoming)
        return Program(out)

    def closure(self, roots: list[SyntaxTree]) -> "Program":
        """Sub-program of the files transitively referenced by name from ``roots``."""
        owner = {c.text: t.file.path for t in self.trees for c in t.classes()}
        by_path = {t.file.path: t for t in self.trees}
        keep = {t.file.path for t in roots}
        todo = list(keep)
        while todo:
            for node in by_path[todo.pop()].root.walk():
                if node.kind in ("Identifier", "TypeRef") and node.text in owner:
                    path = owner[node.text]
                    if path not in keep:
                        keep.add(path)
                        todo.append(path)
        return Program([t for t in self.trees if t.file.path in keep])
