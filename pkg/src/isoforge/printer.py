"""Deterministic pretty printer; output re-parses to a structurally identical tree."""
from __future__ import annotations

from .syntax import AstNode, SyntaxTree, invocation_parts

INDENT = "    "

_PRECEDENCE = {"||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, "<=": 4, ">": 4, ">=": 4,
               "+": 5, "-": 5, "*": 6, "/": 6, "%": 6}
_UNARY_PREC = 7
_POSTFIX_PREC = 8


def pretty_print(tree: SyntaxTree | AstNode) -> str:
    root = tree.root if isinstance(tree, SyntaxTree) else tree
    if root.kind == "CompilationUnit":
        return "\n".join(print_class(c) for c in root.children)
    if root.kind == "ClassDecl":
        return print_class(root)
    if root.kind in ("MethodDecl", "FieldDecl", "CtorDecl"):
        return "\n".join(print_member(root, 0)) + "\n"
    return print_expr(root)


def _modifiers(node: AstNode) -> str:
    return "".join(f"{m} " for m in ("static", "native") if m in node.flags)


def print_class(cls: AstNode) -> str:
    head = f"{_modifiers(cls)}class {cls.text}"
    members = cls.children
    if members and members[0].kind == "TypeRef":
        head += f" : {members[0].text}"
        members = members[1:]
    lines = [head + " {"]
    for m in members:
        lines.extend(print_member(m, 1))
    lines.append("}")
    return "\n".join(lines) + "\n"


def _params(params: list[AstNode]) -> str:
    return ", ".join(f"{p.children[0].text} {p.text}" for p in params)


def print_member(m: AstNode, depth: int) -> list[str]:
    pad = INDENT * depth
    if m.kind == "FieldDecl":
        return [f"{pad}{_modifiers(m)}{m.children[0].text} {m.text};"]
    if m.kind == "CtorDecl":
        head = f"{pad}{m.text}({_params(m.children_of('Param'))})"
        return _block_lines(head, m.child("Block"), depth)
    tparams = m.child("TypeArgList")
    tp = f"<{', '.join(t.text for t in tparams.children)}>" if tparams else ""
    head = (f"{pad}{_modifiers(m)}{m.children[0].text} {m.text}{tp}"
            f"({_params(m.children_of('Param'))})")
    body = m.child("Block")
    if body is None:
        return [head + ";"]
    return _block_lines(head, body, depth)


def _block_lines(head: str, block: AstNode, depth: int) -> list[str]:
    lines = [head + " {"]
    for s in block.children:
        lines.extend(print_stmt(s, depth + 1))
    lines.append(INDENT * depth + "}")
    return lines


def print_stmt(s: AstNode, depth: int) -> list[str]:
    pad = INDENT * depth
    k = s.kind
    if k == "If":
        lines = _block_lines(f"{pad}if ({print_expr(s.children[0])})", s.children[1], depth)
        if len(s.children) > 2:
            tail = _block_lines("else", s.children[2], depth)
            lines[-1] = lines[-1] + " " + tail[0]
            lines.extend(tail[1:])
        return lines
    if k == "Return":
        if s.children:
            return [f"{pad}return {print_expr(s.children[0])};"]
        return [f"{pad}return;"]
    if k == "Throw":
        return [f"{pad}throw {print_expr(s.children[0])};"]
    if k == "LocalDecl":
        init = f" = {print_expr(s.children[1])}" if len(s.children) > 1 else ""
        return [f"{pad}{s.children[0].text} {s.text}{init};"]
    if k == "Assign":
        return [f"{pad}{print_expr(s.children[0])} = {print_expr(s.children[1])};"]
    if k == "ExprStmt":
        return [f"{pad}{print_expr(s.children[0])};"]
    if k == "Block":
        # nested bare blocks do not occur in parsed trees
        raise ValueError("bare block statement")
    raise ValueError(f"not a statement: {k}")


def _prec(e: AstNode) -> int:
    if e.kind == "BinaryOp":
        return _PRECEDENCE[e.text]
    if e.kind == "UnaryOp":
        return _UNARY_PREC
    if e.kind == "Literal" and e.text.startswith("-"):
        return _UNARY_PREC
    return _POSTFIX_PREC + 1


def _wrap(e: AstNode, min_prec: int) -> str:
    text = print_expr(e)
    return f"({text})" if _prec(e) < min_prec else text


def _targs(tal: AstNode | None) -> str:
    if tal is None:
        return ""
    return "<" + ", ".join(t.text for t in tal.children) + ">"


def print_expr(e: AstNode) -> str:
    k = e.kind
    if k == "Literal":
        return e.text
    if k == "Identifier":
        return e.text + _targs(e.child("TypeArgList"))
    if k == "BinaryOp":
        p = _PRECEDENCE[e.text]
        # left-associative: the right operand needs strictly higher precedence
        return f"{_wrap(e.children[0], p)} {e.text} {_wrap(e.children[1], p + 1)}"
    if k == "UnaryOp":
        return f"{e.text}{_wrap(e.children[0], _UNARY_PREC)}"
    if k == "MemberAccess":
        return f"{_wrap(e.children[0], _POSTFIX_PREC)}.{e.text}"
    if k == "Invocation":
        callee, tal, args = invocation_parts(e)
        return f"{print_expr(callee)}{_targs(tal)}({', '.join(print_expr(a) for a in args)})"
    if k == "ObjectCreation":
        args = ", ".join(print_expr(a) for a in e.children[1:])
        return f"new {e.children[0].text}({args})"
    raise ValueError(f"not an expression: {k}")
