"""Lexer and recursive-descent parser for the ``.ul`` subject language."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Optional

from .syntax import AstNode, SourceFile, Span, SyntaxTree, number_nodes

KEYWORDS = frozenset({
    "class", "static", "native", "if", "else", "return", "throw", "new",
    "true", "false", "null", "this",
    "int", "long", "bool", "string", "void", "object",
})
TYPE_KEYWORDS = frozenset({"int", "long", "bool", "string", "void", "object"})

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<number>[0-9]+)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<op>==|!=|<=|>=|&&|\|\||[{}()\[\];,.=<>+\-*/%!:])
""", re.VERBOSE | re.DOTALL)

INT_MIN, INT_MAX = -(2 ** 63), 2 ** 63 - 1


class SyntaxError(Exception):  # noqa: A001 - mirrors the diagnostic name
    def __init__(self, path: str, line: int, col: int, message: str,
                 expected: frozenset = frozenset()):
        self.path, self.line, self.col = path, line, col
        self.message = message
        self.expected = expected
        super().__init__(f"{path}:{line}:{col}: {message}")


@dataclass(frozen=True)
class Token:
    kind: str   # "ident", "number", "string", "eof", or the keyword/operator itself
    text: str
    line: int
    col: int
    offset: int

    @property
    def end(self) -> int:
        return self.offset + len(self.text)


def tokenize(src: SourceFile) -> list[Token]:
    text = src.content
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise SyntaxError(src.path, line, pos - line_start + 1,
                              f"unexpected character {text[pos]!r}")
        group = m.lastgroup
        lexeme = m.group()
        if group == "ident":
            kind = lexeme if lexeme in KEYWORDS else "ident"
        elif group == "op":
            kind = lexeme
        else:
            kind = group
        if group not in ("ws", "comment"):
            tokens.append(Token(kind, lexeme, line, pos - line_start + 1, pos))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            line_start = pos + lexeme.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1, pos))
    return tokens


# binary operators by precedence level, loosest first
_BINARY_LEVELS = [("||",), ("&&",), ("==", "!="), ("<", "<=", ">", ">="),
                  ("+", "-"), ("*", "/", "%")]


class Parser:
    def __init__(self, src: SourceFile):
        self.src = src
        self.tokens = tokenize(src)
        self.pos = 0
        self._expected: set[str] = set()
        self._expected_at = 0

    # -- token helpers ----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def check(self, *kinds: str) -> bool:
        if self._expected_at != self.pos:
            self._expected = set()
            self._expected_at = self.pos
        self._expected.update(kinds)
        return self.tok.kind in kinds

    def accept(self, kind: str) -> Optional[Token]:
        if self.check(kind):
            t = self.tok
            self.pos += 1
            return t
        return None

    def expect(self, kind: str) -> Token:
        t = self.accept(kind)
        if t is None:
            self.error()
        return t

    def error(self, message: str = None):
        t = self.tok
        expected = frozenset(self._expected) if self._expected_at == self.pos else frozenset()
        found = "end of input" if t.kind == "eof" else repr(t.text)
        if message is None:
            message = f"unexpected {found}; expected one of: {', '.join(sorted(expected))}"
        raise SyntaxError(self.src.path, t.line, t.col, message, expected)

    def node(self, kind: str, start: Token, text: str = "", children=None,
             flags=frozenset()) -> AstNode:
        end = self.tokens[self.pos - 1].end if self.pos > 0 else start.offset
        span = Span(start.line, start.col, max(end - start.offset, 0), start.offset)
        return AstNode(kind, text, list(children or []), frozenset(flags), span)

    # -- declarations -----------------------------------------------------

    def parse_unit(self) -> AstNode:
        start = self.tok
        classes = []
        while not self.check("eof"):
            classes.append(self.parse_class())
        return self.node("CompilationUnit", start, children=classes)

    def parse_modifiers(self) -> set:
        mods = set()
        while self.check("static", "native"):
            t = self.tok
            if t.kind in mods:
                self.error(f"duplicate modifier {t.kind!r}")
            mods.add(t.kind)
            self.pos += 1
        return mods

    def parse_class(self) -> AstNode:
        start = self.tok
        mods = self.parse_modifiers()
        if "native" in mods:
            self.error("classes cannot be native")
        self.expect("class")
        name = self.expect("ident").text
        children = []
        if self.accept(":"):
            t = self.tok
            children.append(self.node("TypeRef", t, self.expect("ident").text))
        self.expect("{")
        while not self.check("}"):
            if self.tok.kind == "eof":
                self.error()
            children.append(self.parse_member(name))
        self.expect("}")
        return self.node("ClassDecl", start, name, children, mods)

    def parse_type(self) -> AstNode:
        t = self.tok
        if self.check(*TYPE_KEYWORDS) or self.check("ident"):
            self.pos += 1
            return self.node("TypeRef", t, t.text)
        self.error()

    def parse_member(self, class_name: str) -> AstNode:
        start = self.tok
        mods = self.parse_modifiers()
        if self.tok.kind == "ident" and self.tok.text == class_name and self.peek().kind == "(":
            if mods:
                self.error("constructors take no modifiers")
            self.pos += 1
            params = self.parse_params()
            body = self.parse_block()
            return self.node("CtorDecl", start, class_name, params + [body])
        rtype = self.parse_type()
        name = self.expect("ident").text
        if self.check(";"):
            if rtype.text == "void":
                self.error("fields cannot be void")
            if "native" in mods:
                self.error("fields cannot be native")
            self.pos += 1
            return self.node("FieldDecl", start, name, [rtype], mods)
        children = [rtype]
        if self.check("<"):
            children.append(self.parse_type_params())
        children += self.parse_params()
        if "native" in mods:
            self.expect(";")
        else:
            children.append(self.parse_block())
        return self.node("MethodDecl", start, name, children, mods)

    def parse_type_params(self) -> AstNode:
        start = self.expect("<")
        names = []
        while True:
            t = self.tok
            names.append(self.node("TypeRef", t, self.expect("ident").text))
            if not self.accept(","):
                break
        self.expect(">")
        return self.node("TypeArgList", start, children=names)

    def parse_params(self) -> list[AstNode]:
        self.expect("(")
        params = []
        if not self.check(")"):
            while True:
                start = self.tok
                ptype = self.parse_type()
                name = self.expect("ident").text
                params.append(self.node("Param", start, name, [ptype]))
                if not self.accept(","):
                    break
        self.expect(")")
        return params

    # -- statements -------------------------------------------------------

    def parse_block(self) -> AstNode:
        start = self.expect("{")
        stmts = []
        while not self.check("}"):
            if self.tok.kind == "eof":
                self.error()
            stmts.append(self.parse_statement())
        self.expect("}")
        return self.node("Block", start, children=stmts)

    def parse_body(self) -> AstNode:
        """A braced block, or a single statement wrapped in a Block."""
        if self.check("{"):
            return self.parse_block()
        start = self.tok
        stmt = self.parse_statement()
        return self.node("Block", start, children=[stmt])

    def _at_local_decl(self) -> bool:
        t = self.tok
        if t.kind in TYPE_KEYWORDS:
            return True
        return t.kind == "ident" and self.peek().kind == "ident"

    def parse_statement(self) -> AstNode:
        start = self.tok
        if self.accept("if"):
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            children = [cond, self.parse_body()]
            if self.accept("else"):
                children.append(self.parse_body())
            return self.node("If", start, children=children)
        if self.accept("return"):
            children = [] if self.check(";") else [self.parse_expr()]
            self.expect(";")
            return self.node("Return", start, children=children)
        if self.accept("throw"):
            value = self.parse_expr()
            self.expect(";")
            return self.node("Throw", start, children=[value])
        if self._at_local_decl():
            ltype = self.parse_type()
            name = self.expect("ident").text
            children = [ltype]
            if self.accept("="):
                children.append(self.parse_expr())
            self.expect(";")
            return self.node("LocalDecl", start, name, children)
        expr = self.parse_expr()
        if self.accept("="):
            if expr.kind not in ("Identifier", "MemberAccess") or (
                    expr.kind == "Identifier" and (expr.children or expr.text == "this")):
                raise SyntaxError(self.src.path, start.line, start.col,
                                  "invalid assignment target")
            value = self.parse_expr()
            self.expect(";")
            return self.node("Assign", start, children=[expr, value])
        self.expect(";")
        return self.node("ExprStmt", start, children=[expr])

    # -- expressions ------------------------------------------------------

    def parse_expr(self) -> AstNode:
        return self.parse_binary(0)

    def parse_binary(self, level: int) -> AstNode:
        if level == len(_BINARY_LEVELS):
            return self.parse_unary()
        start = self.tok
        left = self.parse_binary(level + 1)
        while self.check(*_BINARY_LEVELS[level]):
            op = self.tok.kind
            self.pos += 1
            right = self.parse_binary(level + 1)
            left = self.node("BinaryOp", start, op, [left, right])
        return left

    def parse_unary(self) -> AstNode:
        start = self.tok
        if self.check("!", "-"):
            op = self.tok.kind
            self.pos += 1
            if op == "-" and self.tok.kind == "number":
                value = -int(self.tok.text)
                self._check_int_range(value, start)
                self.pos += 1
                return self.node("Literal", start, str(value))
            operand = self.parse_unary()
            if op == "-" and operand.kind == "Literal" and operand.text.isdigit():
                value = -int(operand.text)
                self._check_int_range(value, start)
                return self.node("Literal", start, str(value))
            return self.node("UnaryOp", start, op, [operand])
        return self.parse_postfix()

    def _check_int_range(self, value: int, tok: Token):
        if not INT_MIN <= value <= INT_MAX:
            raise SyntaxError(self.src.path, tok.line, tok.col, "integer literal out of range")

    def _try_type_args(self) -> Optional[AstNode]:
        """Speculatively parse ``<T, ...>`` when followed by ``(`` or ``.``."""
        if self.tok.kind != "<":
            return None
        saved = self.pos
        start = self.tok
        self.pos += 1
        types = []
        while True:
            t = self.tok
            if t.kind in TYPE_KEYWORDS or t.kind == "ident":
                self.pos += 1
                types.append(self.node("TypeRef", t, t.text))
            else:
                self.pos = saved
                return None
            if self.tok.kind == ",":
                self.pos += 1
                continue
            break
        if self.tok.kind != ">" or self.peek().kind not in ("(", "."):
            self.pos = saved
            return None
        self.pos += 1
        return self.node("TypeArgList", start, children=types)

    def parse_args(self) -> list[AstNode]:
        self.expect("(")
        args = []
        if not self.check(")"):
            while True:
                args.append(self.parse_expr())
                if not self.accept(","):
                    break
        self.expect(")")
        return args

    def parse_postfix(self) -> AstNode:
        start = self.tok
        expr = self.parse_primary()
        while True:
            if self.accept("."):
                name = self.expect("ident").text
                expr = self.node("MemberAccess", start, name, [expr])
                targs = self._try_type_args()
                if targs is not None or self.check("("):
                    args = self.parse_args()
                    children = [expr] + ([targs] if targs else []) + args
                    expr = self.node("Invocation", start, children=children)
            elif expr.kind == "Identifier" and not expr.children and self.check("("):
                args = self.parse_args()
                expr = self.node("Invocation", start, children=[expr] + args)
            else:
                return expr

    def parse_primary(self) -> AstNode:
        t = self.tok
        if self.check("ident"):
            self.pos += 1
            targs = self._try_type_args()
            if targs is None:
                return self.node("Identifier", t, t.text)
            if self.tok.kind == "(":
                ident = self.node("Identifier", t, t.text)
                args = self.parse_args()
                return self.node("Invocation", t, children=[ident, targs] + args)
            return self.node("Identifier", t, t.text, [targs])
        if self.accept("this"):
            return self.node("Identifier", t, "this")
        if self.check("number"):
            self.pos += 1
            self._check_int_range(int(t.text), t)
            return self.node("Literal", t, str(int(t.text)))
        if self.check("string"):
            self.pos += 1
            try:
                value = json.loads(t.text)
            except ValueError:
                raise SyntaxError(self.src.path, t.line, t.col, "invalid string escape")
            return self.node("Literal", t, json.dumps(value))
        if self.check("true", "false", "null"):
            self.pos += 1
            return self.node("Literal", t, t.kind)
        if self.accept("new"):
            ttok = self.tok
            tname = self.expect("ident").text
            tref = self.node("TypeRef", ttok, tname)
            args = self.parse_args()
            return self.node("ObjectCreation", t, children=[tref] + args)
        if self.accept("("):
            inner = self.parse_expr()
            self.expect(")")
            return inner
        self.check("(", "new", "ident", "this", "number", "string", "true", "false", "null")
        self.error()


def parse(file: SourceFile) -> SyntaxTree:
    """Parse one source file; raises SyntaxError with position on malformed input."""
    root = Parser(file).parse_unit()
    number_nodes(root)
    return SyntaxTree(root, file)


def parse_text(content: str, path: str = "<string>") -> SyntaxTree:
    return parse(SourceFile(path, content))
