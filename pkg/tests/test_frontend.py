"""Parser, printer and tree invariants."""
from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from isoforge.parser import SyntaxError, parse, parse_text
from isoforge.pipeline import CORPUS_DIR
from isoforge.printer import pretty_print
from isoforge.syntax import STATEMENT_KINDS, SourceFile, method_body

CORPUS_FILES = sorted(CORPUS_DIR.rglob("*.ul"))


def roundtrip(tree):
    return parse_text(pretty_print(tree), tree.file.path)


def test_empty_class():
    tree = parse_text("class A { }")
    classes = tree.classes()
    assert [c.text for c in classes] == ["A"]
    assert classes[0].children == []
    assert pretty_print(tree) == "class A {\n}\n"


def test_transfer_money_shape():
    path = CORPUS_DIR / "bank" / "TransferMoney.ul"
    tree = parse(SourceFile("TransferMoney.ul", path.read_text()))
    (cls,) = tree.classes()
    methods = [m for m in cls.children if m.kind == "MethodDecl"]
    assert len(methods) == 1 and methods[0].text == "TransferMoney"
    body = method_body(methods[0])
    assert len(body.children) == 7
    assert all(s.kind in STATEMENT_KINDS for s in body.children)


def test_missing_semicolon_reports_closing_brace():
    src = "class A { int f() { return 1 } }"
    with pytest.raises(SyntaxError) as info:
        parse_text(src, "a.ul")
    err = info.value
    # the offending token is the `}` right after `1`
    assert (err.line, err.col) == (1, src.index("1 }") + 3)
    assert ";" in err.expected
    assert str(err).startswith("a.ul:1:")


@pytest.mark.parametrize("src, where", [
    ("class A { int f( { } }", (1, 18)),
    ("class { }", (1, 7)),
    ("class A { int f() { x = ; } }", (1, 25)),
])
def test_error_positions(src, where):
    with pytest.raises(SyntaxError) as info:
        parse_text(src)
    assert (info.value.line, info.value.col) == where


def test_error_on_second_line():
    with pytest.raises(SyntaxError) as info:
        parse_text("class A {\n  int f() { return 1 + ; }\n}")
    assert info.value.line == 2


def test_unexpected_character():
    with pytest.raises(SyntaxError):
        parse_text("class A { # }")


def test_out_of_range_literal():
    with pytest.raises(SyntaxError):
        parse_text("class A { long f() { return 9223372036854775808; } }")
    # the most negative value folds into a single literal and is accepted
    parse_text("class A { long f() { return -9223372036854775808; } }")


def test_type_arguments_at_callsite():
    tree = parse_text("class A { int f() { return DB.Q<int>(\"x\"); } }")
    kinds = [n.kind for n in tree.root.walk()]
    assert "TypeArgList" in kinds


def test_less_than_is_not_type_args():
    tree = parse_text("class A { bool f(int a, int b) { return a < b; } }")
    assert "TypeArgList" not in [n.kind for n in tree.root.walk()]


@pytest.mark.parametrize("path", CORPUS_FILES, ids=lambda p: p.name)
def test_corpus_roundtrip(path):
    tree = parse(SourceFile(path.name, path.read_text()))
    again = roundtrip(tree)
    assert again.structure() == tree.structure()
    assert pretty_print(again) == pretty_print(tree)


@pytest.mark.parametrize("path", CORPUS_FILES, ids=lambda p: p.name)
def test_spans_nest_and_ids_are_dense(path):
    tree = parse(SourceFile(path.name, path.read_text()))
    ids = []
    for node in tree.root.walk():
        ids.append(node.node_id)
        for child in node.children:
            assert node.span.contains(child.span), (node.kind, child.kind)
    assert sorted(ids) == list(range(len(ids)))


# --- generated programs --------------------------------------------------------------

names = st.sampled_from(["a", "b", "c"])
int_lits = st.integers(min_value=-5, max_value=2000).map(str)
str_lits = st.sampled_from(['""', '"x"', '"a b"', '"q\\"t"'])


def exprs():
    leaves = st.one_of(names, int_lits, str_lits, st.sampled_from(["true", "false", "null", "this"]))

    def extend(inner):
        return st.one_of(
            st.tuples(inner, st.sampled_from(["+", "-", "*", "/", "%", "<", "<=", "==", "!=",
                                              "&&", "||"]), inner).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
            inner.map(lambda e: f"!({e})"),
            inner.map(lambda e: f"-({e})"),
            st.tuples(names, st.lists(inner, max_size=2)).map(
                lambda t: f"{t[0]}.m({', '.join(t[1])})"),
            st.tuples(names, inner).map(lambda t: f"{t[0]}.g<int>({t[1]})"),
            st.lists(inner, max_size=2).map(lambda a: f"new T({', '.join(a)})"),
            names.map(lambda n: f"{n}.f"),
        )
    return st.recursive(leaves, extend, max_leaves=8)


def stmts():
    simple = st.one_of(
        exprs().map(lambda e: f"return {e};"),
        exprs().map(lambda e: f"int v = {e};"),
        st.tuples(names, exprs()).map(lambda t: f"{t[0]} = {t[1]};"),
        names.map(lambda n: f"{n}.run();"),
        st.just('throw "boom";'),
    )

    def extend(inner):
        return st.tuples(exprs(), st.lists(inner, max_size=2), st.lists(inner, max_size=2),
                         st.booleans()).map(
            lambda t: f"if ({t[0]}) {{ {' '.join(t[1])} }}"
                      + (f" else {{ {' '.join(t[2])} }}" if t[3] else ""))
    return st.recursive(simple, extend, max_leaves=5)


@settings(max_examples=150, deadline=None)
@given(st.lists(stmts(), max_size=4))
def test_generated_roundtrip(body):
    src = "class A { int f(int a, int b, int c) { " + " ".join(body) + " } }"
    tree = parse_text(src)
    printed = pretty_print(tree)
    again = parse_text(printed)
    assert again.structure() == tree.structure()
    assert pretty_print(again) == printed


@settings(max_examples=100, deadline=None)
@given(exprs())
def test_generated_spans_nest(expr):
    tree = parse_text("class A { int f() { return " + expr + "; } }")
    for node in tree.root.walk():
        for child in node.children:
            assert node.span.contains(child.span)
