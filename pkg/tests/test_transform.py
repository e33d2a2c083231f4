from __future__ import annotations

import json
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from isoforge.fakegen import generate_basic_environment, generate_fake_code
from isoforge.parser import parse_text
from isoforge.pipeline import isolation_sources
from isoforge.printer import pretty_print
from isoforge.semantics import (
    MemberAccessRecord, MemberSig, TypeInfo, UnitSpec, check, collect_external_accesses,
    count_accesses, resolve,
)
from isoforge.syntax import Program
from isoforge.transform import (
    isolate_unit, mangle, transform_member_accesses, transform_object_creations,
)

from conftest import FIXTURES_DIR, GOLDEN_DIR, TESTS_DIR

CASES = sorted(p.parent for p in GOLDEN_DIR.glob("*/case.json"))


def load_case(case_dir: Path):
    spec = json.loads((case_dir / "case.json").read_text())
    trees = []
    for rel in spec["sources"]:
        path = (TESTS_DIR / rel).resolve()
        trees.append(parse_text(path.read_text(), path.name))
    program = Program(trees)
    return spec, program, resolve(program), UnitSpec.of(*spec["unit"])


@pytest.mark.parametrize("case_dir", CASES, ids=lambda p: p.name)
def test_golden(case_dir):
    _, program, table, unit = load_case(case_dir)
    produced = isolation_sources(program, table, unit)
    expected = {p.name: p.read_text() for p in case_dir.glob("*.ul")}
    assert produced == expected


@pytest.mark.parametrize("case_dir", [c for c in CASES if c.name.startswith("identity")],
                         ids=lambda p: p.name)
def test_identity_cases(case_dir):
    spec, program, table, unit = load_case(case_dir)
    assert spec.get("identity")
    result = isolate_unit(program, table, unit)
    assert result.records == [] and result.creations == []
    for before, after in zip(program.trees, result.trees):
        assert after.structure() == before.structure()
        assert pretty_print(after) == pretty_print(before)


def listing_program():
    return Program([parse_text((FIXTURES_DIR / "Listing.ul").read_text(), "Listing.ul")])


def test_listing_names():
    program = listing_program()
    table = resolve(program)
    result = isolate_unit(program, table, UnitSpec.of("Unit"))
    text = pretty_print(result.trees[0])
    assert "e._().ExternalCalcInt32_0()" in text
    assert "e._().ExternalCalcInt32_1()" in text
    assert "FAKE_External.staticCalcInt32_2()" in text


def test_transfer_money_rewrites(corpus, corpus_table, bank_unit):
    result = isolate_unit(corpus, corpus_table, bank_unit)
    assert result.is_success
    (tree,) = result.trees
    text = pretty_print(tree)
    assert "FAKE_DB.RunQuery" in text
    assert "RunQueryStringTokenInt32_0<int>(\"GetBalance\", userToken)" in text
    assert "New<TransferProcessor>.get(userToken)" in text
    assert "new TransferProcessor" not in text
    assert [(t, n) for _, t, n in result.creations] == [("TransferProcessor", 1)]


def test_creation_inside_argument():
    src = (FIXTURES_DIR / "Creation.ul").read_text()
    program = Program([parse_text(src, "Creation.ul")])
    table = resolve(program)
    result = isolate_unit(program, table, UnitSpec.of("Maker", "Internal"))
    text = pretty_print(result.trees[0])
    assert "return f(New<E>.get(1));" in text
    assert "new Internal()" in text


def test_count_preservation(corpus, corpus_table):
    for name in corpus_table.classes:
        if name == "Sys":
            continue
        unit = UnitSpec.of(name)
        first = transform_member_accesses(corpus, corpus_table, unit)
        imethods, imembers = count_accesses(first.records)
        assert first.rewritten_accesses == imethods + imembers
        external_news = sum(
            1 for t in corpus.trees for c in t.classes() if c.text == name
            for n in c.walk() if n.kind == "ObjectCreation" and n.children[0].text != name)
        second = transform_object_creations(first, unit)
        assert len(second.creations) == external_news


def test_replaced_nodes_are_gone(corpus, corpus_table, bank_unit):
    result = isolate_unit(corpus, corpus_table, bank_unit)
    old = {id(r.node) for r in result.records}
    for tree in result.trees:
        assert not any(id(n) in old for n in tree.root.walk())


def test_non_invasive(corpus, corpus_table, bank_unit):
    before = {t.file.path: t.structure() for t in corpus.trees}
    result = isolate_unit(corpus, corpus_table, bank_unit)
    assert {t.file.path: t.structure() for t in corpus.trees} == before
    # only the unit's file comes back
    assert [t.file.path for t in result.trees] == ["bank/TransferMoney.ul"]


def test_well_typed_after_isolation(corpus, corpus_table):
    for name in corpus_table.classes:
        if name == "Sys":
            continue
        result = isolate_unit(corpus, corpus_table, UnitSpec.of(name))
        assert result.is_success, result.diagnostics
        fakes = generate_fake_code(result.records, corpus_table)
        fakes.environment = generate_basic_environment()
        merged = corpus.replace_or_add(result.trees + fakes.trees())
        assert check(merged) == [], name


def test_operator_on_external_type_is_diagnosed():
    program = Program([parse_text((FIXTURES_DIR / "operator" / "Money.ul").read_text(), "Money.ul")])
    table = resolve(program)
    result = isolate_unit(program, table, UnitSpec.of("Wallet"))
    assert not result.is_success
    assert any("UnsupportedConstruct" in d and "operator" in d for d in result.diagnostics)


@pytest.mark.parametrize("src, unit, fragment", [
    ("class O { int f; } class U { void run(O o) { o.f = 1; } }", ["U"], "write to external field"),
    ("class U { int v; } class O { U make() { return new U(); } }"
     " class W { int run(O o) { U u = o.make(); return 1; } }", ["W", "U"], "returns unit type"),
])
def test_other_unsupported(src, unit, fragment):
    program = Program([parse_text(src, "x.ul")])
    result = isolate_unit(program, resolve(program), UnitSpec.of(*unit))
    assert not result.is_success
    assert any(fragment in d for d in result.diagnostics)


def test_chained_access_gets_one_record_per_link():
    src = """
    class Node {
        Node next;
        int value() { return 1; }
    }
    class Walker {
        int run(Node n) {
            return n.next.value();
        }
    }
    """
    program = Program([parse_text(src, "chain.ul")])
    table = resolve(program)
    result = isolate_unit(program, table, UnitSpec.of("Walker"))
    assert [r.member.name for r in result.records] == ["value", "next"]
    text = pretty_print(result.trees[0])
    assert "n._().MemberNodeNextNode_1()._().NodeValueInt32_0()" in text


# --- mangling ------------------------------------------------------------------------

def _record(container, name, kind="method", params=(), ret="int", static=False, index=0):
    member = MemberSig(name, kind, tuple(params), (), ret, static, container,
                       tuple(f"p{i}" for i in range(len(params))))
    info = TypeInfo(container, False, False, None, (member,))
    return MemberAccessRecord(index, info, member, static, (), 0, "U.f", ("U",))


def test_mangle_examples():
    assert mangle(_record("External", "calc")).text == "ExternalCalcInt32_0"
    field_name = mangle(_record("ProcessedTransfer", "IsSuccess", kind="field", ret="bool", index=2)).text
    assert field_name.startswith("Member") and "IsSuccess" in field_name and field_name.endswith("_2")
    assert mangle(_record("External", "staticCalc", static=True, index=2)).text == "staticCalcInt32_2"


def test_mangle_parts():
    m = mangle(_record("A", "go", params=("int", "string"), ret="void", index=4))
    assert m.text == "AGoInt32StringVoid_4"
    assert m.parts == ("A", "go", ("int", "string"), "void", 4)


idents = st.from_regex(r"[A-Za-z][A-Za-z0-9]{0,5}", fullmatch=True)
types = st.sampled_from(["int", "long", "bool", "string", "object", "Token"])


@given(st.lists(st.tuples(idents, idents, st.lists(types, max_size=3), types, st.booleans(),
                          st.sampled_from(["method", "field"])), min_size=1, max_size=12))
def test_mangle_injective_over_callsites(specs):
    names = set()
    for i, (container, member, params, ret, static, kind) in enumerate(specs):
        if kind == "field":
            params = ()
        m = mangle(_record(container, member, kind, params, ret, static, i))
        assert m.text.isidentifier()
        names.add(m.text)
    assert len(names) == len(specs)


def test_corpus_mangles_unique(corpus, corpus_table):
    for name in corpus_table.classes:
        records = collect_external_accesses(corpus, corpus_table, UnitSpec.of(name))
        texts = [mangle(r).text for r in records]
        assert len(set(texts)) == len(texts)
