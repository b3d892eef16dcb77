from __future__ import annotations

import json
import os

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from support import CORPUS, FIXTURES
from uast_taint.analyzer import discover_files, load_unit
from uast_taint.uast import (
    ALL_KINDS,
    CATEGORIES,
    CATEGORY_OF,
    SPECIFIC_KINDS,
    UNIVERSAL_KINDS,
    MalformedDocument,
    SchemaViolation,
    SourceLocation,
    UnknownKind,
    ValidationFailed,
    deserialize,
    make,
    serialize,
    structural_key,
    validate,
    walk,
)

L = SourceLocation("t", 1, 1, 1, 5)


def lit(v, t="number"):
    return make("Literal", L, value=v, litType=t)


def ident(n):
    return make("Identifier", L, name=n)


def test_registry_has_32_kinds_in_five_categories():
    assert len(ALL_KINDS) == 32
    assert set(CATEGORIES) == {"Basic", "Statement", "Expression", "Declaration", "Type"}
    assert [len(CATEGORIES[c]) for c in ("Basic", "Statement", "Expression", "Declaration", "Type")] == [4, 10, 12, 4, 2]
    assert all(CATEGORY_OF[k] in CATEGORIES for k in ALL_KINDS)


def test_universal_specific_partition():
    assert set(SPECIFIC_KINDS) == {"YieldExpression", "ChanType"}
    assert not (set(SPECIFIC_KINDS) & UNIVERSAL_KINDS)
    assert len(UNIVERSAL_KINDS) + len(SPECIFIC_KINDS) == 32
    assert len(UNIVERSAL_KINDS) / 32 >= 0.60


def test_source_location_rejects_inverted_range():
    with pytest.raises(ValueError):
        SourceLocation("f", 3, 1, 2, 1)
    with pytest.raises(ValueError):
        SourceLocation("f", 2, 5, 2, 4)
    SourceLocation("f", 2, 4, 2, 4)


def test_validate_minimal_literal():
    assert validate(lit("5", "string")) == []


def test_validate_if_missing_test_names_slot():
    node = make("IfStatement", L, consequent=[make("Noop", L)])
    diags = validate(node)
    assert len(diags) == 1
    assert diags[0].severity == "error"
    assert "test" in diags[0].node_path and "'test'" in diags[0].message


def test_validate_literal_in_statement_slot():
    node = make("RangeStatement", L, left=ident("x"), right=ident("xs"), body=[lit(1)])
    diags = validate(node)
    assert len(diags) == 1
    assert diags[0].node_path == "body[0]"


def test_validate_rejects_shared_child_and_extra_slot():
    shared = lit(1)
    node = make("ArrayLiteral", L, elements=[shared, shared])
    assert any("more than once" in d.message for d in validate(node))
    bad = make("Literal", L, value=1, litType="number", bogus=lit(2))
    assert any("no slot" in d.message for d in validate(bad))


def test_validate_diagnostics_in_preorder():
    node = make(
        "PackageDeclaration",
        L,
        name="m",
        body=[make("IfStatement", L, consequent=[]), make("ExpressionStatement", L)],
    )
    paths = [d.node_path for d in validate(node)]
    assert paths == ["body[0].test", "body[1].expression"]


def test_serialize_literal_canonical():
    doc = serialize(lit(5))
    assert b'"kind":"Literal"' in doc
    assert b" " not in doc.replace(b'"file":"t"', b"")
    data = json.loads(doc)
    assert data["version"] == "1"
    assert list(data["root"]) == sorted(data["root"])


def test_serialize_rejects_invalid_tree():
    with pytest.raises(ValidationFailed):
        serialize(make("IfStatement", L))


def test_integer_literal_stays_integer():
    doc = serialize(lit(5))
    assert b'"value":5' in doc and b"5.0" not in doc


def test_deserialize_literal():
    node = deserialize(serialize(lit(5)))
    assert node.kind == "Literal" and node.value == 5


def test_deserialize_unknown_kind():
    doc = json.dumps({"version": "1", "root": {"kind": "FrobNode", "loc": {"startLine": 1, "startCol": 1, "endLine": 1, "endCol": 1}}})
    with pytest.raises(UnknownKind):
        deserialize(doc)


def test_deserialize_malformed_reports_position():
    with pytest.raises(MalformedDocument) as info:
        deserialize(b'{"version": "1",\n "root": }')
    assert info.value.line == 2


def test_deserialize_schema_violations():
    with pytest.raises(SchemaViolation):
        deserialize(b'{"version": "2", "root": {}}')
    with pytest.raises(SchemaViolation):
        deserialize(b"[]")
    with pytest.raises(SchemaViolation):
        deserialize(json.dumps({"version": "1", "root": {"kind": "Literal", "loc": {"startLine": 0, "startCol": 1, "endLine": 1, "endCol": 1}}}))


def test_hand_authored_channel_document():
    with open(os.path.join(FIXTURES, "chan_send_receive.uast.json"), encoding="utf-8") as fh:
        tree = deserialize(fh.read(), file_hint="chan_send_receive.uast.json")
    assert validate(tree) == []
    kinds = [n.kind for n, _, _ in walk(tree)]
    assert "ChanType" in kinds
    assert all(n.lang == "raw" for n, _, _ in walk(tree))


def test_walk_single_literal():
    assert len(walk(lit(1))) == 1


def test_walk_preorder_if():
    node = make(
        "IfStatement",
        L,
        test=ident("c"),
        consequent=[make("ExpressionStatement", L, expression=ident("a"))],
        alternate=[make("ExpressionStatement", L, expression=ident("b"))],
    )
    visits = walk(node)
    names = [(n.kind, slot, depth) for n, slot, depth in visits]
    assert names == [
        ("IfStatement", None, 0),
        ("Identifier", "test", 1),
        ("ExpressionStatement", "consequent", 1),
        ("Identifier", "expression", 2),
        ("ExpressionStatement", "alternate", 1),
        ("Identifier", "expression", 2),
    ]
    seen = []
    walk(node, lambda n, s, d: seen.append(n.kind))
    assert seen == [v[0] for v in names]


def _census(doc: dict) -> int:
    """Independent node count over the serialized document."""
    if isinstance(doc, dict):
        own = 1 if "kind" in doc else 0
        return own + sum(_census(v) for k, v in doc.items() if k != "loc")
    if isinstance(doc, list):
        return sum(_census(v) for v in doc)
    return 0


def test_walk_count_matches_serialized_census():
    for path in discover_files(CORPUS):
        with open(path, encoding="utf-8") as fh:
            unit = load_unit(path, fh.read())
        assert len(walk(unit)) == _census(json.loads(serialize(unit))["root"]), path


# -- random small trees ------------------------------------------------------

_names = st.sampled_from(["a", "b", "xs", "f"])
_lits = st.one_of(
    st.integers(-5, 5).map(lambda v: lit(v)),
    st.text("ab\"é", max_size=3).map(lambda v: lit(v, "string")),
    st.booleans().map(lambda v: lit(v, "boolean")),
)


def _expr_tree():
    leaf = st.one_of(_lits, _names.map(ident))
    return st.recursive(
        leaf,
        lambda sub: st.one_of(
            st.tuples(st.sampled_from(["+", "-", "<"]), sub, sub).map(
                lambda t: make("BinaryExpression", L, operator=t[0], left=t[1], right=t[2])
            ),
            st.tuples(sub, st.lists(sub, max_size=3)).map(lambda t: make("CallExpression", L, callee=t[0], arguments=t[1])),
            st.lists(sub, max_size=3).map(lambda xs: make("ArrayLiteral", L, elements=xs)),
            st.tuples(sub, st.sampled_from(["f", "g"])).map(lambda t: make("MemberAccess", L, object=t[0], property=t[1])),
        ),
        max_leaves=8,
    )


@st.composite
def trees(draw):
    exprs = draw(st.lists(_expr_tree(), min_size=1, max_size=3))
    body = [make("ExpressionStatement", L, expression=e) for e in exprs]
    return make("PackageDeclaration", L, name="m", body=body)


def _copy_tree(node):
    """Equal tree rebuilt bottom-up with keyword order reversed."""
    fields = {}
    for key in reversed(list(node.fields)):
        value = node.fields[key]
        if hasattr(value, "kind"):
            value = _copy_tree(value)
        elif isinstance(value, tuple):
            value = [_copy_tree(v) if hasattr(v, "kind") else v for v in value]
        fields[key] = value
    return make(node.kind, node.loc, node.lang, node.synthetic, **fields)


@settings(max_examples=120, deadline=None)
@given(trees())
def test_round_trip_random_trees(tree):
    doc = serialize(tree)
    back = deserialize(doc)
    assert structural_key(back) == structural_key(tree)
    assert serialize(back) == doc


@settings(max_examples=60, deadline=None)
@given(trees())
def test_construction_order_does_not_change_bytes(tree):
    assert serialize(_copy_tree(tree)) == serialize(tree)


@settings(max_examples=60, deadline=None)
@given(trees())
def test_validate_and_walk_are_deterministic(tree):
    assert validate(tree) == validate(tree) == []
    assert [(id(n), s, d) for n, s, d in walk(tree)] == [(id(n), s, d) for n, s, d in walk(tree)]
