from __future__ import annotations

import itertools
import json

import pytest

from support import cond, interpret, leaf_values, tainted, var
from uast_taint.engine import AnalysisConfig, ConfigError, load_config
from uast_taint.engine.interpreter import Interpreter, Task
from uast_taint.engine.values import (
    Obj,
    PathCondition,
    Phi,
    Prim,
    Sym,
    Taint,
    TraceStep,
    cap_phi,
    feasible_leaves,
    iter_leaves,
    make_phi,
    restrict_path,
)
from uast_taint.uast import SourceLocation, make

L = SourceLocation("t", 1, 1, 1, 1)
TAINTED = Taint.source("t", TraceStep("source", L, "t"))


def fresh():
    interp = Interpreter(Task())
    return interp, interp.new_context("minipy")


# -- evaluate -------------------------------------------------------------------


def test_literal_evaluates_to_prim():
    interp, ctx = fresh()
    value, _ = interp.evaluate(make("Literal", L, value=5, litType="number"), ctx)
    assert value == Prim("number", 5)


def test_identifier_after_assignment():
    interp, ctx, _ = interpret("x = 1\n")
    assert var(interp, ctx, "x") == Prim("number", 1)


def test_unresolved_identifier_is_sym():
    interp, ctx = fresh()
    value, _ = interp.evaluate(make("Identifier", L, name="undefinedName"), ctx)
    assert isinstance(value, Sym) and (value.type, value.name) == ("unknown", "undefinedName")


def test_sequence_yields_last_and_yield_is_conservative():
    interp, ctx = fresh()
    seq = make("Sequence", L, expressions=[make("Literal", L, value=1, litType="number"), make("Literal", L, value="z", litType="string")])
    assert interp.evaluate(seq, ctx)[0] == Prim("string", "z")
    y, _ = interp.evaluate(make("YieldExpression", L, argument=make("Literal", L, value=1, litType="number")), ctx)
    assert isinstance(y, Sym)


# -- call -----------------------------------------------------------------------


def test_identity_call_returns_argument():
    interp, ctx, _ = interpret("def ident(a):\n    return a\nz = ident(7)\n")
    assert var(interp, ctx, "z") == Prim("number", 7)


def test_missing_argument_is_uninit_and_extras_ignored():
    interp, ctx, _ = interpret("def f(a, b):\n    return b\nz = f(1)\nw = f(1, 2, 3)\n")
    z = var(interp, ctx, "z")
    assert isinstance(z, Sym)
    assert var(interp, ctx, "w") == Prim("number", 2)
    assert any("used before it is defined" in w.message for w in interp.task.warnings)


def test_recursion_bounded_at_k_descents():
    src = "def f(n):\n    return f(n + 1)\nr = f(0)\n"
    interp, ctx, _ = interpret(src)
    assert interp.task.stats["call_descents"] == 10
    assert interp.task.stats["depth_limited"] == 1
    r = var(interp, ctx, "r")
    assert isinstance(r, Sym) and r.type == "depth-limited"


@pytest.mark.parametrize("k", [1, 4, 25])
def test_call_depth_follows_config(k):
    src = "def f(n):\n    if n > 0:\n        return f(n - 1)\n    return 0\nr = f(100)\n"
    interp, ctx, _ = interpret(src, config=AnalysisConfig(max_call_depth=k))
    assert interp.task.stats["call_descents"] == k


def test_closure_reads_defining_scope():
    src = "x = 3\ndef outer():\n    def inner():\n        return x\n    return inner\ng = outer()\nv = g()\n"
    interp, ctx, _ = interpret(src)
    assert var(interp, ctx, "v") == Prim("number", 3)


def test_closures_capture_distinct_environments():
    src = "def mk(v):\n    def get():\n        return v\n    return get\na = mk(1)\nb = mk(2)\nx = a()\ny = b()\n"
    interp, ctx, _ = interpret(src)
    assert (var(interp, ctx, "x").value, var(interp, ctx, "y").value) == (1, 2)


def test_unknown_function_model():
    interp, ctx, _ = interpret("t = taint()\nz = mystery(t, 1)\nw = mystery(1)\nobj = mystery2()\n")
    z = var(interp, ctx, "z")
    assert isinstance(z, Sym) and tainted(z)
    assert not tainted(var(interp, ctx, "w"))


def test_unknown_method_does_not_taint_receiver():
    src = "class C:\n    pass\no = C()\no.f = 1\no.put(taint())\nv = o.f\n"
    interp, ctx, _ = interpret(src)
    assert not tainted(var(interp, ctx, "v"))


# -- branch / merge -------------------------------------------------------------


def test_concrete_branch_no_phi():
    interp, ctx, _ = interpret("if True:\n    x = 1\nelse:\n    x = 2\n")
    assert var(interp, ctx, "x") == Prim("number", 1)
    assert interp.task.stats["forks"] == 0


def test_symbolic_branch_builds_phi():
    interp, ctx, _ = interpret("if c:\n    x = 1\nelse:\n    x = 2\n")
    x = var(interp, ctx, "x")
    assert isinstance(x, Phi)
    leaves = {(tuple((p.key[2], p.polarity) for p in path), leaf.value) for path, leaf in iter_leaves(x)}
    assert leaves == {((("c", True),), 1), ((("c", False),), 2)}
    assert ctx.pi == ()


def test_nested_unknown_branches_match_enumeration():
    src = "if a:\n    if b:\n        x = 1\n    else:\n        x = 2\nelse:\n    if b:\n        x = 3\n    else:\n        x = 4\n"
    interp, ctx, _ = interpret(src)
    x = var(interp, ctx, "x")
    assert isinstance(x, Phi) and x.depth == 2
    leaves = list(iter_leaves(x))
    assert len(leaves) == 4
    expect = {(True, True): 1, (True, False): 2, (False, True): 3, (False, False): 4}
    for (pa, pb), want in expect.items():
        got = restrict_path(x, (cond("a", pa), cond("b", pb)))
        assert got == Prim("number", want)


def test_identical_arms_collapse():
    interp, ctx, _ = interpret("if c:\n    x = 1\nelse:\n    x = 1\n")
    assert var(interp, ctx, "x") == Prim("number", 1)


def test_field_merge_builds_phi_of_field_values():
    src = "class O:\n    pass\no = O()\no.f = 'clean'\nif c:\n    o.f = taint()\nv = o.f\n"
    interp, ctx, _ = interpret(src)
    v = var(interp, ctx, "v")
    assert isinstance(v, Phi)
    assert tainted(v, (cond("c", True),)) and not tainted(v, (cond("c", False),))


def test_merge_beyond_cap_becomes_sym_with_union_taint():
    src = "x = 0\nif a:\n    x = taint()\n    if b:\n        x = 2\n        if d:\n            x = 3\n"
    interp, ctx, _ = interpret(src, config=AnalysisConfig(path_merge_cap=2))
    x = var(interp, ctx, "x")
    assert isinstance(x, Sym) and x.type == "merged"
    assert x.taint.labels == {"user-input"}


def test_cap_phi_respects_depth():
    phi = make_phi("k1", Prim("number", 1), make_phi("k2", Prim("number", 2, TAINTED), Prim("number", 3)))
    assert cap_phi(phi, 2) is phi
    capped = cap_phi(phi, 1)
    assert isinstance(capped, Sym) and capped.taint.labels == {"t"}


def test_merge_restores_path_condition():
    interp, ctx, _ = interpret("if c:\n    x = 1\nif d:\n    y = 2\n")
    assert ctx.pi == ()


def test_aliasing_mutation_visible_through_both_names():
    src = "class O:\n    pass\na = O()\nb = a\nif c:\n    b.f = 1\nelse:\n    b.f = 2\nv = a.f\n"
    interp, ctx, _ = interpret(src)
    assert leaf_values(var(interp, ctx, "v")) == {("number", 1), ("number", 2)}


# -- fields -----------------------------------------------------------------------


def test_read_written_field():
    interp, ctx, _ = interpret("class O:\n    pass\no = O()\no.f = 1\nv = o.f\n")
    assert var(interp, ctx, "v") == Prim("number", 1)


def test_absent_field_is_memoized_sym():
    interp, ctx, _ = interpret("class O:\n    pass\no = O()\na = o.g\nb = o.g\n")
    a, b = var(interp, ctx, "a"), var(interp, ctx, "b")
    assert isinstance(a, Sym) and a.name.endswith(".g")
    assert a == b


def test_symbolic_field_access_is_field_sensitive():
    interp, ctx, _ = interpret("a = unknown.f\nb = unknown.f\nc = unknown.g\n")
    a, b, c = (var(interp, ctx, n) for n in "abc")
    assert a.name == "unknown.f" and a == b and a != c


def test_read_distributes_over_phi():
    src = "class O:\n    pass\np = O()\np.f = 1\nq = O()\nq.f = 2\nif c:\n    o = p\nelse:\n    o = q\nv = o.f\n"
    interp, ctx, _ = interpret(src)
    v = var(interp, ctx, "v")
    assert restrict_path(v, (cond("c", True),)) == Prim("number", 1)
    assert restrict_path(v, (cond("c", False),)) == Prim("number", 2)


def test_write_one_field_leaves_sibling():
    src = "class O:\n    pass\no = O()\no.g = 5\nbefore = o.g\no.f = 1\nafter = o.g\n"
    interp, ctx, _ = interpret(src)
    assert var(interp, ctx, "before") == var(interp, ctx, "after") == Prim("number", 5)


def test_write_through_sym_materializes_object():
    interp, ctx, _ = interpret("s = unknown\ns.f = 1\nv = s.f\nw = s.g\n")
    assert isinstance(var(interp, ctx, "s"), Obj)
    assert var(interp, ctx, "v") == Prim("number", 1)
    assert var(interp, ctx, "w").name == "unknown.g"


def test_write_into_phi_leaves():
    src = "class O:\n    pass\np = O()\nq = O()\nif c:\n    o = p\nelse:\n    o = q\no.f = 7\na = p.f\nb = q.f\n"
    interp, ctx, _ = interpret(src)
    assert var(interp, ctx, "a") == var(interp, ctx, "b") == Prim("number", 7)


# -- conditions ---------------------------------------------------------------------


def test_evaluate_condition_three_valued():
    interp, _ = fresh()
    assert interp.evaluate_condition(Prim("boolean", False)) is False
    assert interp.evaluate_condition(Prim("number", 3)) is True
    c = Sym("unknown", "c")
    assert interp.evaluate_condition(c) is None
    key = ("sym", "unknown", "c", None)
    assert interp.evaluate_condition(c, (PathCondition(key, True),)) is True
    assert interp.evaluate_condition(c, (PathCondition(key, False),)) is False


def test_reused_condition_skips_infeasible_arm():
    src = "if c:\n    if c:\n        x = 1\n    else:\n        x = 2\nelse:\n    x = 3\n"
    interp, ctx, _ = interpret(src)
    inner = [(loc.start_line, arm) for loc, arm in interp.task.stats["arm_entries"] if loc.start_line == 2]
    assert inner == [(2, True)]
    x = var(interp, ctx, "x")
    assert leaf_values(x) == {("number", 1), ("number", 3)}
    assert len(feasible_leaves(x)) == 2


def test_negation_shares_condition_key():
    src = "if c:\n    x = 1\nelse:\n    x = 2\nif not c:\n    y = x\nelse:\n    y = 0\n"
    interp, ctx, _ = interpret(src)
    y = var(interp, ctx, "y")
    assert leaf_values(y) == {("number", 2), ("number", 0)}


# -- loops ---------------------------------------------------------------------------


def test_while_false_body_never_runs():
    interp, ctx, _ = interpret("x = 0\nwhile False:\n    x = 1\n")
    assert interp.task.stats["loop_unrollings"] == 0
    assert var(interp, ctx, "x") == Prim("number", 0)


def test_range_over_known_array_iterates_exactly():
    src = "seen = []\nfor v in [10, 20]:\n    seen.append(v)\nlast = v\n"
    interp, ctx, _ = interpret(src)
    assert interp.task.stats["loop_unrollings"] == 2
    assert var(interp, ctx, "last") == Prim("number", 20)
    seen = var(interp, ctx, "seen")
    assert interp.read_field(seen, "0", ctx) == Prim("number", 10)
    assert interp.read_field(seen, "1", ctx) == Prim("number", 20)


def test_symbolic_while_unrolls_to_bound():
    interp, ctx, _ = interpret("x = 0\nwhile c:\n    x = x + 1\n")
    assert interp.task.stats["loop_unrollings"] == 3
    assert leaf_values(var(interp, ctx, "x")) == {("number", 0), ("number", 3)}


def test_while_taint_reaches_merged_state():
    interp, ctx, _ = interpret("x = 'a'\nwhile c:\n    x = taint() + x\n")
    assert tainted(var(interp, ctx, "x"))


def test_while_with_counter_matches_iteration_oracle():
    src = "i = 0\nacc = 0\nwhile i < n:\n    acc = acc + 2\n    i = i + 1\n"
    interp, ctx, _ = interpret(src)
    # concrete runs with 0..3 iterations
    assert leaf_values(var(interp, ctx, "acc")) == {("number", 2 * j) for j in range(4)}


@pytest.mark.parametrize("bound", [1, 2, 5])
def test_loop_bound_is_configurable(bound):
    interp, _, _ = interpret("while c:\n    pass\n", config=AnalysisConfig(loop_unroll_bound=bound))
    assert interp.task.stats["loop_unrollings"] == bound


def test_break_and_continue():
    src = "x = 0\nfor v in [1, 2, 3]:\n    if v == 2:\n        continue\n    if v == 3:\n        break\n    x = x + v\n"
    interp, ctx, _ = interpret(src)
    assert var(interp, ctx, "x") == Prim("number", 1)


# -- exceptions, use-before-definition -------------------------------------------


def test_try_handler_merges_as_unknown_branch():
    src = "x = 1\ntry:\n    x = 2\n    risky()\nexcept Exception as e:\n    x = 3\n"
    interp, ctx, _ = interpret(src)
    assert leaf_values(var(interp, ctx, "x")) >= {("number", 2), ("number", 3)}


def test_use_before_definition_warns():
    src = "if c:\n    y = 1\nz = y\n"
    interp, ctx, _ = interpret(src)
    assert any("'y'" in w.message for w in interp.task.warnings)
    z = var(interp, ctx, "z")
    leaves = [leaf for _, leaf in iter_leaves(z)]
    assert Prim("number", 1) in leaves and any(isinstance(leaf, Sym) for leaf in leaves)


# -- forks are isolated --------------------------------------------------------------


def test_fork_isolation():
    interp, ctx = fresh()
    addr = interp.new_object(ctx, "object").addr
    other = ctx.fork()
    interp.write_field(Obj(addr), "f", Prim("number", 1), ctx)
    assert "f" not in other.store.obj(addr).fields
    assert ctx.store.obj(addr).fields["f"] == Prim("number", 1)


# -- config --------------------------------------------------------------------------


def test_config_defaults_and_validation():
    cfg = AnalysisConfig()
    assert (cfg.max_call_depth, cfg.loop_unroll_bound, cfg.path_merge_cap, cfg.handlers_enabled) == (10, 3, 8, True)
    for bad in ({"max_call_depth": 0}, {"loop_unroll_bound": -1}, {"path_merge_cap": True}):
        with pytest.raises(ConfigError):
            AnalysisConfig(**bad)


def test_config_file_and_env(tmp_path, monkeypatch):
    monkeypatch.delenv("UAST_TAINT_CONFIG", raising=False)
    (tmp_path / "yasa.config.json").write_text(json.dumps({"maxCallDepth": 4, "handlersEnabled": False}))
    cfg = load_config(str(tmp_path))
    assert (cfg.max_call_depth, cfg.handlers_enabled, cfg.loop_unroll_bound) == (4, False, 3)
    other = tmp_path / "other.json"
    other.write_text(json.dumps({"loopUnrollBound": 7}))
    monkeypatch.setenv("UAST_TAINT_CONFIG", str(other))
    assert load_config(str(tmp_path)).loop_unroll_bound == 7
    other.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(ConfigError):
        load_config(str(tmp_path))


def test_every_assignment_is_path_consistent():
    src = "x = 0\nif a:\n    x = x + 1\nif b:\n    x = x + 10\nif a:\n    x = x + 100\n"
    interp, ctx, _ = interpret(src)
    x = var(interp, ctx, "x")
    for pa, pb in itertools.product((True, False), repeat=2):
        want = (101 if pa else 0) + (10 if pb else 0)
        assert restrict_path(x, (cond("a", pa), cond("b", pb))) == Prim("number", want)
