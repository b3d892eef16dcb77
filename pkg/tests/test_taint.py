from __future__ import annotations

import os

import pytest
from hypothesis import given
from hypothesis import strategies as st

from support import CORPUS, FIXTURES, RULES, findings, interpret, sink_lines, tainted, var
from uast_taint.analyzer import analyze_unit, discover_files, load_unit
from uast_taint.engine import AnalysisConfig
from uast_taint.frameworks import EXPRESS_REQUEST_FIELDS, FLASK_REQUEST_FIELDS
from uast_taint.engine.events import CallSite
from uast_taint.engine.values import Prim, Sym, Taint, TraceStep, make_phi
from uast_taint.taint import (
    Finding,
    FindingSink,
    Ruleset,
    RulesError,
    SinkRule,
    apply_sanitizer,
    check_sink,
    match_pattern,
)
from uast_taint.uast import SourceLocation, make

L = SourceLocation("t.mpy", 3, 1, 3, 9)
REQUEST_FIELDS = FLASK_REQUEST_FIELDS + EXPRESS_REQUEST_FIELDS


def src_taint(label="user-input", line=1):
    return Taint.source(label, TraceStep("source", SourceLocation("t.mpy", line, 1, line, 5), label))


# -- assignment propagation --


def test_assignment_copies_taint():
    interp, ctx, _ = interpret("y = taint()\nx = y\n")
    x = var(interp, ctx, "x")
    assert tainted(x)
    assert [s.kind for s in x.taint.trace] == ["source", "assign", "assign"]


def test_reassignment_clears_taint():
    interp, ctx, _ = interpret("x = taint()\nx = 1\n")
    assert not tainted(var(interp, ctx, "x"))


def test_assignment_from_clean_stays_clean():
    interp, ctx, _ = interpret("y = 'ok'\nx = y\n")
    assert not tainted(var(interp, ctx, "x"))


# -- fields propagation --


FIELD_PRELUDE = "class O:\n    pass\no = O()\no.f = taint()\no.g = 'clean'\n"


def test_field_read_carries_taint():
    interp, ctx, _ = interpret(FIELD_PRELUDE + "x = o.f\n")
    x = var(interp, ctx, "x")
    assert tainted(x) and "field" in [s.kind for s in x.taint.trace]


def test_sibling_field_is_clean():
    interp, ctx, _ = interpret(FIELD_PRELUDE + "x = o.g\n")
    assert not tainted(var(interp, ctx, "x"))


def test_container_passed_to_sink_is_not_a_finding():
    assert findings(FIELD_PRELUDE + "sink(o)\n") == []
    assert sink_lines(findings(FIELD_PRELUDE + "sink(o.f)\n")) == [6]


# -- calls propagation --


def test_call_returning_argument_is_tainted():
    interp, ctx, _ = interpret("def f(a):\n    return a\nz = f(taint())\n")
    z = var(interp, ctx, "z")
    kinds = [s.kind for s in z.taint.trace]
    assert "call-arg" in kinds and "call-return" in kinds


def test_call_returning_constant_is_clean():
    interp, ctx, _ = interpret("def f(a):\n    return 1\nz = f(taint())\n")
    assert not tainted(var(interp, ctx, "z"))


def test_unknown_call_is_conservative():
    interp, ctx, _ = interpret("z = g(taint())\n")
    assert tainted(var(interp, ctx, "z"))


# -- prototypes propagation --


def test_prototype_write_reaches_instances():
    interp, ctx, _ = interpret("function F() {}\nF.prototype.f = taint();\nvar x = (new F()).f;\n", "minijs")
    x = var(interp, ctx, "x")
    assert tainted(x) and "prototype" in [s.kind for s in x.taint.trace]


def test_own_clean_field_shadows_tainted_prototype():
    src = "function F() {}\nF.prototype.f = taint();\nvar a = new F();\na.f = 'ok';\nvar x = a.f;\n"
    interp, ctx, _ = interpret(src, "minijs")
    assert not tainted(var(interp, ctx, "x"))


def test_unrelated_constructor_is_clean():
    src = "function F() {}\nfunction G() {}\nF.prototype.f = taint();\nvar x = (new G()).f;\n"
    interp, ctx, _ = interpret(src, "minijs")
    assert not tainted(var(interp, ctx, "x"))


# -- promises propagation --


def test_await_resolved_promise_is_tainted():
    src = "async function main() {\n  var p = Promise.resolve(taint());\n  var v = await p;\n  sink(v);\n}\nmain();\n"
    found = findings(src, "minijs")
    assert sink_lines(found) == [4]
    assert "promise" in [s.kind for s in found[0].trace]


def test_then_result_carries_callback_return_only():
    src = (
        "var p = Promise.resolve(taint());\n"
        "var q = p.then((x) => { sink(x); return 'clean'; });\n"
        "async function main() { var v = await q; sink(v); }\n"
        "main();\n"
    )
    assert sink_lines(findings(src, "minijs")) == [2]


def test_await_clean_promise_is_clean():
    src = "async function main() { var v = await Promise.resolve(1); sink(v); }\nmain();\n"
    assert findings(src, "minijs") == []


# -- channels (raw documents) propagation --


def _fixture_findings(name):
    path = os.path.join(FIXTURES, name)
    with open(path, encoding="utf-8") as fh:
        unit = load_unit(path, fh.read())
    return analyze_unit(unit, RULES, AnalysisConfig(), "none").findings.sorted()


def test_channel_send_then_receive():
    found = _fixture_findings("chan_send_receive.uast.json")
    assert sink_lines(found) == [4]
    assert "channel" in [s.kind for s in found[0].trace]


def test_channel_forwarding():
    assert sink_lines(_fixture_findings("chan_forward.uast.json")) == [6]


def test_receive_from_unsent_channel():
    assert _fixture_findings("chan_never_sent.uast.json") == []


# -- check_sink / sanitizers --------------------------------------------------------


def _site(*args):
    node = make("CallExpression", L, callee=make("Identifier", L, name="exec"), arguments=[])
    return CallSite(node, ("exec",), None, list(args))


def test_check_sink_reports_tainted_argument():
    out = check_sink(_site(Sym("source", "s", taint=src_taint())), [SinkRule("code-injection", "exec", (0,))], ())
    assert len(out) == 1
    assert len(out[0].trace) >= 2
    assert out[0].trace[0].kind == "source" and out[0].trace[-1].kind == "sink"
    assert out[0].severity == "error"


def test_check_sink_only_declared_positions():
    rule = SinkRule("code-injection", "exec", (0,))
    assert check_sink(_site(Prim("string", "x"), Sym("source", "s", taint=src_taint())), [rule], ()) == []


def test_check_sink_phi_uses_feasible_leaves():
    from support import cond

    phi = make_phi(cond("c", True).key, Prim("string", "x", src_taint()), Prim("string", "y"))
    rule = SinkRule("generic", "exec")
    assert len(check_sink(_site(phi), [rule], ())) == 1
    assert check_sink(_site(phi), [rule], (cond("c", False),)) == []


def test_sanitizer_is_value_producing():
    interp, ctx, _ = interpret("t = taint()\ns = sanitize(t)\nu = sanitize('a')\n")
    assert not tainted(var(interp, ctx, "s"))
    assert tainted(var(interp, ctx, "t"))
    assert not tainted(var(interp, ctx, "u"))


def test_sanitized_and_raw_sink_differ_by_one():
    base = "t = taint()\nexec(sanitize(t))\n"
    assert findings(base) == []
    assert len(findings(base + "exec(t)\n")) == 1
    assert findings("exec('ls')\n") == []


def test_apply_sanitizer_clears_every_leaf():
    phi = make_phi(("k",), Prim("string", "a", src_taint()), Sym("x", "y", taint=src_taint()))
    assert not tainted(apply_sanitizer(phi))


def test_binary_expression_unions_taint():
    interp, ctx, _ = interpret("a = 'x' + taint()\nb = 'x' + 'y'\nc = -taint()\n")
    assert tainted(var(interp, ctx, "a")) and not tainted(var(interp, ctx, "b")) and tainted(var(interp, ctx, "c"))


# -- taint state invariant ----------------------------------------------------------


def test_taint_state_invariant():
    empty = Taint()
    assert not empty and not empty.labels and not empty.trace
    t = src_taint()
    assert t and t.labels and t.trace
    merged = Taint.union(t, src_taint("other", 2))
    assert merged.labels == {"user-input", "other"} and merged.trace[0].kind == "source"


# -- corpus-wide invariants --------------------------------------------------------


def _corpus_units():
    for path in discover_files(CORPUS):
        with open(path, encoding="utf-8") as fh:
            yield path, load_unit(path, fh.read())


def test_no_sources_means_no_findings():
    # framework models seed sources of their own, so they are switched off too
    rules = Ruleset.load(os.path.join(CORPUS, "rules.json"))
    sourceless = Ruleset((), rules.sinks, rules.sanitizers)
    for path, unit in _corpus_units():
        assert len(analyze_unit(unit, sourceless, AnalysisConfig(), "none").findings) == 0, path


def test_findings_start_at_a_source_and_cite_analyzed_files():
    rules = Ruleset.load(os.path.join(CORPUS, "rules.json"))
    call_sources = [r.pattern for r in rules.sources if r.kind == "call"]
    for path, unit in _corpus_units():
        for f in analyze_unit(unit, rules, AnalysisConfig(), "auto").findings.sorted():
            assert f.trace[0].kind == "source" and f.trace[-1].kind == "sink"
            assert f.trace[0].loc == f.source_loc
            # raw documents carry the file names written inside them
            assert all(step.loc.file in (path, os.path.basename(path)) for step in f.trace), path
            desc = f.trace[0].description
            from_rule = any(desc.startswith(p.split(".")[-1]) or p in desc for p in call_sources)
            from_framework = desc.startswith("parameter") or desc.split(".")[-1] in REQUEST_FIELDS
            assert from_rule or from_framework, desc


# -- rules parsing ------------------------------------------------------------------


@pytest.mark.parametrize(
    "data",
    [
        [],
        {"bogus": []},
        {"sources": [{"id": "", "pattern": "a"}]},
        {"sources": [{"id": "s", "kind": "env", "pattern": "a"}]},
        {"sinks": [{"id": "k", "pattern": "a.*.b"}]},
        {"sinks": [{"id": "k", "pattern": "a..b"}]},
        {"sinks": [{"id": "k", "pattern": "a", "taintedArgs": [-1]}]},
        {"sinks": [{"id": "k", "pattern": "a", "taintedArgs": [True]}]},
        {"sanitizers": "no"},
    ],
)
def test_bad_rules_rejected(data):
    with pytest.raises(RulesError):
        Ruleset.from_json(data)


def test_rules_load_errors(tmp_path):
    with pytest.raises(RulesError):
        Ruleset.load(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(RulesError):
        Ruleset.load(str(bad))


def test_default_rules_parse():
    rules = Ruleset.default()
    assert rules.sources and rules.sinks


def test_match_pattern_examples():
    assert match_pattern("os.system", "os.system")
    assert match_pattern("os.*", "os.popen")
    assert match_pattern("req.get*", "req.getParam")
    assert not match_pattern("os.*", "os.path.join")
    assert not match_pattern("os.system", "system")


_seg = st.text("abcxyz_", min_size=1, max_size=4)


@given(st.lists(_seg, min_size=1, max_size=4))
def test_exact_and_wildcard_patterns_match_themselves(parts):
    name = ".".join(parts)
    assert match_pattern(name, name)
    assert match_pattern(".".join(parts[:-1] + ["*"]), name)
    assert not match_pattern(name + ".z", name)


@given(st.lists(_seg, min_size=2, max_size=4), _seg)
def test_wildcard_never_spans_segments(parts, extra):
    pattern = parts[0] + ".*"
    assert not match_pattern(pattern, ".".join(parts + [extra]))


# -- dedup --------------------------------------------------------------------------


def test_finding_sink_dedups_on_source_sink_rule():
    t = src_taint()
    f = Finding("r", t.trace[0].loc, L, t.trace, "m", ("user-input",))
    g = Finding("r", t.trace[0].loc, L, t.trace + t.trace, "other", ("user-input",))
    sink = FindingSink()
    assert sink.add(f) and not sink.add(g)
    assert len(sink) == 1
    assert sink.add(Finding("r2", t.trace[0].loc, L, t.trace, "m", ("user-input",)))


def test_same_flow_reported_once_across_paths():
    src = "x = taint()\nif c:\n    y = x\nelse:\n    y = x + 'a'\nsink(y)\n"
    assert sink_lines(findings(src)) == [6]
