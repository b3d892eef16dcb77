from __future__ import annotations

import pytest

from support import findings, interpret, sink_lines, var
from uast_taint import handlers
from uast_taint.engine import AnalysisConfig
from uast_taint.engine.values import Obj, Prim, Sym
from uast_taint.handlers import HOOK_POINTS, HandlerRegistry

OFF = AnalysisConfig(handlers_enabled=False)


# -- Python inheritance ---------------------------------------------------------


def test_inherited_method_runs_with_derived_receiver():
    src = """\
class B:
    def m(self, v):
        self.seen = v
        return self.tag
class C(B):
    tag = 'c'
c = C()
r = c.m(5)
s = c.seen
"""
    interp, ctx, _ = interpret(src)
    assert var(interp, ctx, "r") == Prim("string", "c")
    assert var(interp, ctx, "s") == Prim("number", 5)


def test_first_base_wins():
    src = """\
class A:
    def m(self):
        return 'A'
class B:
    def m(self):
        return 'B'
    def only_b(self):
        return 'b'
class C(A, B):
    pass
x = C().m()
y = C().only_b()
"""
    interp, ctx, _ = interpret(src)
    assert var(interp, ctx, "x") == Prim("string", "A")
    assert var(interp, ctx, "y") == Prim("string", "b")


def test_own_members_override_inherited():
    src = "class A:\n    def m(self):\n        return 1\nclass C(A):\n    def m(self):\n        return 2\nx = C().m()\n"
    interp, ctx, _ = interpret(src)
    assert var(interp, ctx, "x") == Prim("number", 2)


def test_class_without_bases_holds_own_members_only():
    src = "class C:\n    a = 1\n    def m(self):\n        return 0\n"
    interp, ctx, _ = interpret(src)
    cls = var(interp, ctx, "C")
    assert isinstance(cls, Obj)
    assert set(ctx.store.obj(cls.addr).fields) == {"a", "m"}


def test_unresolvable_base_yields_memoized_syms():
    src = "class C(Missing):\n    pass\na = C.helper\nb = C.helper\n"
    interp, ctx, _ = interpret(src)
    a = var(interp, ctx, "a")
    assert isinstance(a, Sym) and a == var(interp, ctx, "b")


def test_inheritance_without_handlers_reads_sym():
    src = "class B:\n    def m(self):\n        return 1\nclass C(B):\n    pass\nx = C().m\n"
    interp, ctx, _ = interpret(src, config=OFF)
    assert isinstance(var(interp, ctx, "x"), Sym)
    interp, ctx, _ = interpret(src)
    assert isinstance(var(interp, ctx, "x"), Obj)


def test_inheritance_flow_needs_handlers():
    src = "class B:\n    def keep(self, v):\n        self.d = v\nclass C(B):\n    pass\nc = C()\nc.keep(source())\nsink(c.d)\n"
    assert sink_lines(findings(src)) == [8]
    assert findings(src, config=OFF) == []


# -- JavaScript prototypes --------------------------------------------------------


def test_prototype_method_is_interpreted():
    src = "function F() {}\nF.prototype.m = function () { return 42; };\nvar x = (new F()).m();\n"
    interp, ctx, _ = interpret(src, "minijs")
    assert var(interp, ctx, "x") == Prim("number", 42)


def test_instances_share_one_prototype():
    src = "function F() {}\nvar a = new F();\nvar b = new F();\nF.prototype.v = 7;\nvar x = a.v;\nvar y = b.v;\n"
    interp, ctx, _ = interpret(src, "minijs")
    a, b = var(interp, ctx, "a"), var(interp, ctx, "b")
    assert ctx.store.obj(a.addr).proto == ctx.store.obj(b.addr).proto
    assert var(interp, ctx, "x") == var(interp, ctx, "y") == Prim("number", 7)


def test_own_field_shadows_prototype():
    src = "function F() {}\nF.prototype.v = 1;\nvar a = new F();\na.v = 2;\nvar x = a.v;\nvar y = (new F()).v;\n"
    interp, ctx, _ = interpret(src, "minijs")
    assert var(interp, ctx, "x") == Prim("number", 2)
    assert var(interp, ctx, "y") == Prim("number", 1)


def test_prototype_builtin_returns_sym():
    src = "function F() {}\nvar s = (new F()).toString();\n"
    interp, ctx, _ = interpret(src, "minijs")
    assert isinstance(var(interp, ctx, "s"), Sym)


def test_class_extends_chain():
    src = "class A { m() { return 'a'; } }\nclass B extends A {}\nvar x = (new B()).m();\n"
    interp, ctx, _ = interpret(src, "minijs")
    assert var(interp, ctx, "x") == Prim("string", "a")


def test_prototype_flow_needs_handlers():
    src = "function S() {}\nS.prototype.keep = function (v) { this.d = v; };\nvar s = new S();\ns.keep(source());\nsink(s.d);\n"
    assert sink_lines(findings(src, "minijs")) == [5]
    assert findings(src, "minijs", config=OFF) == []


# -- registry and dispatch ----------------------------------------------------------


def test_disabled_dispatch_is_identity():
    payload = {"data": object(), "bases": [], "members": {}}
    assert handlers.dispatch("classDefinition", "minipy", payload, None, enabled=False) is payload


def test_unregistered_hook_passes_through():
    payload = {"x": 1}
    assert handlers.dispatch("callPost", "minipy", payload, None) is payload


def test_registry_rejects_duplicates_and_unknown_hooks():
    reg = HandlerRegistry()
    reg.register("l", "callPre", "h")(lambda p, c: p)
    with pytest.raises(ValueError):
        reg.register("l", "callPre", "h")
    with pytest.raises(ValueError):
        reg.register("l", "nope", "h")
    reg.freeze()
    with pytest.raises(RuntimeError):
        reg.register("l", "callPost", "h2")


def test_dispatch_runs_in_registration_order():
    reg = HandlerRegistry()
    for name in ("first", "second", "third"):
        reg.register("l", "callPre", name)(lambda p, c, name=name: dict(p, order=p["order"] + [name]))
    reg.register("other", "callPre", "x")(lambda p, c: dict(p, order=["wrong"]))
    assert reg.dispatch("callPre", "l", {"order": []}, None)["order"] == ["first", "second", "third"]


def test_handler_exceptions_propagate():
    reg = HandlerRegistry()

    @reg.register("l", "callPost", "boom")
    def boom(payload, ctx):
        raise KeyError("bug")

    with pytest.raises(KeyError):
        reg.dispatch("callPost", "l", {}, None)


def test_stub_handlers_are_registered_and_unimplemented():
    regs = {(r.lang_tag, r.hook_point) for r in handlers.REGISTRY.registrations()}
    assert ("java", "classDefinition") in regs and ("go", "methodResolution") in regs
    with pytest.raises(NotImplementedError):
        handlers.dispatch("classDefinition", "java", {}, None)
    with pytest.raises(NotImplementedError):
        handlers.dispatch("methodResolution", "go", {}, None)
    assert all(r.hook_point in HOOK_POINTS for r in handlers.REGISTRY.registrations())


@pytest.mark.parametrize(
    "src,lang",
    [
        ("def f(a):\n    return a\nx = source()\nif c:\n    x = f(x)\nsink(x)\nsink(sanitize(x))\n", "minipy"),
        ("var o = {};\no.f = source();\nvar g = (v) => v;\nsink(g(o.f));\nsink(o.g);\n", "minijs"),
    ],
)
def test_handlers_do_not_change_feature_free_programs(src, lang):
    assert findings(src, lang) == findings(src, lang, config=OFF)
