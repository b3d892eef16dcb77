"""Language-specific semantic handlers.

The interpreter fires a hook at four sites: after a class body has been
evaluated (``classDefinition``), when a field lookup misses an object's own
fields (``methodResolution``), and around calls (``callPre`` / ``callPost``).
Each hook is dispatched to the handlers registered for the node's language
tag, in registration order.  With handlers disabled every dispatch returns
its payload untouched, which is the agnostic-only mode used by the ablation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .engine.state import ObjData
from .engine.values import Obj, Sym

HOOK_POINTS = ("classDefinition", "methodResolution", "callPre", "callPost")

PROTOTYPE_BUILTINS = ("toString", "valueOf", "hasOwnProperty")


@dataclass(frozen=True)
class HandlerRegistration:
    lang_tag: str
    hook_point: str
    handler: Callable
    name: str


class HandlerRegistry:
    def __init__(self) -> None:
        self._entries: list[HandlerRegistration] = []
        self._frozen = False

    def register(self, lang_tag: str, hook_point: str, name: str) -> Callable:
        if self._frozen:
            raise RuntimeError("handler registry is frozen")
        if hook_point not in HOOK_POINTS:
            raise ValueError(f"unknown hook point {hook_point!r}")
        if any(e.lang_tag == lang_tag and e.hook_point == hook_point and e.name == name for e in self._entries):
            raise ValueError(f"duplicate handler {lang_tag}/{hook_point}/{name}")

        def deco(fn: Callable) -> Callable:
            self._entries.append(HandlerRegistration(lang_tag, hook_point, fn, name))
            return fn

        return deco

    def freeze(self) -> "HandlerRegistry":
        self._frozen = True
        return self

    def registrations(self, lang_tag: Optional[str] = None, hook_point: Optional[str] = None) -> list[HandlerRegistration]:
        return [
            e
            for e in self._entries
            if (lang_tag is None or e.lang_tag == lang_tag) and (hook_point is None or e.hook_point == hook_point)
        ]

    def dispatch(self, hook_point: str, lang_tag: str, payload: dict, ctx, enabled: bool = True) -> dict:
        """Run every matching handler over ``payload``; pass-through when disabled."""
        if not enabled:
            return payload
        for entry in self._entries:
            if entry.hook_point == hook_point and entry.lang_tag == lang_tag:
                result = entry.handler(payload, ctx)
                if result is not None:
                    payload = result
        return payload


REGISTRY = HandlerRegistry()


# ---------------------------------------------------------------------------
# Python: inheritance by member copy


@REGISTRY.register("minipy", "classDefinition", "inheritance")
def py_resolve_inheritance(payload: dict, ctx) -> dict:
    """Copy base-class members into the class, first base wins, own members last.

    Members inherited from an unresolvable base are not copied; the class
    falls back to that base Sym so lookups yield memoized child Syms.
    """
    store = ctx.store
    data: ObjData = payload["data"]
    inherited: dict = {}
    sym_base = None
    for base in payload["bases"]:
        if isinstance(base, Obj) and store.obj(base.addr).kind == "class":
            for name, value in store.obj(base.addr).fields.items():
                inherited.setdefault(name, value)
        elif isinstance(base, Sym) and sym_base is None:
            sym_base = base
    merged = dict(inherited)
    merged.update(payload["members"])
    data.fields = merged
    if sym_base is not None and data.proto is None:
        data.proto = sym_base
    return payload


# ---------------------------------------------------------------------------
# JavaScript: prototype injection


def _new_prototype(ctx, owner_name: str, lang: str, parent=None) -> Obj:
    proto = ObjData("object", name=f"{owner_name}.prototype", lang=lang)
    proto.model = "prototype"
    for builtin in PROTOTYPE_BUILTINS:
        fn = ObjData("builtin", name=f"Object.prototype.{builtin}", lang=lang)
        fn.model = "sym-returning"
        proto.fields[builtin] = Obj(ctx.store.alloc(fn))
    proto.proto = parent
    return Obj(ctx.store.alloc(proto))


def js_inject_prototype(value: Obj, ctx) -> Obj:
    """Give a constructor (function or class) its shared ``prototype`` object."""
    data = ctx.store.obj(value.addr)
    existing = data.fields.get("prototype")
    if isinstance(existing, Obj):
        return existing
    proto = _new_prototype(ctx, data.name or f"obj#{value.addr}", data.lang)
    ctx.store.obj_w(value.addr).fields["prototype"] = proto
    return proto


@REGISTRY.register("minijs", "classDefinition", "prototype-class")
def js_class_prototype(payload: dict, ctx) -> dict:
    data: ObjData = payload["data"]
    parent = None
    for base in payload["bases"][:1]:
        if isinstance(base, Obj) and ctx.store.obj(base.addr).kind in ("class", "function"):
            parent = js_inject_prototype(base, ctx)
            data.proto = base
    proto = _new_prototype(ctx, data.name or "class", data.lang, parent)
    pdata = ctx.store.obj_w(proto.addr)
    for name, value in payload["members"].items():
        pdata.fields[name] = value
    data.fields = {"prototype": proto}
    return payload


@REGISTRY.register("minijs", "methodResolution", "prototype-lookup")
def js_prototype_field(payload: dict, ctx) -> dict:
    """Reading ``F.prototype`` on a constructor creates the prototype on demand."""
    target = payload["object"]
    if payload["field"] == "prototype" and isinstance(target, Obj):
        if ctx.store.obj(target.addr).kind in ("function", "class"):
            payload = dict(payload, result=js_inject_prototype(target, ctx))
    return payload


@REGISTRY.register("minijs", "callPre", "prototype-new")
def js_new_instance(payload: dict, ctx) -> dict:
    """``new F()``: link the fresh instance to ``F.prototype``."""
    if payload.get("kind") != "new":
        return payload
    ctor = payload["constructor"]
    if isinstance(ctor, Obj):
        proto = js_inject_prototype(ctor, ctx)
        ctx.store.obj_w(payload["instance"].addr).proto = proto
    return payload


# ---------------------------------------------------------------------------
# Shapes kept for the two languages without a frontend here.


@REGISTRY.register("java", "classDefinition", "data-annotation")
def java_data_accessors(payload: dict, ctx) -> dict:
    raise NotImplementedError("@Data accessor synthesis needs a Java frontend")


@REGISTRY.register("go", "methodResolution", "structural-interface")
def go_interface_resolution(payload: dict, ctx) -> dict:
    raise NotImplementedError("structural interface satisfaction needs a Go frontend")


REGISTRY.freeze()


def dispatch(hook_point: str, lang_tag: str, payload: dict, ctx, enabled: bool = True) -> dict:
    return REGISTRY.dispatch(hook_point, lang_tag, payload, ctx, enabled)
