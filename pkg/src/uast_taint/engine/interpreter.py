"""Abstract interpreter over UAST.

Statements map a context to a context; expressions map a context to a
``(value, context)`` pair.  A context handed to an ``exec_*`` or ``eval_*``
method is consumed: callers continue with the returned one.

Undecidable branches fork the context, both arms run, and the results are
merged into Phi values keyed by the branch condition.  Returns, breaks,
continues and throws park the current context on the enclosing activation;
the parked contexts are merged back at the function, loop or try boundary.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from .. import handlers
from ..uast.nodes import SourceLocation, UastNode
from .config import AnalysisConfig
from .events import CallSite, TaintEvent
from .state import Context, Counter, DeclInfo, Frame, LoopRecord, ObjData, ScopeData, Store, TryRecord
from .values import (
    CLEAN,
    UNDEFINED,
    AbstractValue,
    Obj,
    PathCondition,
    Phi,
    Prim,
    Sym,
    Taint,
    cap_phi,
    decided,
    feasible_leaves,
    is_uninit,
    join_taint,
    make_phi,
    map_leaves,
    restrict,
    restrict_path,
    uninit,
    value_key,
)

META_PREFIX = "%"
LENGTH = "%length"
ANY = "%any"
PAYLOAD = "%payload"
CELL = "%cell"
MAX_CONCRETE_RANGE = 1000


def _loc_key(loc: SourceLocation) -> tuple:
    return (loc.file, loc.start_line, loc.start_col, loc.end_line, loc.end_col)


@dataclass
class Warning_:
    loc: SourceLocation
    message: str


@dataclass
class Task:
    """State shared by every fork of one analysis run (one entry point)."""

    config: AnalysisConfig = field(default_factory=AnalysisConfig)
    plugins: list = field(default_factory=list)
    counter: Counter = field(default_factory=Counter)
    stats: dict = field(
        default_factory=lambda: {
            "call_descents": 0,
            "depth_limited": 0,
            "loop_unrollings": 0,
            "forks": 0,
            "arm_entries": [],
        }
    )
    warnings: list = field(default_factory=list)

    def emit(self, kind: str, ctx: Context, loc, value=None, detail: str = "", **operands) -> Any:
        event = TaintEvent(kind, loc, value, detail, operands)
        for plugin in self.plugins:
            result = plugin.handle(event, ctx)
            if result is not None:
                event.value = result
        return event.value

    def intercept(self, site: CallSite, ctx: Context) -> Optional[AbstractValue]:
        for plugin in self.plugins:
            result = plugin.intercept_call(site, ctx)
            if result is not None:
                return result
        return None

    def import_module(self, module: str, ctx: Context) -> Optional[AbstractValue]:
        for plugin in self.plugins:
            result = plugin.on_import(module, ctx)
            if result is not None:
                return result
        return None


# ---------------------------------------------------------------------------
# Concrete operators on primitives

def _py_truthy(v: Prim) -> bool:
    return bool(v.value)


def _prim(value: Any, taint: Taint = CLEAN) -> Prim:
    if value is None:
        return Prim("null", None, taint)
    if isinstance(value, bool):
        return Prim("boolean", value, taint)
    if isinstance(value, (int, float)):
        if isinstance(value, float) and (math.isnan(value) or math.isinf(value)):
            raise ArithmeticError("non-finite")
        return Prim("number", value, taint)
    if isinstance(value, str):
        return Prim("string", value, taint)
    raise TypeError(type(value))


def _js_str(v: Any) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float) and v.is_integer():
        return str(int(v))
    return str(v)


_PY_OPS: dict[str, Callable] = {
    "+": operator.add,
    "-": operator.sub,
    "*": operator.mul,
    "/": operator.truediv,
    "//": operator.floordiv,
    "%": operator.mod,
    "**": operator.pow,
    "==": operator.eq,
    "!=": operator.ne,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
    "&": operator.and_,
    "|": operator.or_,
    "^": operator.xor,
    "<<": operator.lshift,
    ">>": operator.rshift,
    "in": lambda a, b: operator.contains(b, a),
    "not in": lambda a, b: not operator.contains(b, a),
    "is": lambda a, b: a is b if a is None or b is None else a == b,
    "is not": lambda a, b: not (a is b if a is None or b is None else a == b),
}


def concrete_binop(op: str, a: Any, b: Any, lang: str) -> Any:
    """Evaluate ``a op b`` on Python scalars; raises on anything unmodeled."""
    if lang == "minijs":
        if op == "+" and (isinstance(a, str) or isinstance(b, str)):
            return _js_str(a) + _js_str(b)
        if op in ("===", "=="):
            return a == b and type(a) is type(b) if op == "===" else a == b
        if op in ("!==", "!="):
            return not (a == b and type(a) is type(b)) if op == "!==" else a != b
        if op == "/" and b == 0:
            raise ZeroDivisionError
        if op == "%":
            return math.fmod(a, b)
    if op in ("**",) and isinstance(b, (int, float)) and abs(b) > 64:
        raise ArithmeticError("exponent too large")
    if op == "*" and (isinstance(a, str) or isinstance(b, str)):
        n = b if isinstance(a, str) else a
        if not isinstance(n, int) or n > 10_000:
            raise ArithmeticError("string repeat")
    if op in ("<<",) and isinstance(b, int) and b > 256:
        raise ArithmeticError("shift too large")
    fn = _PY_OPS.get(op)
    if fn is None:
        raise NotImplementedError(op)
    result = fn(a, b)
    if isinstance(result, int) and not isinstance(result, bool) and abs(result) > 10**30:
        raise ArithmeticError("integer too large")
    return result


# ---------------------------------------------------------------------------

class Interpreter:
    def __init__(self, task: Optional[Task] = None):
        self.task = task or Task()
        self.config = self.task.config

    # -- contexts ------------------------------------------------------------

    def new_context(self, lang: str = "raw") -> Context:
        store = Store(self.task.counter)
        gid = store.new_scope(ScopeData("Global", None, lang=lang))
        return Context(store, gid, (), (), Frame(), self.task)

    def run_module(self, unit: UastNode, ctx: Optional[Context] = None) -> Context:
        """Interpret a compilation unit's top level."""
        ctx = ctx or self.new_context(unit.lang)
        if unit.kind == "PackageDeclaration":
            body = unit.body
        else:
            body = [unit]
        out = self.exec_block(body, ctx)
        if out.dead:
            # every path left the top level abruptly; keep the first parked state
            parked = ctx.frame.returns + ctx.frame.throws
            if parked:
                out = self.chain_merge(parked)
                out.dead = False
        return out

    # -- merging -------------------------------------------------------------

    def merge_values(self, key, a: Optional[AbstractValue], b: Optional[AbstractValue], expr=None):
        if a is None and b is None:
            return None
        if a is None:
            a = UNDEFINED
        if b is None:
            b = UNDEFINED
        if a is b:
            return a
        return cap_phi(make_phi(key, a, b, expr), self.config.path_merge_cap)

    def _lookup_default(self, store: Store, data: ObjData, name: str, addr: int) -> AbstractValue:
        """What a read of an absent own field yields, without firing events."""
        seen = {addr}
        proto = data.proto
        while isinstance(proto, Obj) and proto.addr not in seen:
            seen.add(proto.addr)
            pdata = store.obj(proto.addr)
            if name in pdata.fields:
                return pdata.fields[name]
            proto = pdata.proto
        if isinstance(proto, Sym):
            return self.child_sym(proto, name)
        if data.kind == "array" and name != LENGTH and ANY in data.fields:
            return data.fields[ANY]
        return self.memo_field_sym(data, name, addr)

    def merge_stores(self, key, st: Store, sf: Store, expr=None) -> Store:
        merged = Store(st.counter)
        merged.scopes = dict(st.scopes)
        merged.heap = dict(st.heap)
        for sid, fdata in sf.scopes.items():
            tdata = st.scopes.get(sid)
            if tdata is fdata:
                continue
            if tdata is None:
                merged.scopes[sid] = fdata
                continue
            new = tdata.copy()
            for name in set(tdata.vars) | set(fdata.vars):
                a = tdata.vars.get(name)
                b = fdata.vars.get(name)
                if a is b:
                    continue
                new.vars[name] = self.merge_values(key, a if a is not None else uninit(name), b if b is not None else uninit(name), expr)
            for name, info in fdata.decls.items():
                new.decls.setdefault(name, info)
            merged.scopes[sid] = new
            merged.owned_scopes.add(sid)
        for addr, fdata in sf.heap.items():
            tdata = st.heap.get(addr)
            if tdata is fdata:
                continue
            if tdata is None:
                merged.heap[addr] = fdata
                continue
            new = tdata.copy()
            for name in set(tdata.fields) | set(fdata.fields):
                a = tdata.fields.get(name)
                b = fdata.fields.get(name)
                if a is b:
                    continue
                if a is None:
                    a = self._lookup_default(st, tdata, name, addr)
                if b is None:
                    b = self._lookup_default(sf, fdata, name, addr)
                new.fields[name] = self.merge_values(key, a, b, expr)
            if new.proto is None:
                new.proto = fdata.proto
            for name, label in fdata.source_fields.items():
                new.source_fields.setdefault(name, label)
            merged.heap[addr] = new
            merged.owned_objs.add(addr)
        return merged

    def merge_contexts(self, ctx_true: Context, ctx_false: Context, key, expr=None) -> Context:
        """Join two arms forked on ``key``; a dead arm contributes nothing."""
        if ctx_true.dead and ctx_false.dead:
            return ctx_true
        if ctx_true.dead:
            return ctx_false
        if ctx_false.dead:
            return ctx_true
        store = self.merge_stores(key, ctx_true.store, ctx_false.store, expr)
        pi = _common_prefix([ctx_true.pi, ctx_false.pi])
        out = Context(store, ctx_true.scope, ctx_true.kappa, pi, ctx_true.frame, self.task)
        out.value = self.merge_values(key, ctx_true.value, ctx_false.value, expr)
        return out

    def _merge_cond(self, suffix: tuple, first: Context, rest: Context) -> Context:
        if not suffix:
            return first
        cond = suffix[0]
        inner = self._merge_cond(suffix[1:], first, rest)
        if cond.polarity:
            return self.merge_contexts(inner, rest, cond.key, cond.expr)
        return self.merge_contexts(rest, inner, cond.key, cond.expr)

    def chain_merge(self, contexts: list) -> Context:
        """Merge mutually exclusive contexts listed in the order they arose.

        Each context is valid on its own path condition minus the paths of the
        contexts before it, so the result is a first-match decision chain.
        """
        live = [c for c in contexts if not c.dead]
        if not live:
            return contexts[0] if contexts else None
        if len(live) == 1:
            return live[0]
        base = _common_prefix([c.pi for c in live])
        acc = live[-1]
        for ctx in reversed(live[:-1]):
            acc = self._merge_cond(ctx.pi[len(base):], ctx, acc)
        if acc is live[0] or acc is live[-1]:
            return acc
        acc.pi = base
        return acc

    # -- conditions ----------------------------------------------------------

    def truthiness(self, v: AbstractValue, ctx: Context) -> Optional[bool]:
        if isinstance(v, Prim):
            return _py_truthy(v)
        if isinstance(v, Obj):
            data = ctx.store.obj(v.addr)
            if data.kind in ("function", "class", "instance", "builtin", "promise", "channel", "module"):
                return True
            if data.lang == "minijs":
                return True
            if data.kind == "array":
                length = data.fields.get(LENGTH)
                if isinstance(length, Prim) and ANY not in data.fields:
                    return bool(length.value)
            return None
        if isinstance(v, Sym):
            key, flip = self.cond_key(v)
            got = decided(ctx.pi, key)
            if got is None:
                return None
            return got != flip
        return None

    def cond_key(self, v: AbstractValue) -> tuple[Any, bool]:
        """Condition identity of ``v`` and whether ``v`` is its negation."""
        if isinstance(v, Sym) and v.negates is not None:
            key, flip = self.cond_key(v.negates)
            return key, not flip
        return value_key(v), False

    def split_condition(self, v: AbstractValue, ctx: Context, expr=None) -> tuple[list, list]:
        """Contexts in which ``v`` is truthy and those in which it is falsy."""
        v = restrict_path(v, ctx.pi)
        if isinstance(v, Phi):
            key = v.key
            other = ctx.fork()
            self.task.stats["forks"] += 1
            ctx.pi = ctx.pi + (PathCondition(key, True, v.expr),)
            other.pi = other.pi + (PathCondition(key, False, v.expr),)
            t1, f1 = self.split_condition(restrict(v, key, True), ctx, expr)
            t2, f2 = self.split_condition(restrict(v, key, False), other, expr)
            return t1 + t2, f1 + f2
        truth = self.truthiness(v, ctx)
        if truth is True:
            return [ctx], []
        if truth is False:
            return [], [ctx]
        key, flip = self.cond_key(v)
        other = ctx.fork()
        self.task.stats["forks"] += 1
        ctx.pi = ctx.pi + (PathCondition(key, not flip, expr),)
        other.pi = other.pi + (PathCondition(key, flip, expr),)
        return [ctx], [other]

    def evaluate_condition(self, v: AbstractValue, pi=()) -> Optional[bool]:
        """Three-valued decision: True, False, or None for Unknown."""
        v = restrict_path(v, pi)
        if isinstance(v, Phi):
            outcomes = set()
            for path, leaf in feasible_leaves(v, pi):
                outcomes.add(self.evaluate_condition(leaf, tuple(pi) + path))
            return outcomes.pop() if len(outcomes) == 1 else None
        if isinstance(v, Prim):
            return _py_truthy(v)
        if isinstance(v, Sym):
            key, flip = self.cond_key(v)
            got = decided(pi, key)
            return None if got is None else got != flip
        return True if isinstance(v, Obj) else None

    def branch(self, test: AbstractValue, then_fn, else_fn, ctx: Context, expr=None) -> Context:
        trues, falses = self.split_condition(test, ctx, expr)
        loc = expr.loc if expr is not None else None
        outs = []
        for c in trues:
            self.task.stats["arm_entries"].append((loc, True))
            outs.append(then_fn(c))
        for c in falses:
            self.task.stats["arm_entries"].append((loc, False))
            outs.append(else_fn(c))
        return self.chain_merge(outs)

    def split_value(self, v: AbstractValue, ctx: Context, fn) -> Context:
        """Run ``fn(leaf, ctx) -> (value, ctx)`` once per feasible leaf of ``v``."""
        v = restrict_path(v, ctx.pi)
        if not isinstance(v, Phi):
            value, out = fn(v, ctx)
            out.value = value
            return out
        key = v.key
        other = ctx.fork()
        self.task.stats["forks"] += 1
        ctx.pi = ctx.pi + (PathCondition(key, True, v.expr),)
        other.pi = other.pi + (PathCondition(key, False, v.expr),)
        rt = self.split_value(restrict(v, key, True), ctx, fn)
        rf = self.split_value(restrict(v, key, False), other, fn)
        return self.chain_merge([rt, rf])

    def join(self, values: list, ctx: Context) -> AbstractValue:
        """Unordered choice between ``values`` (fresh, never-decided keys)."""
        if not values:
            return UNDEFINED
        acc = values[-1]
        for v in reversed(values[:-1]):
            if v == acc:
                continue
            acc = cap_phi(make_phi(("join", self.task.counter.next()), v, acc), self.config.path_merge_cap)
        return acc

    # -- symbols -------------------------------------------------------------

    @staticmethod
    def child_sym(parent: Sym, name: str) -> Sym:
        return Sym("field", f"{parent.name}.{name}", parent.origin, parent.taint)

    @staticmethod
    def memo_field_sym(data: ObjData, name: str, addr: int) -> AbstractValue:
        if data.sym_base is not None:
            return Interpreter.child_sym(data.sym_base, name)
        owner = data.name or f"obj#{addr}"
        return Sym("field", f"{owner}.{name}", ("field", addr))

    def fresh_sym(self, type_: str, name: str, loc: SourceLocation, taint: Taint = CLEAN) -> Sym:
        return Sym(type_, name, ("at", _loc_key(loc), self.task.counter.next()), taint)

    def warn(self, loc, message: str) -> None:
        self.task.warnings.append(Warning_(loc, message))

    # -- scopes --------------------------------------------------------------

    def lookup(self, name: str, ctx: Context) -> Optional[AbstractValue]:
        sid = ctx.scope
        store = ctx.store
        while sid is not None:
            data = store.scope(sid)
            if name in data.vars:
                return data.vars[name]
            sid = data.parent
        return None

    def lookup_this(self, ctx: Context) -> Optional[AbstractValue]:
        sid = ctx.scope
        while sid is not None:
            data = ctx.store.scope(sid)
            if data.this is not None:
                return data.this
            sid = data.parent
        return None

    def _function_scope(self, ctx: Context) -> int:
        return ctx.scope

    def declare(self, name: str, value: AbstractValue, ctx: Context, info: DeclInfo) -> None:
        data = ctx.store.scope_w(ctx.scope)
        data.vars[name] = value
        data.decls.setdefault(name, info)

    def assign_var(self, name: str, value: AbstractValue, ctx: Context, node: UastNode) -> None:
        value = self.task.emit("assignment", ctx, node.loc, value, name)
        if node.lang == "minipy":
            target = ctx.scope
        else:
            target = None
            sid = ctx.scope
            while sid is not None:
                data = ctx.store.scope(sid)
                if name in data.vars:
                    target = sid
                    break
                parent = data.parent
                if parent is None:
                    target = sid
                sid = parent
        data = ctx.store.scope_w(target)
        data.vars[name] = value
        data.decls.setdefault(name, DeclInfo("assign", node.loc))

    # -- heap ----------------------------------------------------------------

    def new_object(self, ctx: Context, kind: str, name: Optional[str] = None, lang: str = "raw") -> Obj:
        return Obj(ctx.store.alloc(ObjData(kind, name, lang)))

    def new_array(self, ctx: Context, elements: list, lang: str, tuple_: bool = False) -> Obj:
        data = ObjData("array", None, lang)
        for i, v in enumerate(elements):
            data.fields[str(i)] = v
        data.fields[LENGTH] = Prim("number", len(elements))
        return Obj(ctx.store.alloc(data))

    def new_promise(self, ctx: Context, payload: AbstractValue, lang: str = "minijs") -> Obj:
        data = ObjData("promise", None, lang)
        data.fields[PAYLOAD] = payload
        return Obj(ctx.store.alloc(data), join_taint(payload, ctx.pi))

    def new_channel(self, ctx: Context, lang: str = "raw") -> Obj:
        return Obj(ctx.store.alloc(ObjData("channel", "chan", lang)))

    @staticmethod
    def field_name(v: AbstractValue) -> Optional[str]:
        if isinstance(v, Prim):
            if v.type == "number" and isinstance(v.value, float) and v.value.is_integer():
                return str(int(v.value))
            if v.type == "boolean":
                return str(int(v.value))
            return str(v.value) if v.type != "null" else "None"
        return None

    def read_field(self, obj: AbstractValue, name: str, ctx: Context, loc=None) -> AbstractValue:
        """Field lookup: own fields, then the proto chain, then a memoized Sym."""
        obj = restrict_path(obj, ctx.pi)
        if isinstance(obj, Phi):
            return map_leaves(obj, lambda leaf: self.read_field(leaf, name, ctx, loc))
        if isinstance(obj, Obj):
            return self._read_obj_field(obj, name, ctx, loc)
        if isinstance(obj, Sym):
            return self.child_sym(obj, name)
        if isinstance(obj, Prim):
            if obj.type == "string" and name.lstrip("-").isdigit():
                idx = int(name)
                if -len(obj.value) <= idx < len(obj.value):
                    return Prim("string", obj.value[idx], obj.taint)
            return Sym("field", f"{obj.type}.{name}", None, obj.taint)
        return Sym("field", name)

    def _read_obj_field(self, obj: Obj, name: str, ctx: Context, loc) -> AbstractValue:
        store = ctx.store
        data = store.obj(obj.addr)
        if name in data.fields:
            return data.fields[name]
        label = data.source_fields.get(name)
        if label is not None and loc is not None:
            from .values import TraceStep

            base = data.sym_base or Sym("object", data.name or "obj")
            step = TraceStep("source", loc, f"{base.name}.{name}")
            return Sym("source", f"{base.name}.{name}", base.origin, Taint.source(label, step))
        payload = handlers.dispatch(
            "methodResolution",
            data.lang,
            {"object": obj, "field": name},
            ctx,
            self.config.handlers_enabled,
        )
        if "result" in payload:
            return payload["result"]
        seen = {obj.addr}
        proto = data.proto
        while isinstance(proto, Obj) and proto.addr not in seen:
            seen.add(proto.addr)
            pdata = store.obj(proto.addr)
            if name in pdata.fields:
                value = pdata.fields[name]
                if loc is not None:
                    value = self.task.emit("prototypeRead", ctx, loc, value, name)
                return value
            proto = pdata.proto
        if isinstance(proto, Sym):
            return self.child_sym(proto, name)
        if data.kind == "array" and name != LENGTH and ANY in data.fields:
            return data.fields[ANY]
        if data.kind == "object" and ANY in data.fields:
            return data.fields[ANY]
        return self.memo_field_sym(data, name, obj.addr)

    def read_index(self, obj: AbstractValue, index: AbstractValue, ctx: Context, loc=None) -> AbstractValue:
        index = restrict_path(index, ctx.pi)
        if isinstance(index, Phi):
            return map_leaves(index, lambda leaf: self.read_index(obj, leaf, ctx, loc))
        name = self.field_name(index)
        obj = restrict_path(obj, ctx.pi)
        if name is not None:
            if isinstance(obj, Obj) and name.startswith("-") and name[1:].isdigit():
                data = ctx.store.obj(obj.addr)
                length = data.fields.get(LENGTH)
                if isinstance(length, Prim):
                    name = str(length.value + int(name))
            return self.read_field(obj, name, ctx, loc)
        # unknown index: any element
        if isinstance(obj, Phi):
            return map_leaves(obj, lambda leaf: self.read_index(leaf, index, ctx, loc))
        if isinstance(obj, Obj):
            data = ctx.store.obj(obj.addr)
            values = [v for k, v in sorted(data.fields.items()) if not k.startswith(META_PREFIX)]
            if ANY in data.fields:
                values.append(data.fields[ANY])
            if values:
                return self.join(values, ctx)
            return self.memo_field_sym(data, "[*]", obj.addr)
        if isinstance(obj, Sym):
            return self.child_sym(obj, "[*]")
        if isinstance(obj, Prim):
            return Sym("field", f"{obj.type}[*]", None, obj.taint)
        return Sym("field", "[*]")

    def write_field(self, obj: AbstractValue, name: Optional[str], value: AbstractValue, ctx: Context, loc=None) -> AbstractValue:
        """Strong update of one field; ``name=None`` is a write at an unknown index.

        Returns the (possibly materialized) object value; a write through a Sym
        yields a fresh Obj wrapper the caller stores back in place of the Sym.
        """
        obj = restrict_path(obj, ctx.pi)
        if isinstance(obj, Phi):
            return map_leaves(obj, lambda leaf: self.write_field(leaf, name, value, ctx, loc))
        if isinstance(obj, Sym):
            data = ObjData("object", obj.name, "raw")
            data.sym_base = obj
            wrapper = Obj(ctx.store.alloc(data), obj.taint)
            self.write_field(wrapper, name, value, ctx, loc)
            return wrapper
        if not isinstance(obj, Obj):
            return obj
        data = ctx.store.obj_w(obj.addr)
        if loc is not None:
            kind = "prototypeWrite" if data.model == "prototype" else "fieldWrite"
            value = self.task.emit(kind, ctx, loc, value, name or "[*]")
        if name is None:
            old = data.fields.get(ANY)
            data.fields[ANY] = value if old is None else self.join([old, value], ctx)
            return obj
        data.fields[name] = value
        if data.kind == "array" and name.isdigit():
            length = data.fields.get(LENGTH)
            if isinstance(length, Prim) and int(name) >= length.value:
                data.fields[LENGTH] = Prim("number", int(name) + 1)
        return obj

    def array_append(self, arr: Obj, value: AbstractValue, ctx: Context, loc) -> None:
        data = ctx.store.obj_w(arr.addr)
        value = self.task.emit("fieldWrite", ctx, loc, value, "append")
        length = data.fields.get(LENGTH)
        if isinstance(length, Prim) and isinstance(length.value, int) and ANY not in data.fields:
            data.fields[str(length.value)] = value
            data.fields[LENGTH] = Prim("number", length.value + 1)
        else:
            old = data.fields.get(ANY)
            data.fields[ANY] = value if old is None else self.join([old, value], ctx)
            data.fields[LENGTH] = Sym("length", "len", ("len", arr.addr))

    # -- statements ----------------------------------------------------------

    def exec_block(self, stmts, ctx: Context) -> Context:
        if stmts and stmts[0].lang == "minijs":
            ctx = self._hoist(stmts, ctx)
        for stmt in stmts:
            if ctx.dead:
                break
            ctx = self.exec_stmt(stmt, ctx)
        return ctx

    def _hoist(self, stmts, ctx: Context) -> Context:
        for stmt in stmts:
            if stmt.kind == "FunctionDefinition" and stmt.name:
                fn = self.make_function(stmt, ctx)
                self.declare(stmt.name, fn, ctx, DeclInfo("function", stmt.loc))
        return ctx

    def exec_stmt(self, node: UastNode, ctx: Context) -> Context:
        handler = getattr(self, "x_" + node.kind, None)
        if handler is not None:
            return handler(node, ctx)
        _, ctx = self.evaluate(node, ctx)
        return ctx

    def x_Noop(self, node, ctx):
        return ctx

    def x_ExpressionStatement(self, node, ctx):
        _, ctx = self.evaluate(node.expression, ctx)
        return ctx

    def x_VariableDeclaration(self, node, ctx):
        name = node.id.name
        if node.init is not None:
            value, ctx = self.evaluate(node.init, ctx)
        elif node.varType is not None and node.varType.kind == "ChanType":
            value = self.new_channel(ctx, node.lang)
        else:
            value = UNDEFINED if node.lang == "minijs" else uninit(name)
        if ctx.dead:
            return ctx
        value = self.task.emit("assignment", ctx, node.loc, value, name)
        type_tag = node.varType.name if node.varType is not None and node.varType.kind == "PrimitiveType" else None
        self.declare(name, value, ctx, DeclInfo(node.declKind, node.loc, type_tag))
        return ctx

    def x_FunctionDefinition(self, node, ctx):
        if node.name and node.lang == "minijs":
            data = ctx.store.scope(ctx.scope)
            if node.name in data.vars and isinstance(data.vars[node.name], Obj):
                existing = ctx.store.obj(data.vars[node.name].addr)
                if existing.func is node:
                    return ctx  # hoisted already
        fn = self.make_function(node, ctx)
        if node.name:
            self.declare(node.name, fn, ctx, DeclInfo("function", node.loc))
        return ctx

    def x_ClassDefinition(self, node, ctx):
        value, ctx = self.eval_ClassDefinition(node, ctx)
        self.declare(node.name, value, ctx, DeclInfo("class", node.loc))
        return ctx

    def x_ImportStatement(self, node, ctx):
        value = self.task.import_module(node.moduleName, ctx)
        if value is None:
            value = Sym("module", node.moduleName)
        if node.localName:
            self.declare(node.localName, value, ctx, DeclInfo("import", node.loc))
        return ctx

    def x_PackageDeclaration(self, node, ctx):
        return self.exec_block(node.body, ctx)

    def x_IfStatement(self, node, ctx):
        test, ctx = self.evaluate(node.test, ctx)
        if ctx.dead:
            return ctx
        return self.branch(
            test,
            lambda c: self.exec_block(node.consequent, c),
            lambda c: self.exec_block(node.alternate, c),
            ctx,
            node.test,
        )

    def x_ReturnStatement(self, node, ctx):
        if node.argument is not None:
            value, ctx = self.evaluate(node.argument, ctx)
            if ctx.dead:
                return ctx
        else:
            value = UNDEFINED
        ctx.value = value
        ctx.frame.returns.append(ctx)
        return ctx.killed()

    def x_ThrowStatement(self, node, ctx):
        value, ctx = self.evaluate(node.argument, ctx)
        if ctx.dead:
            return ctx
        ctx.value = value
        self._throw_target(ctx.frame).append(ctx)
        return ctx.killed()

    @staticmethod
    def _throw_target(frame: Frame) -> list:
        return frame.tries[-1].throws if frame.tries else frame.throws

    def x_BreakStatement(self, node, ctx):
        if not ctx.frame.loops:
            return ctx
        ctx.value = None
        ctx.frame.loops[-1].breaks.append(ctx)
        return ctx.killed()

    def x_ContinueStatement(self, node, ctx):
        if not ctx.frame.loops:
            return ctx
        ctx.value = None
        ctx.frame.loops[-1].continues.append(ctx)
        return ctx.killed()

    def x_WhileStatement(self, node, ctx):
        return self.run_loop(node, ctx)

    def x_RangeStatement(self, node, ctx):
        return self.run_loop(node, ctx)

    def x_TryStatement(self, node, ctx):
        record = TryRecord()
        frame = ctx.frame
        frame.tries.append(record)
        try:
            end = self.exec_block(node.body, ctx)
        finally:
            frame.tries.pop()
        has_handler = bool(node.handler) or node.param is not None
        if not has_handler:
            self._throw_target(frame).extend(record.throws)
            return self.exec_block(node.finalizer, end) if not end.dead else end
        key = ("try", _loc_key(node.loc), self.task.counter.next())
        entries = list(record.throws)
        normal = end
        if not end.dead:
            implicit = end.fork()
            implicit.pi = implicit.pi + (PathCondition(key, False, node),)
            implicit.value = self.fresh_sym("exception", "exception", node.loc)
            normal.pi = normal.pi + (PathCondition(key, True, node),)
            entries.append(implicit)
        if entries:
            hin = self.chain_merge(entries)
            if node.param is not None and not hin.dead:
                exc = hin.value if hin.value is not None else self.fresh_sym("exception", "exception", node.loc)
                self.declare(node.param.name, exc, hin, DeclInfo("param", node.param.loc))
            hin.value = None
            hout = self.exec_block(node.handler, hin)
        else:
            hout = end.killed()
        normal.value = None
        out = self.chain_merge([normal, hout])
        if node.finalizer and not out.dead:
            out = self.exec_block(node.finalizer, out)
        return out

    # -- loops ---------------------------------------------------------------

    def run_loop(self, node: UastNode, ctx: Context) -> Context:
        """Bounded unrolling; the exit states of every iteration are merged."""
        if node.kind == "WhileStatement":
            return self._run_while(node, ctx)
        iterable, ctx = self.evaluate(node.right, ctx)
        if ctx.dead:
            return ctx
        return self.split_value(iterable, ctx, lambda v, c: (None, self._run_range(node, v, c)))

    def _body(self, node, ctx: Context, record: LoopRecord) -> Context:
        record.continues = []
        self.task.stats["loop_unrollings"] += 1
        end = self.exec_block(node.body, ctx)
        return self.chain_merge(record.continues + [end])

    def _run_while(self, node, ctx: Context) -> Context:
        record = LoopRecord()
        frame = ctx.frame
        origin = ctx
        frame.loops.append(record)
        try:
            for i in range(self.config.loop_unroll_bound + 1):
                if ctx is None or ctx.dead:
                    break
                test, ctx = self.evaluate(node.test, ctx)
                if ctx.dead:
                    break
                trues, falses = self.split_condition(test, ctx, node.test)
                record.breaks.extend(falses)
                if i == self.config.loop_unroll_bound:
                    # bound reached: states still inside the loop leave it here
                    record.breaks.extend(trues)
                    break
                ctx = self._body(node, self.chain_merge(trues), record) if trues else None
        finally:
            frame.loops.pop()
        out = self.chain_merge(record.breaks)
        if out is None:
            return origin.killed()
        out.value = None
        return out

    def _iteration_plan(self, node, iterable: AbstractValue, ctx: Context):
        """``(elements, exact)``: per-iteration element values, and whether the count is known."""
        bound = self.config.loop_unroll_bound
        if isinstance(iterable, Obj):
            data = ctx.store.obj(iterable.addr)
            if data.kind == "array":
                length = data.fields.get(LENGTH)
                known = [data.fields.get(str(i)) for i in range(length.value)] if isinstance(length, Prim) else []
                known = [v if v is not None else self.memo_field_sym(data, str(i), iterable.addr) for i, v in enumerate(known)]
                if isinstance(length, Prim) and ANY not in data.fields:
                    if len(known) <= bound:
                        return known, True
                    head = known[: bound - 1]
                    return head + [self.join(known[bound - 1 :], ctx)], True
                extra = known + ([data.fields[ANY]] if ANY in data.fields else [])
                return [self.join(extra, ctx) if extra else self.memo_field_sym(data, "[*]", iterable.addr)] * bound, False
            if data.kind in ("object", "instance"):
                keys = [Prim("string", k) for k in data.fields if not k.startswith(META_PREFIX)]
                if ANY not in data.fields and data.sym_base is None:
                    if len(keys) <= bound:
                        return keys, True
                    return keys[: bound - 1] + [self.join(keys[bound - 1 :], ctx)], True
            elem = self.memo_field_sym(data, "[*]", iterable.addr)
            return [elem] * bound, False
        if isinstance(iterable, Prim) and iterable.type == "string" and len(iterable.value) <= bound:
            return [Prim("string", ch, iterable.taint) for ch in iterable.value], True
        if isinstance(iterable, Sym):
            return [self.child_sym(iterable, "[*]")] * bound, False
        taint = iterable.taint
        return [Sym("field", "[*]", ("iter", _loc_key(node.loc)), taint)] * bound, False

    def _run_range(self, node, iterable: AbstractValue, ctx: Context) -> Context:
        elements, exact = self._iteration_plan(node, iterable, ctx)
        record = LoopRecord()
        frame = ctx.frame
        frame.loops.append(record)
        try:
            for i, element in enumerate(elements):
                if ctx.dead:
                    break
                if not exact:
                    key = ("iter", _loc_key(node.loc), self.task.counter.next())
                    leave = ctx.fork()
                    leave.pi = leave.pi + (PathCondition(key, False, node),)
                    ctx.pi = ctx.pi + (PathCondition(key, True, node),)
                    record.breaks.append(leave)
                ctx = self.assign_target(node.left, element, ctx, node)
                ctx = self._body(node, ctx, record)
            if not ctx.dead:
                record.breaks.append(ctx)
        finally:
            frame.loops.pop()
        out = self.chain_merge(record.breaks)
        if out is None:
            return ctx.killed()
        out.value = None
        return out

    # -- expressions ---------------------------------------------------------

    def evaluate(self, node: UastNode, ctx: Context) -> tuple[AbstractValue, Context]:
        handler = getattr(self, "eval_" + node.kind, None)
        if handler is None:
            if node.kind in ("IfStatement", "WhileStatement", "RangeStatement", "TryStatement", "VariableDeclaration",
                             "ReturnStatement", "ThrowStatement", "BreakStatement", "ContinueStatement",
                             "ExpressionStatement", "ImportStatement", "Noop", "PackageDeclaration"):
                ctx = self.exec_stmt(node, ctx)
                return UNDEFINED, ctx
            raise AssertionError(f"no evaluation rule for {node.kind}")
        return handler(node, ctx)

    def eval_Literal(self, node, ctx):
        value = node.value
        return Prim(node.litType, value), ctx

    def eval_Identifier(self, node, ctx):
        name = node.name
        if name == "this" and node.lang == "minijs":
            this = self.lookup_this(ctx)
            return (this if this is not None else Sym("unknown", "this")), ctx
        value = self.lookup(name, ctx)
        if value is None:
            return Sym("unknown", name), ctx
        value = restrict_path(value, ctx.pi)
        if isinstance(value, Phi) or is_uninit(value):
            value = self._read_uninit(value, name, node, ctx)
        return value, ctx

    def _read_uninit(self, value, name, node, ctx):
        hit = []

        def fix(leaf):
            if is_uninit(leaf):
                hit.append(leaf)
                return Sym("unknown", name)
            return leaf

        fixed = map_leaves(value, fix)
        if hit:
            self.warn(node.loc, f"'{name}' may be used before it is defined")
        return fixed

    def eval_Sequence(self, node, ctx):
        value = UNDEFINED
        for expr in node.expressions:
            value, ctx = self.evaluate(expr, ctx)
            if ctx.dead:
                break
        return value, ctx

    def eval_ArrayLiteral(self, node, ctx):
        values = []
        for el in node.elements:
            v, ctx = self.evaluate(el, ctx)
            values.append(v)
        return self.new_array(ctx, values, node.lang, node.tuple), ctx

    def eval_ObjectLiteral(self, node, ctx):
        data = ObjData("object", None, node.lang)
        addr = ctx.store.alloc(data)
        obj = Obj(addr)
        for k, v in zip(node.keys, node.values):
            kv, ctx = self.evaluate(k, ctx)
            vv, ctx = self.evaluate(v, ctx)
            name = self.field_name(restrict_path(kv, ctx.pi))
            self.write_field(obj, name, vv, ctx, v.loc)
        return obj, ctx

    def eval_ChanType(self, node, ctx):
        return self.new_channel(ctx, node.lang), ctx

    def eval_PrimitiveType(self, node, ctx):
        return Sym("type", node.name), ctx

    def eval_FunctionDefinition(self, node, ctx):
        fn = self.make_function(node, ctx)
        if node.name and node.lang == "minijs" and node.isMethod is False and ctx.scope is not None:
            pass
        return fn, ctx

    def make_function(self, node, ctx) -> Obj:
        data = ObjData("function", node.name, node.lang)
        data.func = node
        data.closure = ctx.scope
        return Obj(ctx.store.alloc(data))

    def eval_ClassDefinition(self, node, ctx):
        bases = []
        for sup in node.supers:
            v, ctx = self.evaluate(sup, ctx)
            bases.append(restrict_path(v, ctx.pi))
        outer = ctx.scope
        class_scope = ctx.store.new_scope(ScopeData("Scope", outer, lang=node.lang))
        ctx.scope = class_scope
        ctx = self.exec_block(node.body, ctx)
        ctx.scope = outer
        members = dict(ctx.store.scope(class_scope).vars)
        data = ObjData("class", node.name, node.lang)
        data.func = node
        data.closure = outer
        data.fields = dict(members)
        handlers.dispatch(
            "classDefinition",
            node.lang,
            {"node": node, "data": data, "bases": bases, "members": members},
            ctx,
            self.config.handlers_enabled,
        )
        return Obj(ctx.store.alloc(data)), ctx

    def eval_BinaryExpression(self, node, ctx):
        op = node.operator
        if op in ("and", "or", "&&", "||", "??"):
            return self._logical(node, ctx)
        left, ctx = self.evaluate(node.left, ctx)
        right, ctx = self.evaluate(node.right, ctx)
        if op == "<-":
            return self.channel_send(left, right, ctx, node), ctx
        return self.binop(op, left, right, ctx, node.lang), ctx

    def _logical(self, node, ctx):
        op = node.operator
        left, ctx = self.evaluate(node.left, ctx)
        if op == "??":
            return left, ctx  # nullish coalescing: left unless null; keep left

        def take_left(c):
            c.value = left
            return c

        def take_right(c):
            v, c = self.evaluate(node.right, c)
            c.value = v
            return c

        if op in ("and", "&&"):
            out = self.branch(left, take_right, take_left, ctx, node.left)
        else:
            out = self.branch(left, take_left, take_right, ctx, node.left)
        value = out.value
        out.value = None
        return value, out

    def binop(self, op: str, a: AbstractValue, b: AbstractValue, ctx: Context, lang: str) -> AbstractValue:
        a = restrict_path(a, ctx.pi)
        b = restrict_path(b, ctx.pi)
        if isinstance(a, Phi):
            return cap_phi(
                make_phi(
                    a.key,
                    self.binop(op, restrict(a.when_true, a.key, True), restrict(b, a.key, True), ctx, lang),
                    self.binop(op, restrict(a.when_false, a.key, False), restrict(b, a.key, False), ctx, lang),
                    a.expr,
                ),
                self.config.path_merge_cap,
            )
        if isinstance(b, Phi):
            return cap_phi(
                make_phi(
                    b.key,
                    self.binop(op, a, b.when_true, ctx, lang),
                    self.binop(op, a, b.when_false, ctx, lang),
                    b.expr,
                ),
                self.config.path_merge_cap,
            )
        taint = Taint.union(a.taint, b.taint)
        if isinstance(a, Prim) and isinstance(b, Prim):
            try:
                return _prim(concrete_binop(op, a.value, b.value, lang), taint)
            except Exception:
                pass
        if isinstance(a, Obj) and isinstance(b, Obj) and op in ("==", "===", "is", "!=", "!==", "is not"):
            same = a.addr == b.addr
            return Prim("boolean", same if op in ("==", "===", "is") else not same, taint)
        return Sym("expr", f"({a.show()} {op} {b.show()})", ("op", op, value_key(a), value_key(b)), taint)

    def eval_UnaryExpression(self, node, ctx):
        arg, ctx = self.evaluate(node.argument, ctx)
        if node.operator == "<-":
            return self.channel_receive(arg, ctx, node), ctx
        return map_leaves(restrict_path(arg, ctx.pi), lambda v: self.unop(node.operator, v, ctx)), ctx

    def unop(self, op: str, v: AbstractValue, ctx: Context) -> AbstractValue:
        if op in ("not", "!"):
            truth = self.truthiness(v, ctx) if not isinstance(v, Sym) else None
            if truth is not None:
                return Prim("boolean", not truth, v.taint)
            if isinstance(v, Sym):
                if v.negates is not None:
                    return v.negates
                return Sym("expr", f"not {v.name}", ("not", value_key(v)), v.taint, negates=v)
            return Sym("expr", f"not {v.show()}", ("not", value_key(v)), v.taint)
        if isinstance(v, Prim):
            try:
                if op == "-":
                    return _prim(-v.value, v.taint)
                if op == "+":
                    return _prim(+v.value, v.taint)
                if op == "~":
                    return _prim(~v.value, v.taint)
                if op == "typeof":
                    return Prim("string", {"number": "number", "string": "string", "boolean": "boolean"}.get(v.type, "object"), v.taint)
            except Exception:
                pass
        return Sym("expr", f"{op}{v.show()}", ("unary", op, value_key(v)), v.taint)

    def eval_ConditionalExpression(self, node, ctx):
        test, ctx = self.evaluate(node.test, ctx)

        def arm(expr):
            def run(c):
                v, c = self.evaluate(expr, c)
                c.value = v
                return c

            return run

        out = self.branch(test, arm(node.consequent), arm(node.alternate), ctx, node.test)
        value = out.value if out.value is not None else UNDEFINED
        out.value = None
        return value, out

    def eval_MemberAccess(self, node, ctx):
        obj, ctx = self.evaluate(node.object, ctx)
        value = self.read_field(obj, node.property, ctx, node.loc)
        value = self.task.emit("fieldRead", ctx, node.loc, value, node.property)
        return value, ctx

    def eval_IndexAccess(self, node, ctx):
        obj, ctx = self.evaluate(node.object, ctx)
        index, ctx = self.evaluate(node.index, ctx)
        value = self.read_index(obj, index, ctx, node.loc)
        value = self.task.emit("fieldRead", ctx, node.loc, value, "[]")
        return value, ctx

    def eval_AssignmentExpression(self, node, ctx):
        if node.operator != "=":
            current, ctx = self.evaluate(node.left, ctx)
            rhs, ctx = self.evaluate(node.right, ctx)
            value = self.binop(node.operator[:-1], current, rhs, ctx, node.lang)
        else:
            value, ctx = self.evaluate(node.right, ctx)
        if ctx.dead:
            return value, ctx
        ctx = self.assign_target(node.left, value, ctx, node)
        return value, ctx

    def assign_target(self, target: UastNode, value: AbstractValue, ctx: Context, node: UastNode) -> Context:
        kind = target.kind
        if kind == "Identifier":
            self.assign_var(target.name, value, ctx, target)
        elif kind == "MemberAccess":
            obj, ctx = self.evaluate(target.object, ctx)
            self._store_into(target.object, obj, target.property, value, ctx, target.loc)
        elif kind == "IndexAccess":
            obj, ctx = self.evaluate(target.object, ctx)
            index, ctx = self.evaluate(target.index, ctx)
            index = restrict_path(index, ctx.pi)
            name = self.field_name(index) if not isinstance(index, Phi) else None
            self._store_into(target.object, obj, name, value, ctx, target.loc)
        elif kind == "ArrayLiteral":
            for i, el in enumerate(target.elements):
                part = self.read_index(value, Prim("number", i), ctx, node.loc)
                ctx = self.assign_target(el, part, ctx, node)
        else:
            raise AssertionError(f"bad assignment target {kind}")
        return ctx

    def _store_into(self, obj_node, obj, name, value, ctx, loc) -> None:
        updated = self.write_field(obj, name, value, ctx, loc)
        if updated is not restrict_path(obj, ctx.pi) and updated != obj and obj_node.kind in ("Identifier", "MemberAccess", "IndexAccess"):
            # a Sym got materialized into an object: put it where the Sym was
            if obj_node.kind == "Identifier" and not (obj_node.name == "this"):
                self._rebind(obj_node.name, updated, ctx)
            elif obj_node.kind == "MemberAccess":
                parent, _ = self.evaluate(obj_node.object, ctx)
                self.write_field(parent, obj_node.property, updated, ctx, None)

    def _rebind(self, name: str, value: AbstractValue, ctx: Context) -> None:
        sid = ctx.scope
        while sid is not None:
            data = ctx.store.scope(sid)
            if name in data.vars:
                ctx.store.scope_w(sid).vars[name] = value
                return
            sid = data.parent
        self.declare(name, value, ctx, DeclInfo("assign", None))

    def eval_AwaitExpression(self, node, ctx):
        value, ctx = self.evaluate(node.argument, ctx)
        return map_leaves(restrict_path(value, ctx.pi), lambda v: self._await(v, ctx, node)), ctx

    def _await(self, v, ctx, node):
        if isinstance(v, Obj):
            data = ctx.store.obj(v.addr)
            if data.kind == "promise":
                payload = data.fields.get(PAYLOAD, UNDEFINED)
                return self.task.emit("promiseOp", ctx, node.loc, payload, "await")
            return v
        if isinstance(v, Sym):
            return self.task.emit("promiseOp", ctx, node.loc, self.child_sym(v, "await"), "await")
        return v

    def eval_YieldExpression(self, node, ctx):
        if node.argument is not None:
            value, ctx = self.evaluate(node.argument, ctx)
        else:
            value = UNDEFINED
        ctx.frame.yields.append(value)
        return self.fresh_sym("yield", "yield", node.loc), ctx

    def eval_NewExpression(self, node, ctx):
        callee, ctx = self.evaluate(node.callee, ctx)
        args = []
        for a in node.arguments:
            v, ctx = self.evaluate(a, ctx)
            args.append(v)
        names = self.callee_names(node.callee, callee, ctx)
        site = CallSite(node, names, callee, args, None, True)
        hit = self.task.intercept(site, ctx)
        if hit is not None:
            return hit, ctx
        self.task.emit("sinkCall", ctx, node.loc, None, "", site=site)
        out = self.split_value(callee, ctx, lambda c, cx: self._construct(c, args, cx, node, names))
        value = out.value
        out.value = None
        return value, out

    def _construct(self, callee, args, ctx, node, names):
        if isinstance(callee, Obj):
            data = ctx.store.obj(callee.addr)
            if data.kind in ("class", "function"):
                return self.instantiate(callee, args, ctx, node)
        return self.unknown_call(names, callee, args, None, ctx, node), ctx

    def instantiate(self, cls: Obj, args: list, ctx: Context, node) -> tuple[AbstractValue, Context]:
        cdata = ctx.store.obj(cls.addr)
        inst_data = ObjData("instance", cdata.name, cdata.lang)
        inst = Obj(ctx.store.alloc(inst_data))
        if cdata.kind == "class":
            inst_data.proto = cls
        handlers.dispatch(
            "callPre",
            cdata.lang,
            {"kind": "new", "constructor": cls, "instance": inst, "args": args},
            ctx,
            self.config.handlers_enabled,
        )
        if cdata.kind == "function":
            _, ctx = self.call_function(cls, args, inst, ctx, node)
        else:
            init_name = "__init__" if cdata.lang == "minipy" else "constructor"
            init = self.read_field(inst, init_name, ctx)
            init = restrict_path(init, ctx.pi)
            if isinstance(init, Obj) and ctx.store.obj(init.addr).kind == "function":
                _, ctx = self.call_function(init, args, inst, ctx, node)
        handlers.dispatch(
            "callPost",
            cdata.lang,
            {"kind": "new", "constructor": cls, "instance": inst},
            ctx,
            self.config.handlers_enabled,
        )
        return inst, ctx

    # -- calls ---------------------------------------------------------------

    def callee_names(self, callee_node: UastNode, callee: AbstractValue, ctx: Context) -> tuple[str, ...]:
        names: list[str] = []
        dotted = _dotted(callee_node)
        if dotted:
            names.append(dotted)
        for _, leaf in feasible_leaves(callee, ctx.pi):
            if isinstance(leaf, Sym):
                names.append(leaf.name)
            elif isinstance(leaf, Obj):
                data = ctx.store.obj(leaf.addr)
                if data.name:
                    names.append(data.name)
        seen = []
        for n in names:
            if n not in seen:
                seen.append(n)
        return tuple(seen)

    def eval_CallExpression(self, node, ctx):
        callee_node = node.callee
        receiver = None
        if callee_node.kind == "MemberAccess":
            receiver, ctx = self.evaluate(callee_node.object, ctx)
            callee = self.read_field(receiver, callee_node.property, ctx, callee_node.loc)
            callee = self.task.emit("fieldRead", ctx, callee_node.loc, callee, callee_node.property)
        else:
            callee, ctx = self.evaluate(callee_node, ctx)
        args = []
        for a in node.arguments:
            v, ctx = self.evaluate(a, ctx)
            args.append(v)
        if ctx.dead:
            return UNDEFINED, ctx
        names = self.callee_names(callee_node, callee, ctx)
        site = CallSite(node, names, callee, args, receiver)
        hit = self.task.intercept(site, ctx)
        if hit is not None:
            return hit, ctx
        self.task.emit("sinkCall", ctx, node.loc, None, "", site=site)
        method = callee_node.property if callee_node.kind == "MemberAccess" else None
        out = self.split_value(
            callee, ctx, lambda c, cx: self.call(c, args, receiver, cx, node, names, method)
        )
        value = out.value if out.value is not None else UNDEFINED
        out.value = None
        return value, out

    def call(self, callee, args, receiver, ctx, node, names=(), method=None) -> tuple[AbstractValue, Context]:
        """Apply a (non-Phi) callee value to evaluated arguments."""
        if method is not None and receiver is not None:
            result = self.method_builtin(receiver, method, args, ctx, node)
            if result is not None:
                return result
        if isinstance(callee, Obj):
            data = ctx.store.obj(callee.addr)
            if data.kind == "function":
                return self.call_function(callee, args, receiver, ctx, node)
            if data.kind == "class":
                return self.instantiate(callee, args, ctx, node)
            if data.kind == "builtin":
                return self.builtin_object_call(data, args, receiver, ctx, node)
        model = self.name_builtin(names, args, receiver, ctx, node)
        if model is not None:
            return model
        return self.unknown_call(names, callee, args, receiver, ctx, node), ctx

    def unknown_call(self, names, callee, args, receiver, ctx, node) -> Sym:
        """Conservative model: any tainted input taints the (symbolic) result."""
        inputs = [callee] + list(args)
        if receiver is not None:
            inputs.append(receiver)
        taint = Taint.union(*(self._deep_taint(v, ctx) for v in inputs))
        name = (names[0] if names else "<call>") + "()"
        result = self.fresh_sym("call", name, node.loc, taint)
        if taint:
            result = self.task.emit("callReturn", ctx, node.loc, result, name)
        return result

    def _deep_taint(self, v: AbstractValue, ctx: Context) -> Taint:
        own = join_taint(v, ctx.pi)
        if own:
            return own
        for _, leaf in feasible_leaves(v, ctx.pi):
            if isinstance(leaf, Obj):
                data = ctx.store.obj(leaf.addr)
                if data.kind in ("array", "object"):
                    for name, fv in sorted(data.fields.items()):
                        t = join_taint(fv, ctx.pi)
                        if t:
                            return t
        return CLEAN

    def method_builtin(self, receiver, method, args, ctx, node):
        recv = restrict_path(receiver, ctx.pi)
        if not isinstance(recv, Obj):
            return None
        data = ctx.store.obj(recv.addr)
        if method in data.fields:
            return None
        if data.kind == "array" and method in ("append", "push") and args:
            self.array_append(recv, args[0], ctx, node.loc)
            return UNDEFINED, ctx
        if data.kind == "promise" and method == "then":
            return self.promise_then(recv, args, ctx, node)
        if data.kind == "promise" and method in ("catch", "finally"):
            return recv, ctx
        if data.kind == "object" and method == "get" and args and data.lang == "minipy":
            return self.read_index(recv, args[0], ctx, node.loc), ctx
        return None

    def promise_then(self, promise: Obj, args, ctx, node):
        payload = ctx.store.obj(promise.addr).fields.get(PAYLOAD, UNDEFINED)
        payload = self.task.emit("promiseOp", ctx, node.loc, payload, "then")
        if not args:
            return promise, ctx
        result, ctx = self.split_value_call(args[0], [payload], ctx, node)
        result = restrict_path(result, ctx.pi)
        if isinstance(result, Obj) and ctx.store.obj(result.addr).kind == "promise":
            return result, ctx
        return self.new_promise(ctx, result, node.lang), ctx

    def split_value_call(self, callee, args, ctx, node):
        out = self.split_value(callee, ctx, lambda c, cx: self.call(c, args, None, cx, node, self._value_names(c, cx)))
        value = out.value if out.value is not None else UNDEFINED
        out.value = None
        return value, out

    def _value_names(self, v, ctx):
        if isinstance(v, Sym):
            return (v.name,)
        if isinstance(v, Obj) and ctx.store.obj(v.addr).name:
            return (ctx.store.obj(v.addr).name,)
        return ()

    def builtin_object_call(self, data: ObjData, args, receiver, ctx, node):
        if data.model == "identity":
            return (args[0] if args else UNDEFINED), ctx
        if data.model == "sym-returning":
            taint = join_taint(receiver, ctx.pi) if receiver is not None else CLEAN
            return self.fresh_sym("call", f"{data.name}()", node.loc, taint), ctx
        return self.unknown_call((data.name or "builtin",), Obj(0), args, receiver, ctx, node), ctx

    def name_builtin(self, names, args, receiver, ctx, node):
        for name in names:
            short = name
            if short in ("print", "console.log", "console.error"):
                return UNDEFINED, ctx
            if short == "len" and len(args) == 1:
                return self._len(args[0], ctx), ctx
            if short == "Promise.resolve":
                payload = args[0] if args else UNDEFINED
                payload = self.task.emit("promiseOp", ctx, node.loc, payload, "resolve")
                return self.new_promise(ctx, payload, node.lang), ctx
            if short == "make" and args:
                return args[0], ctx
            if short == "range" and args:
                arr = self._range(args, ctx)
                if arr is not None:
                    return arr, ctx
        return None

    def _len(self, v, ctx) -> AbstractValue:
        v = restrict_path(v, ctx.pi)
        if isinstance(v, Obj):
            length = ctx.store.obj(v.addr).fields.get(LENGTH)
            if isinstance(length, Prim):
                return Prim("number", length.value)
        if isinstance(v, Prim) and v.type == "string":
            return Prim("number", len(v.value))
        return Sym("call", f"len({v.show() if not isinstance(v, Phi) else 'phi'})", ("len", value_key(v)))

    def _range(self, args, ctx) -> Optional[Obj]:
        vals = [restrict_path(a, ctx.pi) for a in args]
        if not all(isinstance(v, Prim) and isinstance(v.value, int) and not isinstance(v.value, bool) for v in vals):
            return None
        try:
            seq = range(*[v.value for v in vals])
        except (TypeError, ValueError):
            return None
        if len(seq) > MAX_CONCRETE_RANGE:
            return None
        return self.new_array(ctx, [Prim("number", i) for i in seq], "minipy")

    def call_function(self, fn: Obj, args: list, receiver, ctx: Context, node) -> tuple[AbstractValue, Context]:
        """Interpret a closure body in a fresh Fclos scope, bounded by ``maxCallDepth``."""
        data = ctx.store.obj(fn.addr)
        fnode = data.func
        if len(ctx.kappa) + 1 > self.config.max_call_depth:
            self.task.stats["depth_limited"] += 1
            taint = Taint.union(*(join_taint(a, ctx.pi) for a in args))
            return self.fresh_sym("depth-limited", "depth-limited call", node.loc, taint), ctx
        self.task.stats["call_descents"] += 1
        handlers.dispatch(
            "callPre", fnode.lang, {"kind": "call", "function": fn, "args": args}, ctx, self.config.handlers_enabled
        )
        this = None
        if fnode.lang != "minipy" and not fnode.lexicalThis:
            this = receiver if receiver is not None else Sym("unknown", "this")
        call_args = list(args)
        if fnode.lang == "minipy" and fnode.isMethod and receiver is not None:
            recv = restrict_path(receiver, ctx.pi)
            if isinstance(recv, Obj) and ctx.store.obj(recv.addr).kind == "instance":
                call_args = [receiver] + call_args
        saved = (ctx.scope, ctx.kappa, ctx.frame)
        sid = ctx.store.new_scope(ScopeData("Fclos", data.closure, func=fnode, this=this, lang=fnode.lang))
        frame = Frame(function=fnode, generator=bool(fnode.generator))
        ctx.scope = sid
        ctx.kappa = ctx.kappa + (sid,)
        ctx.frame = frame
        for i, param in enumerate(fnode.params):
            pname = param.id.name
            if i < len(call_args):
                value = call_args[i]
            elif param.init is not None:
                value, ctx = self.evaluate(param.init, ctx)
            else:
                value = uninit(pname)
            value = self.task.emit("callArg", ctx, param.loc, value, pname)
            self.declare(pname, value, ctx, DeclInfo("param", param.loc))
        end = self.exec_block(fnode.body, ctx)
        if not end.dead:
            end.value = UNDEFINED
        out = self.chain_merge(frame.returns + [end])
        if out is None or out.dead:
            out = end
        for parked in frame.throws:
            parked.scope, parked.kappa, parked.frame = saved
            self._throw_target(saved[2]).append(parked)
        value = out.value if out.value is not None else UNDEFINED
        out.scope, out.kappa, out.frame = saved
        out.value = None
        if out.dead:
            return UNDEFINED, out
        if frame.generator:
            arr_data = ObjData("array", None, fnode.lang)
            if frame.yields:
                arr_data.fields[ANY] = self.join(frame.yields, out)
            arr_data.fields[LENGTH] = Sym("length", "len", ("gen", _loc_key(node.loc), self.task.counter.next()))
            value = Obj(out.store.alloc(arr_data))
        if fnode.get("async"):
            value = self.new_promise(out, value, fnode.lang)
        value = self.task.emit("callReturn", out, node.loc, value, data.name or "<lambda>")
        handlers.dispatch(
            "callPost", fnode.lang, {"kind": "call", "function": fn, "result": value}, out, self.config.handlers_enabled
        )
        return value, out

    # -- channels ------------------------------------------------------------

    def channel_send(self, chan, value, ctx, node):
        for _, leaf in feasible_leaves(chan, ctx.pi):
            if isinstance(leaf, Obj) and ctx.store.obj(leaf.addr).kind == "channel":
                data = ctx.store.obj_w(leaf.addr)
                sent = self.task.emit("channelOp", ctx, node.loc, value, "send")
                old = data.fields.get(CELL)
                data.fields[CELL] = sent if old is None else self.join([old, sent], ctx)
        return UNDEFINED

    def channel_receive(self, chan, ctx, node):
        def recv(leaf):
            if isinstance(leaf, Obj):
                data = ctx.store.obj(leaf.addr)
                if data.kind == "channel":
                    cell = data.fields.get(CELL)
                    if cell is None:
                        return Sym("recv", "<-chan", ("recv", leaf.addr))
                    return self.task.emit("channelOp", ctx, node.loc, cell, "receive")
            if isinstance(leaf, Sym):
                return self.task.emit("channelOp", ctx, node.loc, self.child_sym(leaf, "<-"), "receive")
            return Sym("recv", "<-?", None, leaf.taint)

        return map_leaves(restrict_path(chan, ctx.pi), recv)


def _dotted(node: UastNode) -> Optional[str]:
    if node.kind == "Identifier":
        return node.name
    if node.kind == "MemberAccess":
        base = _dotted(node.object)
        return f"{base}.{node.property}" if base else None
    return None


def _common_prefix(pis: list) -> tuple:
    if not pis:
        return ()
    first = pis[0]
    n = min(len(p) for p in pis)
    i = 0
    while i < n and all((p[i].key == first[i].key and p[i].polarity == first[i].polarity) for p in pis):
        i += 1
    return first[:i]
