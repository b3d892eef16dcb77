"""Scopes, heap objects and the per-path context.

The store maps scope ids to :class:`ScopeData` and heap addresses to
:class:`ObjData`.  Forking a context copies only the two outer dicts; the
inner records are copied the first time an arm writes them, so a write in
one arm is never visible in the other.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Optional

from .values import AbstractValue, PathCondition

SCOPE_KINDS = ("Scope", "Fclos", "Global", "Uninit", "Sym")


@dataclass(frozen=True)
class DeclInfo:
    kind: str  # var | let | const | param | assign | function | class | import
    loc: Any
    type_tag: Optional[str] = None


class ScopeData:
    __slots__ = ("kind", "parent", "vars", "decls", "func", "this", "lang")

    def __init__(self, kind: str, parent: Optional[int], func: Any = None, this: Optional[AbstractValue] = None, lang: str = "raw"):
        if kind not in SCOPE_KINDS:
            raise ValueError(kind)
        self.kind = kind
        self.parent = parent
        self.vars: dict[str, AbstractValue] = {}
        self.decls: dict[str, DeclInfo] = {}
        self.func = func
        self.this = this
        self.lang = lang

    def copy(self) -> "ScopeData":
        new = ScopeData.__new__(ScopeData)
        new.kind, new.parent, new.func, new.this, new.lang = self.kind, self.parent, self.func, self.this, self.lang
        new.vars = dict(self.vars)
        new.decls = dict(self.decls)
        return new


OBJ_KINDS = ("object", "array", "function", "class", "instance", "module", "promise", "channel", "builtin")


class ObjData:
    __slots__ = ("kind", "fields", "proto", "name", "func", "closure", "sym_base", "source_fields", "lang", "model")

    def __init__(self, kind: str, name: Optional[str] = None, lang: str = "raw"):
        if kind not in OBJ_KINDS:
            raise ValueError(kind)
        self.kind = kind
        self.fields: dict[str, AbstractValue] = {}
        self.proto: Optional[AbstractValue] = None
        self.name = name
        self.func = None  # FunctionDefinition / ClassDefinition node
        self.closure: Optional[int] = None  # defining scope id
        self.sym_base = None  # Sym this object materializes
        self.source_fields: dict[str, str] = {}  # field -> source label (framework request objects)
        self.lang = lang
        self.model = None  # builtin model name

    def copy(self) -> "ObjData":
        new = ObjData.__new__(ObjData)
        for slot in ObjData.__slots__:
            setattr(new, slot, getattr(self, slot))
        new.fields = dict(self.fields)
        return new


class Counter:
    """Allocation ids shared by every fork of one analysis task."""

    def __init__(self) -> None:
        self._it = itertools.count(1)

    def next(self) -> int:
        return next(self._it)


class Store:
    __slots__ = ("scopes", "heap", "owned_scopes", "owned_objs", "counter")

    def __init__(self, counter: Counter):
        self.scopes: dict[int, ScopeData] = {}
        self.heap: dict[int, ObjData] = {}
        self.owned_scopes: set[int] = set()
        self.owned_objs: set[int] = set()
        self.counter = counter

    def fork(self) -> "Store":
        child = Store(self.counter)
        child.scopes = dict(self.scopes)
        child.heap = dict(self.heap)
        self.owned_scopes = set()
        self.owned_objs = set()
        return child

    def new_scope(self, data: ScopeData) -> int:
        sid = self.counter.next()
        self.scopes[sid] = data
        self.owned_scopes.add(sid)
        return sid

    def alloc(self, data: ObjData) -> int:
        addr = self.counter.next()
        self.heap[addr] = data
        self.owned_objs.add(addr)
        return addr

    def scope(self, sid: int) -> ScopeData:
        return self.scopes[sid]

    def scope_w(self, sid: int) -> ScopeData:
        if sid not in self.owned_scopes:
            self.scopes[sid] = self.scopes[sid].copy()
            self.owned_scopes.add(sid)
        return self.scopes[sid]

    def obj(self, addr: int) -> ObjData:
        return self.heap[addr]

    def obj_w(self, addr: int) -> ObjData:
        if addr not in self.owned_objs:
            self.heap[addr] = self.heap[addr].copy()
            self.owned_objs.add(addr)
        return self.heap[addr]


@dataclass
class LoopRecord:
    breaks: list = field(default_factory=list)
    continues: list = field(default_factory=list)


@dataclass
class TryRecord:
    throws: list = field(default_factory=list)


@dataclass
class Frame:
    """One function activation (or the module top level).

    The pending lists are shared by every fork inside the activation; they
    collect the contexts that left the normal flow (return/throw/break/...).
    """

    function: Any = None
    returns: list = field(default_factory=list)
    throws: list = field(default_factory=list)
    yields: list = field(default_factory=list)
    loops: list = field(default_factory=list)
    tries: list = field(default_factory=list)
    generator: bool = False


class Context:
    """⟨σ, κ, π⟩ plus the store and the bookkeeping of the current activation."""

    __slots__ = ("store", "scope", "kappa", "pi", "frame", "dead", "value", "task")

    def __init__(self, store: Store, scope: int, kappa: tuple, pi: tuple, frame: Frame, task: Any):
        self.store = store
        self.scope = scope
        self.kappa = kappa
        self.pi: tuple[PathCondition, ...] = pi
        self.frame = frame
        self.dead = False
        self.value: Optional[AbstractValue] = None
        self.task = task

    def fork(self) -> "Context":
        child = Context(self.store.fork(), self.scope, self.kappa, self.pi, self.frame, self.task)
        child.value = self.value
        return child

    def killed(self) -> "Context":
        """A dead context standing for 'no normal continuation'."""
        dead = Context(self.store, self.scope, self.kappa, self.pi, self.frame, self.task)
        dead.dead = True
        return dead

    def with_cond(self, cond: PathCondition) -> "Context":
        self.pi = self.pi + (cond,)
        return self
