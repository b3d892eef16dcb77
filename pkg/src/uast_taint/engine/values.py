"""Abstract value domain.

``Prim`` holds a concrete scalar, ``Obj`` is a reference into the heap,
``Sym`` stands for something the interpreter cannot resolve, and ``Phi`` is a
binary decision tree over path conditions whose leaves are the alternatives
produced by a merge.  Every value carries a :class:`Taint`; a Phi carries none
of its own and is tainted through its leaves.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from typing import Any, Iterator, Optional, Union

from ..uast.nodes import SourceLocation

STEP_KINDS = (
    "source",
    "assign",
    "field",
    "call-arg",
    "call-return",
    "prototype",
    "promise",
    "channel",
    "sink",
)


@dataclass(frozen=True)
class TraceStep:
    kind: str
    loc: SourceLocation
    description: str = ""

    def __post_init__(self) -> None:
        if self.kind not in STEP_KINDS:
            raise ValueError(f"unknown trace step kind {self.kind!r}")


@dataclass(frozen=True)
class Taint:
    """Taint state attached to one value: ⊥ is the empty label set."""

    labels: frozenset = frozenset()
    trace: tuple[TraceStep, ...] = ()

    def __post_init__(self) -> None:
        if bool(self.labels) != bool(self.trace):
            raise ValueError("labels and trace must be empty together")

    def __bool__(self) -> bool:
        return bool(self.labels)

    def extend(self, step: TraceStep) -> "Taint":
        if not self.labels:
            return self
        if self.trace and self.trace[-1] == step:
            return self
        return Taint(self.labels, self.trace + (step,))

    @staticmethod
    def source(label: str, step: TraceStep) -> "Taint":
        return Taint(frozenset([label]), (step,))

    @staticmethod
    def union(*taints: "Taint") -> "Taint":
        """Labels of all operands; the trace of the first tainted one."""
        live = [t for t in taints if t.labels]
        if not live:
            return CLEAN
        if len(live) == 1:
            return live[0]
        labels = frozenset().union(*(t.labels for t in live))
        return Taint(labels, live[0].trace)


CLEAN = Taint()


@dataclass(frozen=True)
class Prim:
    type: str  # number | string | boolean | null
    value: Any
    taint: Taint = CLEAN

    def with_taint(self, taint: Taint) -> "Prim":
        return self if taint is self.taint else replace(self, taint=taint)

    def key(self) -> tuple:
        return ("prim", self.type, self.value)

    def show(self) -> str:
        return repr(self.value)


@dataclass(frozen=True)
class Sym:
    type: str
    name: str
    origin: Any = None
    taint: Taint = CLEAN
    negates: Optional["Sym"] = None

    def with_taint(self, taint: Taint) -> "Sym":
        return self if taint is self.taint else replace(self, taint=taint)

    def key(self) -> tuple:
        return ("sym", self.type, self.name, self.origin)

    def show(self) -> str:
        return self.name


@dataclass(frozen=True)
class Obj:
    addr: int
    taint: Taint = CLEAN

    def with_taint(self, taint: Taint) -> "Obj":
        return self if taint is self.taint else replace(self, taint=taint)

    def key(self) -> tuple:
        return ("obj", self.addr)

    def show(self) -> str:
        return f"obj#{self.addr}"


@dataclass(frozen=True)
class PathCondition:
    """One branch decision: the condition identity and the arm taken.

    ``key`` identifies the tested value (two tests of the same unresolved
    value share a key); ``expr`` points at the test expression for reporting.
    """

    key: Any
    polarity: bool
    expr: Any = field(default=None, compare=False, hash=False)

    def negated(self) -> "PathCondition":
        return PathCondition(self.key, not self.polarity, self.expr)


@dataclass(frozen=True)
class Phi:
    key: Any
    when_true: "AbstractValue"
    when_false: "AbstractValue"
    expr: Any = field(default=None, compare=False, hash=False)
    depth: int = field(default=1, compare=False)
    keys: frozenset = field(default=frozenset(), compare=False)

    @property
    def taint(self) -> Taint:
        return CLEAN

    def with_taint(self, taint: Taint) -> "Phi":
        return map_leaves(self, lambda leaf: leaf.with_taint(taint))

    def key_(self) -> tuple:
        return ("phi", self.key, value_key(self.when_true), value_key(self.when_false))

    def show(self) -> str:
        return f"phi({self.when_true.show()} | {self.when_false.show()})"


AbstractValue = Union[Prim, Obj, Sym, Phi]

UNDEFINED = Prim("null", None)


def uninit(name: str) -> Sym:
    return Sym("uninit", name)


def is_uninit(v: AbstractValue) -> bool:
    return isinstance(v, Sym) and v.type == "uninit"


def value_key(v: AbstractValue) -> tuple:
    """Structural identity ignoring taint; used for path-condition keys."""
    if isinstance(v, Phi):
        return v.key_()
    return v.key()


def _phi_meta(a: AbstractValue, b: AbstractValue, key: Any) -> tuple[int, frozenset]:
    da = a.depth if isinstance(a, Phi) else 0
    db = b.depth if isinstance(b, Phi) else 0
    ka = a.keys if isinstance(a, Phi) else frozenset()
    kb = b.keys if isinstance(b, Phi) else frozenset()
    return 1 + max(da, db), ka | kb | {key}


def restrict(v: AbstractValue, key: Any, polarity: bool) -> AbstractValue:
    """Specialize ``v`` to the arm where ``key`` has ``polarity``."""
    if not isinstance(v, Phi) or key not in v.keys:
        return v
    if v.key == key:
        return restrict(v.when_true if polarity else v.when_false, key, polarity)
    return make_phi(v.key, restrict(v.when_true, key, polarity), restrict(v.when_false, key, polarity), v.expr)


def restrict_path(v: AbstractValue, path) -> AbstractValue:
    if not isinstance(v, Phi):
        return v
    for cond in path:
        if cond.key in v.keys:
            v = restrict(v, cond.key, cond.polarity)
            if not isinstance(v, Phi):
                break
    return v


def make_phi(key: Any, when_true: AbstractValue, when_false: AbstractValue, expr: Any = None) -> AbstractValue:
    """Build a Phi, collapsing it when both arms are the same value."""
    when_true = restrict(when_true, key, True)
    when_false = restrict(when_false, key, False)
    if when_true == when_false:
        return when_true
    depth, keys = _phi_meta(when_true, when_false, key)
    return Phi(key, when_true, when_false, expr, depth, keys)


def cap_phi(v: AbstractValue, cap: int) -> AbstractValue:
    """Replace a Phi deeper than ``cap`` by one Sym carrying the union of leaf taint."""
    if isinstance(v, Phi) and v.depth > cap:
        leaves = [leaf for _, leaf in iter_leaves(v)]
        taint = Taint.union(*(leaf.taint for leaf in leaves))
        digest = hashlib.sha1(repr(value_key(v)).encode()).hexdigest()[:10]
        return Sym("merged", f"merged@{digest}", None, taint)
    return v


def iter_leaves(v: AbstractValue, path: tuple = ()) -> Iterator[tuple[tuple[PathCondition, ...], AbstractValue]]:
    """Yield ``(path, leaf)`` for every leaf whose root path is self-consistent."""
    if not isinstance(v, Phi):
        yield path, v
        return
    seen = {c.key: c.polarity for c in path}
    for polarity, child in ((True, v.when_true), (False, v.when_false)):
        if seen.get(v.key, polarity) != polarity:
            continue
        yield from iter_leaves(child, path + (PathCondition(v.key, polarity, v.expr),))


def feasible_leaves(v: AbstractValue, pi=()) -> list[tuple[tuple, AbstractValue]]:
    """Leaves reachable under the current path condition list ``pi``."""
    fixed = {c.key: c.polarity for c in pi}
    out = []
    for path, leaf in iter_leaves(v):
        if all(fixed.get(c.key, c.polarity) == c.polarity for c in path):
            out.append((path, leaf))
    return out


def map_leaves(v: AbstractValue, fn) -> AbstractValue:
    if isinstance(v, Phi):
        return make_phi(v.key, map_leaves(v.when_true, fn), map_leaves(v.when_false, fn), v.expr)
    return fn(v)


def join_taint(v: AbstractValue, pi=()) -> Taint:
    """Union of the taint of every feasible leaf."""
    return Taint.union(*(leaf.taint for _, leaf in feasible_leaves(v, pi)))


def first_tainted_leaf(v: AbstractValue, pi=()) -> Optional[AbstractValue]:
    for _, leaf in feasible_leaves(v, pi):
        if leaf.taint:
            return leaf
    return None


def contradicts(pi, cond: PathCondition) -> bool:
    return any(c.key == cond.key and c.polarity != cond.polarity for c in pi)


def decided(pi, key: Any) -> Optional[bool]:
    for c in pi:
        if c.key == key:
            return c.polarity
    return None
