"""UAST node type and the 32-kind registry.

Every kind belongs to one syntactic category and is either *universal*
(shared across frontends) or *specific* to one language.  The slot table
below is the single source of truth for which children and attributes a
kind carries; validation, serialization and the frontends all read it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Mapping, Optional, Union

LANG_TAGS = ("minipy", "minijs", "raw")


@dataclass(frozen=True, order=True)
class SourceLocation:
    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __post_init__(self) -> None:
        if self.start_line > self.end_line or (
            self.start_line == self.end_line and self.start_col > self.end_col
        ):
            raise ValueError(f"inverted source range: {self}")

    @classmethod
    def point(cls, file: str, line: int, col: int) -> "SourceLocation":
        return cls(file, line, col, line, col)

    def span_to(self, other: "SourceLocation") -> "SourceLocation":
        return SourceLocation(self.file, self.start_line, self.start_col, other.end_line, other.end_col)

    def __str__(self) -> str:
        return f"{self.file}:{self.start_line}:{self.start_col}"


NOWHERE = SourceLocation("<synthetic>", 1, 1, 1, 1)


# ---------------------------------------------------------------------------
# Registry

BASIC = "Basic"
STATEMENT = "Statement"
EXPRESSION = "Expression"
DECLARATION = "Declaration"
TYPE = "Type"

CATEGORIES: dict[str, tuple[str, ...]] = {
    BASIC: ("Noop", "Literal", "Identifier", "Sequence"),
    STATEMENT: (
        "IfStatement",
        "ReturnStatement",
        "WhileStatement",
        "RangeStatement",
        "TryStatement",
        "ExpressionStatement",
        "BreakStatement",
        "ContinueStatement",
        "ThrowStatement",
        "ImportStatement",
    ),
    EXPRESSION: (
        "BinaryExpression",
        "UnaryExpression",
        "CallExpression",
        "MemberAccess",
        "IndexAccess",
        "NewExpression",
        "AssignmentExpression",
        "ConditionalExpression",
        "ObjectLiteral",
        "ArrayLiteral",
        "AwaitExpression",
        "YieldExpression",
    ),
    DECLARATION: ("FunctionDefinition", "VariableDeclaration", "ClassDefinition", "PackageDeclaration"),
    TYPE: ("PrimitiveType", "ChanType"),
}

CATEGORY_OF: dict[str, str] = {k: cat for cat, kinds in CATEGORIES.items() for k in kinds}
ALL_KINDS: tuple[str, ...] = tuple(k for kinds in CATEGORIES.values() for k in kinds)

# kind -> language that owns it; everything else is universal
SPECIFIC_KINDS: dict[str, str] = {
    "YieldExpression": "minipy",
    "ChanType": "go",
}
UNIVERSAL_KINDS: frozenset[str] = frozenset(ALL_KINDS) - frozenset(SPECIFIC_KINDS)


def is_universal(kind: str) -> bool:
    return kind in UNIVERSAL_KINDS


# Slot constraint groups
STMT_KINDS = frozenset(CATEGORIES[STATEMENT]) | {
    "FunctionDefinition",
    "VariableDeclaration",
    "ClassDefinition",
    "Noop",
}
EXPR_KINDS = frozenset(CATEGORIES[EXPRESSION]) | {
    "Literal",
    "Identifier",
    "Sequence",
    "FunctionDefinition",
    "ClassDefinition",
    "ChanType",
}
TYPE_KINDS = frozenset(CATEGORIES[TYPE])
TARGET_KINDS = frozenset({"Identifier", "MemberAccess", "IndexAccess", "ArrayLiteral"})

GROUPS: dict[str, frozenset[str]] = {
    "stmt": STMT_KINDS,
    "expr": EXPR_KINDS,
    "type": TYPE_KINDS,
    "target": TARGET_KINDS,
    "ident": frozenset({"Identifier"}),
    "param": frozenset({"VariableDeclaration"}),
    "any": STMT_KINDS | EXPR_KINDS,
}

ONE, OPT, MANY = "one", "opt", "many"

_STR = (str,)
_BOOL = (bool,)
_SCALAR = (str, int, float, bool, type(None))


@dataclass(frozen=True)
class Slot:
    name: str
    arity: str  # one | opt | many
    group: str


@dataclass(frozen=True)
class Attr:
    name: str
    types: tuple[type, ...]
    default: Any = None
    required: bool = False
    choices: Optional[tuple[Any, ...]] = None


@dataclass(frozen=True)
class KindSchema:
    slots: tuple[Slot, ...] = ()
    attrs: tuple[Attr, ...] = ()

    @property
    def slot_names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.slots)

    @property
    def attr_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.attrs)


def _s(name: str, arity: str, group: str) -> Slot:
    return Slot(name, arity, group)


SCHEMA: dict[str, KindSchema] = {
    # Basic
    "Noop": KindSchema(),
    "Literal": KindSchema(
        attrs=(
            Attr("value", _SCALAR, required=True),
            Attr("litType", _STR, required=True, choices=("number", "string", "boolean", "null")),
        )
    ),
    "Identifier": KindSchema(attrs=(Attr("name", _STR, required=True),)),
    "Sequence": KindSchema(slots=(_s("expressions", MANY, "any"),)),
    # Statement
    "IfStatement": KindSchema(
        slots=(_s("test", ONE, "expr"), _s("consequent", MANY, "stmt"), _s("alternate", MANY, "stmt"))
    ),
    "ReturnStatement": KindSchema(slots=(_s("argument", OPT, "expr"),)),
    "WhileStatement": KindSchema(slots=(_s("test", ONE, "expr"), _s("body", MANY, "stmt"))),
    "RangeStatement": KindSchema(
        slots=(_s("left", ONE, "target"), _s("right", ONE, "expr"), _s("body", MANY, "stmt"))
    ),
    "TryStatement": KindSchema(
        slots=(
            _s("body", MANY, "stmt"),
            _s("param", OPT, "ident"),
            _s("handler", MANY, "stmt"),
            _s("finalizer", MANY, "stmt"),
        )
    ),
    "ExpressionStatement": KindSchema(slots=(_s("expression", ONE, "expr"),)),
    "BreakStatement": KindSchema(),
    "ContinueStatement": KindSchema(),
    "ThrowStatement": KindSchema(slots=(_s("argument", ONE, "expr"),)),
    "ImportStatement": KindSchema(
        attrs=(Attr("moduleName", _STR, required=True), Attr("localName", (str, type(None)), None))
    ),
    # Expression
    "BinaryExpression": KindSchema(
        slots=(_s("left", ONE, "expr"), _s("right", ONE, "expr")),
        attrs=(Attr("operator", _STR, required=True),),
    ),
    "UnaryExpression": KindSchema(
        slots=(_s("argument", ONE, "expr"),), attrs=(Attr("operator", _STR, required=True),)
    ),
    "CallExpression": KindSchema(slots=(_s("callee", ONE, "expr"), _s("arguments", MANY, "expr"))),
    "MemberAccess": KindSchema(slots=(_s("object", ONE, "expr"),), attrs=(Attr("property", _STR, required=True),)),
    "IndexAccess": KindSchema(slots=(_s("object", ONE, "expr"), _s("index", ONE, "expr"))),
    "NewExpression": KindSchema(slots=(_s("callee", ONE, "expr"), _s("arguments", MANY, "expr"))),
    "AssignmentExpression": KindSchema(
        slots=(_s("left", ONE, "target"), _s("right", ONE, "expr")), attrs=(Attr("operator", _STR, "="),)
    ),
    "ConditionalExpression": KindSchema(
        slots=(_s("test", ONE, "expr"), _s("consequent", ONE, "expr"), _s("alternate", ONE, "expr"))
    ),
    "ObjectLiteral": KindSchema(slots=(_s("keys", MANY, "expr"), _s("values", MANY, "expr"))),
    "ArrayLiteral": KindSchema(slots=(_s("elements", MANY, "expr"),), attrs=(Attr("tuple", _BOOL, False),)),
    "AwaitExpression": KindSchema(slots=(_s("argument", ONE, "expr"),)),
    "YieldExpression": KindSchema(slots=(_s("argument", OPT, "expr"),)),
    # Declaration
    "FunctionDefinition": KindSchema(
        slots=(_s("params", MANY, "param"), _s("body", MANY, "stmt")),
        attrs=(
            Attr("name", (str, type(None)), None),
            Attr("async", _BOOL, False),
            Attr("generator", _BOOL, False),
            Attr("isMethod", _BOOL, False),
            Attr("lexicalThis", _BOOL, False),
        ),
    ),
    "VariableDeclaration": KindSchema(
        slots=(_s("id", ONE, "ident"), _s("init", OPT, "expr"), _s("varType", OPT, "type")),
        attrs=(Attr("declKind", _STR, "var", choices=("var", "let", "const", "param")),),
    ),
    "ClassDefinition": KindSchema(
        slots=(_s("supers", MANY, "expr"), _s("body", MANY, "stmt")), attrs=(Attr("name", _STR, required=True),)
    ),
    "PackageDeclaration": KindSchema(slots=(_s("body", MANY, "stmt"),), attrs=(Attr("name", _STR, required=True),)),
    # Type
    "PrimitiveType": KindSchema(attrs=(Attr("name", _STR, required=True),)),
    "ChanType": KindSchema(
        slots=(_s("elementType", OPT, "type"),),
        attrs=(Attr("direction", _STR, "both", choices=("both", "send", "recv")),),
    ),
}

RESERVED_KEYS = frozenset({"kind", "loc", "synthetic", "langTag"})

assert set(SCHEMA) == set(ALL_KINDS)
assert all(not (set(s.slot_names) | set(s.attr_names)) & RESERVED_KEYS for s in SCHEMA.values())


# ---------------------------------------------------------------------------
# Node


@dataclass(frozen=True)
class UastNode:
    """A tagged tree node.  Children live in ``fields`` next to attributes;
    list-valued slots are tuples so a tree is immutable once built."""

    kind: str
    loc: SourceLocation
    fields: Mapping[str, Any] = field(default_factory=dict)
    lang: str = "raw"
    synthetic: bool = False

    __hash__ = None  # type: ignore[assignment]

    def __getattr__(self, name: str) -> Any:
        if name.startswith("__") or name == "fields":
            raise AttributeError(name)
        try:
            return self.fields[name]
        except KeyError:
            raise AttributeError(f"{self.kind} has no field {name!r}") from None

    def __getitem__(self, name: str) -> Any:
        return self.fields[name]

    def get(self, name: str, default: Any = None) -> Any:
        return self.fields.get(name, default)

    def children(self) -> Iterator[tuple[str, "UastNode"]]:
        """Yield ``(slot, child)`` in schema slot order."""
        schema = SCHEMA.get(self.kind)
        names = schema.slot_names if schema else ()
        for slot in names:
            value = self.fields.get(slot)
            if isinstance(value, UastNode):
                yield slot, value
            elif isinstance(value, (list, tuple)):
                for child in value:
                    if isinstance(child, UastNode):
                        yield slot, child

    def replace(self, **changes: Any) -> "UastNode":
        fields = dict(self.fields)
        fields.update({k: tuple(v) if isinstance(v, list) else v for k, v in changes.items()})
        return UastNode(self.kind, self.loc, fields, self.lang, self.synthetic)

    def __repr__(self) -> str:
        schema = SCHEMA.get(self.kind)
        attrs = ", ".join(f"{a}={self.fields.get(a)!r}" for a in (schema.attr_names if schema else ()))
        return f"{self.kind}({attrs})" if attrs else f"{self.kind}()"


def make(
    kind: str,
    loc: SourceLocation,
    lang: str = "raw",
    synthetic: bool = False,
    **fields: Any,
) -> UastNode:
    """Build a node, filling schema defaults; list slots become tuples."""
    schema = SCHEMA.get(kind)
    out: dict[str, Any] = {}
    if schema is not None:
        for slot in schema.slots:
            value = fields.pop(slot.name, () if slot.arity == MANY else None)
            out[slot.name] = tuple(value) if isinstance(value, list) else value
        for attr in schema.attrs:
            out[attr.name] = fields.pop(attr.name, attr.default)
    out.update(fields)
    return UastNode(kind, loc, out, lang, synthetic)


# ---------------------------------------------------------------------------
# Traversal

Visitor = Callable[[UastNode, Optional[str], int], Any]


def walk(tree: UastNode, visitor: Optional[Visitor] = None) -> list[tuple[UastNode, Optional[str], int]]:
    """Pre-order traversal; returns the ``(node, slot, depth)`` visit sequence."""
    visits: list[tuple[UastNode, Optional[str], int]] = []
    stack: list[tuple[UastNode, Optional[str], int]] = [(tree, None, 0)]
    while stack:
        node, slot, depth = stack.pop()
        visits.append((node, slot, depth))
        if visitor is not None:
            visitor(node, slot, depth)
        kids = list(node.children())
        for child_slot, child in reversed(kids):
            stack.append((child, child_slot, depth + 1))
    return visits


def structural_key(node: Union[UastNode, Any]) -> Any:
    """Hashable key of a subtree ignoring locations."""
    if isinstance(node, UastNode):
        return (node.kind,) + tuple(
            (k, structural_key(v)) for k, v in sorted(node.fields.items())
        )
    if isinstance(node, (list, tuple)):
        return tuple(structural_key(v) for v in node)
    if isinstance(node, float):
        return ("f", node)
    return (type(node).__name__, node)
