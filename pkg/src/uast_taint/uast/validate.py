from __future__ import annotations

from dataclasses import dataclass

from .nodes import GROUPS, LANG_TAGS, MANY, ONE, OPT, SCHEMA, SourceLocation, UastNode


@dataclass(frozen=True)
class ValidationDiagnostic:
    severity: str  # "error" | "warning"
    node_path: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: {self.node_path or '<root>'}: {self.message}"


def validate(tree: UastNode) -> list[ValidationDiagnostic]:
    """Check every node against the kind/slot table, in pre-order."""
    out: list[ValidationDiagnostic] = []
    seen: set[int] = set()
    _check(tree, "", out, seen)
    return out


def has_errors(diags: list[ValidationDiagnostic]) -> bool:
    return any(d.severity == "error" for d in diags)


def _err(out: list[ValidationDiagnostic], path: str, msg: str) -> None:
    out.append(ValidationDiagnostic("error", path, msg))


def _check(node: UastNode, path: str, out: list[ValidationDiagnostic], seen: set[int]) -> None:
    if not isinstance(node, UastNode):
        _err(out, path, f"expected a node, got {type(node).__name__}")
        return
    if id(node) in seen:
        _err(out, path, "node appears more than once in the tree")
        return
    seen.add(id(node))

    schema = SCHEMA.get(node.kind)
    if schema is None:
        _err(out, path, f"unknown kind {node.kind!r}")
        return
    if not isinstance(node.loc, SourceLocation):
        _err(out, path, "missing source location")
    if node.lang not in LANG_TAGS:
        _err(out, path, f"unknown langTag {node.lang!r}")

    allowed = set(schema.slot_names) | set(schema.attr_names)
    for key in sorted(node.fields):
        if key not in allowed:
            _err(out, path, f"{node.kind} has no slot {key!r}")

    for attr in schema.attrs:
        if attr.name not in node.fields:
            if attr.required:
                _err(out, path, f"{node.kind} missing attribute {attr.name!r}")
            continue
        value = node.fields[attr.name]
        # bool is an int subclass; keep the two apart
        ok = isinstance(value, attr.types) and not (
            isinstance(value, bool) and bool not in attr.types and int in attr.types
        )
        if not ok:
            _err(out, path, f"attribute {attr.name!r} has type {type(value).__name__}")
        elif attr.choices is not None and value not in attr.choices:
            _err(out, path, f"attribute {attr.name!r} must be one of {list(attr.choices)}")

    if node.kind == "ObjectLiteral" and len(node.fields.get("keys") or ()) != len(node.fields.get("values") or ()):
        _err(out, path, "ObjectLiteral keys and values differ in length")
    if node.kind == "Sequence" and not node.fields.get("expressions"):
        _err(out, path, "Sequence must hold at least one element")

    for slot in schema.slots:
        sub = f"{path}.{slot.name}" if path else slot.name
        present = slot.name in node.fields
        value = node.fields.get(slot.name)
        group = GROUPS[slot.group]
        if slot.arity == ONE:
            if not present or value is None:
                _err(out, sub, f"{node.kind} missing required slot {slot.name!r}")
                continue
            _check_child(value, sub, group, slot.group, out, seen)
        elif slot.arity == OPT:
            if value is not None:
                _check_child(value, sub, group, slot.group, out, seen)
        elif slot.arity == MANY:
            if not present or not isinstance(value, (list, tuple)):
                _err(out, sub, f"{node.kind} slot {slot.name!r} must be a list")
                continue
            for i, child in enumerate(value):
                _check_child(child, f"{sub}[{i}]", group, slot.group, out, seen)


def _check_child(child, path, group, group_name, out, seen) -> None:
    if not isinstance(child, UastNode):
        _err(out, path, f"expected a node, got {type(child).__name__}")
        return
    if child.kind in SCHEMA and child.kind not in group:
        _err(out, path, f"{child.kind} not allowed in a {group_name} slot")
    _check(child, path, out, seen)
