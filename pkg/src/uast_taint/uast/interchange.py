"""Canonical UAST-JSON documents (``.uast.json``).

Canonical form: keys sorted, no whitespace, UTF-8, every slot and
attribute written out (defaults included), integer literals as integers.
"""

from __future__ import annotations

import json
from typing import Any

from .nodes import MANY, SCHEMA, SourceLocation, UastNode, make
from .validate import has_errors, validate

FORMAT_VERSION = "1"


class InterchangeError(ValueError):
    pass


class ValidationFailed(InterchangeError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        msg = "; ".join(str(d) for d in self.diagnostics if d.severity == "error")
        super().__init__(f"tree failed validation: {msg}")


class MalformedDocument(InterchangeError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.line, self.col = line, col
        super().__init__(f"malformed document at {line}:{col}: {msg}")


class UnknownKind(InterchangeError):
    def __init__(self, kind: Any, path: str):
        self.kind = kind
        super().__init__(f"unknown node kind {kind!r} at {path or '<root>'}")


class SchemaViolation(InterchangeError):
    pass


def loc_to_dict(loc: SourceLocation) -> dict[str, Any]:
    return {
        "file": loc.file,
        "startLine": loc.start_line,
        "startCol": loc.start_col,
        "endLine": loc.end_line,
        "endCol": loc.end_col,
    }


def node_to_dict(node: UastNode) -> dict[str, Any]:
    out: dict[str, Any] = {
        "kind": node.kind,
        "loc": loc_to_dict(node.loc),
        "synthetic": node.synthetic,
        "langTag": node.lang,
    }
    schema = SCHEMA[node.kind]
    for slot in schema.slots:
        value = node.fields.get(slot.name)
        if slot.arity == MANY:
            out[slot.name] = [node_to_dict(c) for c in (value or ())]
        else:
            out[slot.name] = None if value is None else node_to_dict(value)
    for attr in schema.attrs:
        out[attr.name] = node.fields.get(attr.name, attr.default)
    return out


def dumps_canonical(obj: Any) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False).encode(
        "utf-8"
    )


def serialize(tree: UastNode) -> bytes:
    diags = validate(tree)
    if has_errors(diags):
        raise ValidationFailed(diags)
    return dumps_canonical({"version": FORMAT_VERSION, "root": node_to_dict(tree)})


def deserialize(doc: bytes | str, file_hint: str | None = None) -> UastNode:
    if isinstance(doc, bytes):
        try:
            text = doc.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedDocument(f"not UTF-8 ({exc.reason})", 0, exc.start) from None
    else:
        text = doc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(data, dict):
        raise SchemaViolation("top level must be an object")
    if data.get("version") != FORMAT_VERSION:
        raise SchemaViolation(f"unsupported version {data.get('version')!r}")
    if "root" not in data:
        raise SchemaViolation("document has no root")
    tree = _build(data["root"], "", file_hint)
    diags = validate(tree)
    if has_errors(diags):
        raise SchemaViolation("; ".join(str(d) for d in diags if d.severity == "error"))
    return tree


def _build_loc(raw: Any, path: str, file_hint: str | None) -> SourceLocation:
    if not isinstance(raw, dict):
        raise SchemaViolation(f"{path or '<root>'}: loc must be an object")
    try:
        ints = [raw[k] for k in ("startLine", "startCol", "endLine", "endCol")]
    except KeyError as exc:
        raise SchemaViolation(f"{path or '<root>'}: loc missing {exc.args[0]}") from None
    if not all(isinstance(v, int) and not isinstance(v, bool) and v >= 1 for v in ints):
        raise SchemaViolation(f"{path or '<root>'}: loc positions must be positive integers")
    file = raw.get("file", file_hint or "<unknown>")
    if not isinstance(file, str):
        raise SchemaViolation(f"{path or '<root>'}: loc.file must be a string")
    try:
        return SourceLocation(file, *ints)
    except ValueError as exc:
        raise SchemaViolation(f"{path or '<root>'}: {exc}") from None


def _build(raw: Any, path: str, file_hint: str | None) -> UastNode:
    where = path or "<root>"
    if not isinstance(raw, dict):
        raise SchemaViolation(f"{where}: node must be an object")
    kind = raw.get("kind")
    if kind not in SCHEMA:
        raise UnknownKind(kind, path)
    schema = SCHEMA[kind]
    loc = _build_loc(raw.get("loc"), path, file_hint)
    synthetic = raw.get("synthetic", False)
    lang = raw.get("langTag", "raw")
    if not isinstance(synthetic, bool):
        raise SchemaViolation(f"{where}: synthetic must be a boolean")
    known = {"kind", "loc", "synthetic", "langTag"} | set(schema.slot_names) | set(schema.attr_names)
    extra = sorted(set(raw) - known)
    if extra:
        raise SchemaViolation(f"{where}: {kind} has no slot {extra[0]!r}")

    fields: dict[str, Any] = {}
    for slot in schema.slots:
        sub = f"{path}.{slot.name}" if path else slot.name
        value = raw.get(slot.name)
        if slot.arity == MANY:
            if value is None:
                value = []
            if not isinstance(value, list):
                raise SchemaViolation(f"{sub}: expected a list")
            fields[slot.name] = [_build(v, f"{sub}[{i}]", file_hint) for i, v in enumerate(value)]
        elif value is not None:
            fields[slot.name] = _build(value, sub, file_hint)
    for attr in schema.attrs:
        if attr.name in raw:
            fields[attr.name] = raw[attr.name]
        elif attr.required:
            raise SchemaViolation(f"{where}: {kind} missing attribute {attr.name!r}")
    return make(kind, loc, lang=lang, synthetic=synthetic, **fields)
