from .interchange import (
    FORMAT_VERSION,
    InterchangeError,
    MalformedDocument,
    SchemaViolation,
    UnknownKind,
    ValidationFailed,
    deserialize,
    serialize,
)
from .nodes import (
    ALL_KINDS,
    CATEGORIES,
    CATEGORY_OF,
    SCHEMA,
    SPECIFIC_KINDS,
    UNIVERSAL_KINDS,
    SourceLocation,
    UastNode,
    is_universal,
    make,
    structural_key,
    walk,
)
from .validate import ValidationDiagnostic, has_errors, validate

__all__ = [
    "ALL_KINDS",
    "CATEGORIES",
    "CATEGORY_OF",
    "FORMAT_VERSION",
    "InterchangeError",
    "MalformedDocument",
    "SCHEMA",
    "SPECIFIC_KINDS",
    "SchemaViolation",
    "SourceLocation",
    "UNIVERSAL_KINDS",
    "UastNode",
    "UnknownKind",
    "ValidationDiagnostic",
    "ValidationFailed",
    "deserialize",
    "has_errors",
    "is_universal",
    "make",
    "serialize",
    "structural_key",
    "validate",
    "walk",
]
