"""Source frontends: MiniPy and MiniJS parsers plus the shared lowering pass."""

from __future__ import annotations

import os

from ..uast.nodes import UastNode
from . import minijs, minipy
from .base import RESERVED_PREFIX, NativeNode, ParseError
from .lower import DESUGAR, DIRECT, RULES, STRUCTURAL, LoweringRule, UnsupportedConstruct, lower

LANGUAGES = ("minipy", "minijs")
EXTENSIONS = {".mpy": "minipy", ".mjs.txt": "minijs"}


def detect_language(path: str) -> str | None:
    """Language implied by a file name, or ``None`` for files we skip."""
    name = os.path.basename(path)
    for ext, lang in EXTENSIONS.items():
        if name.endswith(ext):
            return lang
    return None


def module_name(path: str) -> str:
    name = os.path.basename(path)
    for ext in EXTENSIONS:
        if name.endswith(ext):
            return name[: -len(ext)]
    return name


def parse(source: str, lang: str, file: str = "<input>", module: str | None = None) -> NativeNode:
    if lang == "minipy":
        return minipy.parse(source, file, module or "__main__")
    if lang == "minijs":
        return minijs.parse(source, file, module or "main")
    raise ValueError(f"unknown language {lang!r}")


def compile_source(source: str, lang: str, file: str = "<input>", module: str | None = None) -> UastNode:
    """Parse and lower one compilation unit."""
    return lower(parse(source, lang, file, module), lang)


__all__ = [
    "DESUGAR",
    "DIRECT",
    "EXTENSIONS",
    "LANGUAGES",
    "LoweringRule",
    "NativeNode",
    "ParseError",
    "RESERVED_PREFIX",
    "RULES",
    "STRUCTURAL",
    "UnsupportedConstruct",
    "compile_source",
    "detect_language",
    "lower",
    "module_name",
    "parse",
]
