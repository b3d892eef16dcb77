"""Pieces shared by the two hand-written parsers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Optional

from ..uast.nodes import SourceLocation

RESERVED_PREFIX = "__lc"


class ParseError(SyntaxError):
    """First syntax error in a compilation unit; parsing stops here."""

    def __init__(self, message: str, file: str, line: int, col: int, expected: Iterable[str] = ()):
        self.expected = tuple(sorted(set(expected)))
        self.file, self.line, self.col = file, line, col
        detail = message
        if self.expected:
            detail += f" (expected {', '.join(self.expected)})"
        super().__init__(f"{file}:{line}:{col}: {detail}")
        self.message = message


@dataclass(frozen=True)
class Token:
    type: str  # NAME NUMBER STRING FSTRING TEMPLATE OP NEWLINE INDENT DEDENT EOF
    value: Any
    line: int
    col: int
    end_line: int
    end_col: int

    def describe(self) -> str:
        if self.type in ("NAME", "OP"):
            return repr(self.value)
        if self.type == "EOF":
            return "end of input"
        return self.type


@dataclass
class NativeNode:
    """Pre-lowering parse tree node; ``kind`` names the native construct."""

    kind: str
    loc: SourceLocation
    fields: dict[str, Any] = field(default_factory=dict)

    def __getattr__(self, name: str) -> Any:
        if name.startswith("__") or name == "fields":
            raise AttributeError(name)
        try:
            return self.fields[name]
        except KeyError:
            raise AttributeError(f"{self.kind} has no field {name!r}") from None

    def iter_native(self):
        """Yield every native node in this subtree (pre-order)."""
        yield self
        for value in self.fields.values():
            if isinstance(value, NativeNode):
                yield from value.iter_native()
            elif isinstance(value, (list, tuple)):
                for item in value:
                    if isinstance(item, NativeNode):
                        yield from item.iter_native()
                    elif isinstance(item, tuple):
                        for sub in item:
                            if isinstance(sub, NativeNode):
                                yield from sub.iter_native()

    def __repr__(self) -> str:
        return f"{self.kind}@{self.loc.start_line}:{self.loc.start_col}"


class ParserBase:
    def __init__(self, tokens: list[Token], file: str):
        self.tokens = tokens
        self.pos = 0
        self.file = file
        self._expected: set[str] = set()

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        i = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[i]

    @property
    def prev(self) -> Token:
        return self.tokens[self.pos - 1]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.type != "EOF":
            self.pos += 1
        self._expected.clear()
        return tok

    def at(self, value: str, type_: Optional[str] = None) -> bool:
        tok = self.tok
        if type_ is None:
            hit = tok.type in ("OP", "NAME") and tok.value == value
        else:
            hit = tok.type == type_ and (value is None or tok.value == value)
        if not hit:
            self._expected.add(repr(value) if type_ is None or value is not None else type_)
        return hit

    def at_type(self, type_: str) -> bool:
        if self.tok.type == type_:
            return True
        self._expected.add(type_)
        return False

    def accept(self, value: str) -> Optional[Token]:
        if self.at(value):
            return self.advance()
        return None

    def expect(self, value: str) -> Token:
        if self.at(value):
            return self.advance()
        raise self.error(f"unexpected {self.tok.describe()}")

    def expect_type(self, type_: str) -> Token:
        if self.at_type(type_):
            return self.advance()
        raise self.error(f"unexpected {self.tok.describe()}")

    def error(self, message: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, self.file, tok.line, tok.col, self._expected)

    def loc_from(self, start: Token) -> SourceLocation:
        j = self.pos - 1
        while j > 0 and self.tokens[j].type in ("NEWLINE", "INDENT", "DEDENT"):
            j -= 1
        end = self.tokens[j] if j >= 0 else start
        if (end.end_line, end.end_col) < (start.line, start.col):
            end = start
        return SourceLocation(self.file, start.line, start.col, end.end_line, end.end_col)

    def node(self, kind: str, start: Token, **fields: Any) -> NativeNode:
        return NativeNode(kind, self.loc_from(start), fields)


def check_identifier(name: str, file: str, line: int, col: int) -> None:
    if name.startswith(RESERVED_PREFIX):
        raise ParseError(f"identifier {name!r} uses the reserved prefix {RESERVED_PREFIX!r}", file, line, col)


STRING_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "0": "\0", "\\": "\\", "'": "'", '"': '"', "`": "`", "$": "$"}
