"""Events the interpreter emits at every step that can move a value.

Checkers subscribe by subclassing :class:`Plugin`.  ``handle`` may return a
replacement for ``event.value`` (the taint checker extends traces this way);
``intercept_call`` lets a plugin answer a call before the interpreter models
it (sources, sanitizers, framework routing).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

EVENT_KINDS = (
    "assignment",
    "fieldWrite",
    "fieldRead",
    "callArg",
    "callReturn",
    "prototypeWrite",
    "prototypeRead",
    "promiseOp",
    "channelOp",
    "sinkCall",
)


@dataclass
class TaintEvent:
    kind: str
    loc: Any
    value: Any = None
    detail: str = ""
    operands: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")


@dataclass
class CallSite:
    """Everything known about one call just before it is modeled."""

    node: Any
    names: tuple[str, ...]
    callee: Any
    args: list
    receiver: Any = None
    is_new: bool = False


class Plugin:
    name = "plugin"

    def handle(self, event: TaintEvent, ctx) -> Optional[Any]:
        return None

    def intercept_call(self, site: CallSite, ctx) -> Optional[Any]:
        return None

    def on_import(self, module: str, ctx) -> Optional[Any]:
        return None
