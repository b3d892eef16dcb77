"""Taint checker: an event plugin over the interpreter.

Taint rides on values, so most propagation is just the interpreter moving
values around.  The checker's job at each event is to append a trace step
to tainted values, to answer source and sanitizer calls, and to test sink
arguments.
"""

from __future__ import annotations

import fnmatch
import json
import threading
from dataclasses import dataclass
from importlib import resources
from typing import Any, Optional

from .engine.events import CallSite, Plugin, TaintEvent
from .engine.values import (
    AbstractValue,
    Sym,
    Taint,
    TraceStep,
    feasible_leaves,
    map_leaves,
)
from .uast.nodes import SourceLocation


class RulesError(ValueError):
    pass


def _check_pattern(pattern: Any, where: str) -> str:
    if not isinstance(pattern, str) or not pattern:
        raise RulesError(f"{where}: pattern must be a non-empty string")
    parts = pattern.split(".")
    if any(not p for p in parts):
        raise RulesError(f"{where}: empty segment in {pattern!r}")
    if any("*" in p for p in parts[:-1]):
        raise RulesError(f"{where}: '*' is only allowed in the last segment of {pattern!r}")
    return pattern


def match_pattern(pattern: str, name: str) -> bool:
    """Dotted-name match; ``*`` globs inside the last segment only."""
    want = pattern.split(".")
    got = name.split(".")
    if len(want) != len(got):
        return False
    if want[:-1] != got[:-1]:
        return False
    return fnmatch.fnmatchcase(got[-1], want[-1])


@dataclass(frozen=True)
class SourceRule:
    id: str
    kind: str  # call | param
    pattern: str


@dataclass(frozen=True)
class SinkRule:
    id: str
    pattern: str
    tainted_args: tuple[int, ...] = ()  # empty: every argument


@dataclass(frozen=True)
class SanitizerRule:
    id: str
    pattern: str


@dataclass(frozen=True)
class Ruleset:
    sources: tuple[SourceRule, ...] = ()
    sinks: tuple[SinkRule, ...] = ()
    sanitizers: tuple[SanitizerRule, ...] = ()

    @classmethod
    def from_json(cls, data: Any) -> "Ruleset":
        if not isinstance(data, dict):
            raise RulesError("rules file must hold a JSON object")
        unknown = set(data) - {"sources", "sinks", "sanitizers"}
        if unknown:
            raise RulesError(f"unknown top-level keys: {', '.join(sorted(unknown))}")

        def entries(key):
            items = data.get(key, [])
            if not isinstance(items, list):
                raise RulesError(f"{key} must be a list")
            for i, item in enumerate(items):
                where = f"{key}[{i}]"
                if not isinstance(item, dict):
                    raise RulesError(f"{where} must be an object")
                rid = item.get("id")
                if not isinstance(rid, str) or not rid:
                    raise RulesError(f"{where}: id must be a non-empty string")
                yield where, rid, item

        sources = []
        for where, rid, item in entries("sources"):
            kind = item.get("kind", "call")
            if kind not in ("call", "param"):
                raise RulesError(f"{where}: kind must be 'call' or 'param'")
            sources.append(SourceRule(rid, kind, _check_pattern(item.get("pattern"), where)))
        sinks = []
        for where, rid, item in entries("sinks"):
            args = item.get("taintedArgs", [])
            if not isinstance(args, list) or not all(isinstance(a, int) and not isinstance(a, bool) and a >= 0 for a in args):
                raise RulesError(f"{where}: taintedArgs must be a list of non-negative integers")
            sinks.append(SinkRule(rid, _check_pattern(item.get("pattern"), where), tuple(args)))
        sanitizers = [
            SanitizerRule(rid, _check_pattern(item.get("pattern"), where)) for where, rid, item in entries("sanitizers")
        ]
        return cls(tuple(sources), tuple(sinks), tuple(sanitizers))

    @classmethod
    def load(cls, path: str) -> "Ruleset":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise RulesError(f"cannot read rules {path}: {exc}") from exc
        return cls.from_json(data)

    @classmethod
    def default(cls) -> "Ruleset":
        text = resources.files("uast_taint.data").joinpath("rules.json").read_text(encoding="utf-8")
        return cls.from_json(json.loads(text))

    def call_source(self, names) -> Optional[SourceRule]:
        return _first(self.sources, names, lambda r: r.kind == "call")

    def param_sources(self) -> list[SourceRule]:
        return [r for r in self.sources if r.kind == "param"]

    def sanitizer(self, names) -> Optional[SanitizerRule]:
        return _first(self.sanitizers, names)

    def sinks_for(self, names) -> list[SinkRule]:
        return [r for r in self.sinks if any(match_pattern(r.pattern, n) for n in names)]


def _first(rules, names, pred=lambda r: True):
    for rule in rules:
        if pred(rule) and any(match_pattern(rule.pattern, n) for n in names):
            return rule
    return None


@dataclass(frozen=True)
class Finding:
    rule_id: str
    source_loc: SourceLocation
    sink_loc: SourceLocation
    trace: tuple[TraceStep, ...]
    message: str
    labels: tuple[str, ...] = ()
    entry: str = "<main>"
    severity: str = "error"

    def dedup_key(self) -> tuple:
        return (_loc_tuple(self.source_loc), _loc_tuple(self.sink_loc), self.rule_id)

    def sort_key(self) -> tuple:
        return (self.sink_loc.file, self.sink_loc.start_line, self.rule_id, self.sink_loc.start_col, _loc_tuple(self.source_loc))


def _loc_tuple(loc: SourceLocation) -> tuple:
    return (loc.file, loc.start_line, loc.start_col, loc.end_line, loc.end_col)


class FindingSink:
    """Append-only, thread-safe, deduplicating collection of findings."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._items: dict[tuple, Finding] = {}

    def add(self, finding: Finding) -> bool:
        key = finding.dedup_key()
        with self._lock:
            if key in self._items:
                return False
            self._items[key] = finding
            return True

    def extend(self, findings) -> None:
        for f in findings:
            self.add(f)

    def sorted(self) -> list[Finding]:
        with self._lock:
            return sorted(self._items.values(), key=Finding.sort_key)

    def __len__(self) -> int:
        return len(self._items)


# ---------------------------------------------------------------------------
# Propagation rules.  Each returns the value with a step appended to every
# tainted leaf; untainted leaves pass through untouched.


def _mark(value: Optional[AbstractValue], kind: str, loc, description: str) -> Optional[AbstractValue]:
    if value is None or loc is None:
        return value
    step = TraceStep(kind, loc, description)

    def leaf(v):
        return v.with_taint(v.taint.extend(step)) if v.taint else v

    return map_leaves(value, leaf)


def propagate_assignment(event: TaintEvent):
    """``x = y``: x takes y's value, so y's taint (or its absence) wholesale."""
    return _mark(event.value, "assign", event.loc, f"assigned to {event.detail}")


def propagate_field(event: TaintEvent):
    verb = "written to" if event.kind == "fieldWrite" else "read from"
    return _mark(event.value, "field", event.loc, f"{verb} field {event.detail}")


def propagate_call(event: TaintEvent):
    if event.kind == "callArg":
        return _mark(event.value, "call-arg", event.loc, f"passed as parameter {event.detail}")
    return _mark(event.value, "call-return", event.loc, f"returned from {event.detail}")


def propagate_prototype(event: TaintEvent):
    verb = "written to" if event.kind == "prototypeWrite" else "inherited through"
    return _mark(event.value, "prototype", event.loc, f"{verb} prototype field {event.detail}")


def propagate_promise(event: TaintEvent):
    return _mark(event.value, "promise", event.loc, f"promise {event.detail}")


def propagate_channel(event: TaintEvent):
    return _mark(event.value, "channel", event.loc, f"channel {event.detail}")


_PROPAGATORS = {
    "assignment": propagate_assignment,
    "fieldWrite": propagate_field,
    "fieldRead": propagate_field,
    "callArg": propagate_call,
    "callReturn": propagate_call,
    "prototypeWrite": propagate_prototype,
    "prototypeRead": propagate_prototype,
    "promiseOp": propagate_promise,
    "channelOp": propagate_channel,
}


def apply_sanitizer(value: AbstractValue) -> AbstractValue:
    """The sanitized result: same value, taint reset on every leaf."""
    return map_leaves(value, lambda v: v.with_taint(Taint()))


def check_sink(site: CallSite, rules: list[SinkRule], pi, entry: str = "<main>") -> list[Finding]:
    """Findings for every checked argument that is tainted on a feasible path."""
    out = []
    loc = site.node.loc
    name = site.names[0] if site.names else "<call>"
    for rule in rules:
        positions = rule.tainted_args or tuple(range(len(site.args)))
        for i in positions:
            if i >= len(site.args):
                continue
            seen = set()
            for _, leaf in feasible_leaves(site.args[i], pi):
                taint = leaf.taint
                if not taint:
                    continue
                trace = taint.trace + (TraceStep("sink", loc, f"argument {i} of {name}"),)
                finding = Finding(
                    rule.id,
                    taint.trace[0].loc,
                    loc,
                    trace,
                    f"tainted data from {', '.join(sorted(taint.labels))} reaches {name} (argument {i})",
                    tuple(sorted(taint.labels)),
                    entry,
                )
                if finding.dedup_key() not in seen:
                    seen.add(finding.dedup_key())
                    out.append(finding)
    return out


class TaintChecker(Plugin):
    name = "taint"

    def __init__(self, ruleset: Ruleset, sink: Optional[FindingSink] = None, entry: str = "<main>"):
        self.ruleset = ruleset
        self.findings = sink if sink is not None else FindingSink()
        self.entry = entry

    def handle(self, event: TaintEvent, ctx):
        if event.kind == "sinkCall":
            site = event.operands["site"]
            rules = self.ruleset.sinks_for(site.names)
            if rules:
                self.findings.extend(check_sink(site, rules, ctx.pi, self.entry))
            return None
        fn = _PROPAGATORS.get(event.kind)
        return fn(event) if fn is not None else None

    def intercept_call(self, site: CallSite, ctx):
        source = self.ruleset.call_source(site.names)
        if source is not None:
            name = site.names[0]
            step = TraceStep("source", site.node.loc, f"{name}() [{source.id}]")
            return Sym("source", f"{name}()", ("source", _loc_tuple(site.node.loc)), Taint.source(source.id, step))
        if self.ruleset.sanitizer(site.names) is not None:
            if not site.args:
                return Sym("sanitized", f"{site.names[0]}()", ("sanitized", _loc_tuple(site.node.loc)))
            return apply_sanitizer(site.args[0])
        return None


__all__ = [
    "Finding",
    "FindingSink",
    "Ruleset",
    "RulesError",
    "SanitizerRule",
    "SinkRule",
    "SourceRule",
    "TaintChecker",
    "apply_sanitizer",
    "check_sink",
    "match_pattern",
    "propagate_assignment",
    "propagate_call",
    "propagate_channel",
    "propagate_field",
    "propagate_promise",
    "propagate_prototype",
]
