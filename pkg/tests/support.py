"""Shared helpers for the test modules."""

from __future__ import annotations

import os
import textwrap
from typing import Optional

from uast_taint.analyzer import analyze_unit
from uast_taint.engine import AnalysisConfig
from uast_taint.engine.interpreter import Interpreter, Task
from uast_taint.engine.values import Phi, Prim, PathCondition, feasible_leaves, restrict_path
from uast_taint.frontends import compile_source
from uast_taint.taint import Ruleset, TaintChecker

PKG_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CORPUS = os.path.join(PKG_ROOT, "bench", "corpus")
FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")

RULES = Ruleset.from_json(
    {
        "sources": [
            {"id": "user-input", "kind": "call", "pattern": "source"},
            {"id": "user-input", "kind": "call", "pattern": "taint"},
        ],
        "sinks": [
            {"id": "generic-sink", "pattern": "sink", "taintedArgs": []},
            {"id": "code-injection", "pattern": "exec", "taintedArgs": [0]},
            {"id": "command-injection", "pattern": "os.system", "taintedArgs": [0]},
        ],
        "sanitizers": [{"id": "sanitize", "pattern": "sanitize"}],
    }
)


def dedent(src: str) -> str:
    return textwrap.dedent(src).lstrip("\n")


def compile_py(src: str, file: str = "t.mpy"):
    return compile_source(dedent(src), "minipy", file)


def compile_js(src: str, file: str = "t.mjs.txt"):
    return compile_source(dedent(src), "minijs", file)


def interpret(src: str, lang: str = "minipy", config: Optional[AnalysisConfig] = None, rules: Ruleset = RULES):
    """Run a program's top level; returns ``(interp, ctx, checker)``."""
    unit = compile_py(src) if lang == "minipy" else compile_js(src)
    checker = TaintChecker(rules)
    task = Task(config or AnalysisConfig(), [checker])
    interp = Interpreter(task)
    ctx = interp.run_module(unit)
    return interp, ctx, checker


def var(interp, ctx, name: str):
    value = interp.lookup(name, ctx)
    assert value is not None, f"{name} is unbound"
    return restrict_path(value, ctx.pi)


def leaf_values(value, pi=()) -> set:
    """Concrete ``(type, value)`` pairs at the feasible leaves of ``value``."""
    out = set()
    for _, leaf in feasible_leaves(value, pi):
        assert isinstance(leaf, Prim), f"non-primitive leaf {leaf!r}"
        out.add((leaf.type, leaf.value))
    return out


def tainted(value, pi=()) -> bool:
    return any(leaf.taint for _, leaf in feasible_leaves(value, pi))


def findings(src: str, lang: str = "minipy", rules: Ruleset = RULES, config: Optional[AnalysisConfig] = None,
             framework: str = "auto", file: Optional[str] = None):
    file = file or ("t.mpy" if lang == "minipy" else "t.mjs.txt")
    unit = compile_source(dedent(src), lang, file)
    return analyze_unit(unit, rules, config or AnalysisConfig(), framework).findings.sorted()


def sink_lines(found) -> list[int]:
    return [f.sink_loc.start_line for f in found]


DESUGAR_PAIRS = ("listcomp", "lambda", "fstring")


def finding_set(found) -> set:
    """Findings keyed by start positions only, for comparing two programs
    whose sink calls are spelled differently."""

    def loc(l):
        return (l.start_line, l.start_col)

    return {(f.rule_id, loc(f.source_loc), loc(f.sink_loc), f.labels, f.message) for f in found}


def desugar_pair(name: str) -> tuple[set, set]:
    """Finding sets of the sugared and the hand-expanded fixture program."""
    out = []
    for variant in ("sugar", "manual"):
        with open(os.path.join(FIXTURES, "desugar", f"{name}_{variant}.mpy"), encoding="utf-8") as fh:
            out.append(finding_set(findings(fh.read(), file=f"{name}.mpy")))
    return out[0], out[1]


def cond(name: str, polarity: bool) -> PathCondition:
    """The path condition an unresolved global ``name`` tests as."""
    return PathCondition(("sym", "unknown", name, None), polarity)


__all__ = [
    "CORPUS",
    "FIXTURES",
    "PKG_ROOT",
    "Phi",
    "RULES",
    "compile_js",
    "compile_py",
    "DESUGAR_PAIRS",
    "cond",
    "desugar_pair",
    "finding_set",
    "dedent",
    "findings",
    "interpret",
    "leaf_values",
    "sink_lines",
    "tainted",
    "var",
]
