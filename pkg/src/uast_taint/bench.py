"""Micro-benchmark runner: case manifests, exact-match scoring, ablation."""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .analyzer import run
from .engine.config import AnalysisConfig
from .taint import Ruleset

MANIFEST = "case.json"
RULES = "rules.json"
CATEGORIES = ("soundness", "completeness")
POLARITIES = ("positive", "negative")
SENSITIVITY_DIMENSIONS = ("context", "field", "path", "flow")


class BenchError(ValueError):
    pass


@dataclass(frozen=True)
class BenchCase:
    case_id: str
    dir: str
    category: str
    dimension: str
    polarity: str
    requires_handlers: bool
    expected: frozenset  # of (ruleId, sinkLine)
    description: str = ""
    framework: str = "auto"


def _manifest_error(path: str, msg: str) -> BenchError:
    return BenchError(f"{path}: {msg}")


def parse_manifest(path: str) -> BenchCase:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise _manifest_error(path, f"unreadable manifest ({exc})") from exc
    if not isinstance(data, dict):
        raise _manifest_error(path, "manifest must be a JSON object")
    allowed = {"caseId", "category", "dimension", "polarity", "requiresHandlers", "expected", "description", "framework"}
    extra = set(data) - allowed
    if extra:
        raise _manifest_error(path, f"unknown keys {sorted(extra)}")

    def need(key, kind):
        if key not in data or not isinstance(data[key], kind):
            raise _manifest_error(path, f"'{key}' missing or of the wrong type")
        return data[key]

    case_id = need("caseId", str)
    category = need("category", str)
    if category not in CATEGORIES:
        raise _manifest_error(path, f"category must be one of {CATEGORIES}")
    dimension = need("dimension", str)
    polarity = need("polarity", str)
    if polarity not in POLARITIES:
        raise _manifest_error(path, f"polarity must be one of {POLARITIES}")
    requires = data.get("requiresHandlers", False)
    if not isinstance(requires, bool):
        raise _manifest_error(path, "'requiresHandlers' must be a boolean")
    expected = []
    for item in need("expected", list):
        if (
            not isinstance(item, dict)
            or not isinstance(item.get("ruleId"), str)
            or not isinstance(item.get("sinkLine"), int)
            or isinstance(item.get("sinkLine"), bool)
        ):
            raise _manifest_error(path, "each expected entry needs a string ruleId and an integer sinkLine")
        expected.append((item["ruleId"], item["sinkLine"]))
    if polarity == "positive" and not expected:
        raise _manifest_error(path, "positive case with empty expected")
    if polarity == "negative" and expected:
        raise _manifest_error(path, "negative case must expect no findings")
    framework = data.get("framework", "auto")
    return BenchCase(
        case_id,
        os.path.dirname(path),
        category,
        dimension,
        polarity,
        requires,
        frozenset(expected),
        data.get("description", ""),
        framework,
    )


def load_cases(bench_root: str) -> list[BenchCase]:
    """Every case directory (one holding ``case.json``) under ``bench_root``."""
    if not os.path.isdir(bench_root):
        raise BenchError(f"{bench_root}: not a directory")
    cases: dict[str, BenchCase] = {}
    for dirpath, dirnames, filenames in os.walk(bench_root):
        dirnames.sort()
        if MANIFEST not in filenames:
            continue
        case = parse_manifest(os.path.join(dirpath, MANIFEST))
        if case.case_id in cases:
            raise BenchError(f"duplicate caseId {case.case_id!r}: {cases[case.case_id].dir} and {case.dir}")
        cases[case.case_id] = case
    return sorted(cases.values(), key=lambda c: c.case_id)


def check_pairing(cases: list[BenchCase]) -> list[str]:
    """Dimensions that have a positive case but no negative sibling."""
    pos = {(c.category, c.dimension) for c in cases if c.polarity == "positive"}
    neg = {(c.category, c.dimension) for c in cases if c.polarity == "negative"}
    return sorted(f"{cat}/{dim}" for cat, dim in pos - neg)


@dataclass
class CaseResult:
    case: BenchCase
    reported: frozenset
    passed: bool
    elapsed_ms: float
    error: Optional[str] = None


@dataclass
class Scoreboard:
    mode: str
    results: list[CaseResult] = field(default_factory=list)

    @property
    def passed(self) -> int:
        return sum(r.passed for r in self.results)

    @property
    def total(self) -> int:
        return len(self.results)

    @property
    def pass_rate(self) -> float:
        return self.passed / self.total if self.total else 1.0

    def by_dimension(self) -> dict[str, tuple[int, int]]:
        out: dict[str, list[int]] = {}
        for r in self.results:
            key = f"{r.case.category}/{r.case.dimension}"
            cell = out.setdefault(key, [0, 0])
            cell[0] += r.passed
            cell[1] += 1
        return {k: (v[0], v[1]) for k, v in sorted(out.items())}

    def outcome(self, case_id: str) -> bool:
        return next(r.passed for r in self.results if r.case.case_id == case_id)

    def failures(self) -> list[CaseResult]:
        return [r for r in self.results if not r.passed]

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "passed": self.passed,
            "total": self.total,
            "passRate": round(self.pass_rate, 6),
            "byDimension": {k: {"passed": p, "total": t} for k, (p, t) in self.by_dimension().items()},
            "cases": [
                {
                    "caseId": r.case.case_id,
                    "passed": r.passed,
                    "expected": sorted([list(e) for e in r.case.expected]),
                    "reported": sorted([list(e) for e in r.reported]),
                    **({"error": r.error} if r.error else {}),
                }
                for r in self.results
            ],
        }


def _ruleset_for(case: BenchCase, bench_root: Optional[str]) -> Ruleset:
    for folder in (case.dir, bench_root):
        if folder and os.path.isfile(os.path.join(folder, RULES)):
            return Ruleset.load(os.path.join(folder, RULES))
    return Ruleset.default()


def run_case(case: BenchCase, config: AnalysisConfig, bench_root: Optional[str] = None) -> CaseResult:
    start = time.perf_counter()
    report = run(case.dir, config, _ruleset_for(case, bench_root), framework=case.framework)
    reported = frozenset((f.rule_id, f.sink_loc.start_line) for f in report.findings)
    error = "; ".join(e.message for e in report.errors) or None
    passed = reported == case.expected and error is None
    return CaseResult(case, reported, passed, (time.perf_counter() - start) * 1000.0, error)


def run_suite(
    cases: list[BenchCase],
    config: Optional[AnalysisConfig] = None,
    bench_root: Optional[str] = None,
    jobs: int = 1,
) -> Scoreboard:
    """Exact-match scoring of every case; result order follows ``cases``."""
    config = config or AnalysisConfig()
    mode = "full" if config.handlers_enabled else "agnostic-only"
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda c: run_case(c, config, bench_root), cases))
    else:
        results = [run_case(c, config, bench_root) for c in cases]
    return Scoreboard(mode, results)


@dataclass
class Ablation:
    full: Scoreboard
    agnostic: Scoreboard
    delta: list[tuple[str, bool, bool]]  # (caseId, full passed, agnostic passed)
    violations: list[str]

    def to_json(self) -> dict:
        return {
            "full": self.full.to_json(),
            "agnosticOnly": self.agnostic.to_json(),
            "delta": [{"caseId": c, "full": f, "agnosticOnly": a} for c, f, a in self.delta],
            "violations": self.violations,
        }


def ablation(
    cases: list[BenchCase],
    config: Optional[AnalysisConfig] = None,
    bench_root: Optional[str] = None,
    jobs: int = 1,
) -> Ablation:
    """Full vs agnostic-only runs; every changed case must be tagged requiresHandlers."""
    config = config or AnalysisConfig()
    full = run_suite(cases, config.with_overrides(handlers_enabled=True), bench_root, jobs)
    agnostic = run_suite(cases, config.with_overrides(handlers_enabled=False), bench_root, jobs)
    delta = []
    violations = []
    for rf, ra in zip(full.results, agnostic.results):
        if rf.passed != ra.passed:
            delta.append((rf.case.case_id, rf.passed, ra.passed))
            if not rf.case.requires_handlers:
                violations.append(f"{rf.case.case_id}: outcome changed but the case is not tagged requiresHandlers")
            if ra.passed and not rf.passed:
                violations.append(f"{rf.case.case_id}: passes only without handlers")
    if full.passed < agnostic.passed:
        violations.append(f"full mode passes {full.passed} < agnostic-only {agnostic.passed}")
    return Ablation(full, agnostic, delta, violations)


def format_scoreboard(board: Scoreboard) -> str:
    lines = [f"mode: {board.mode}"]
    for dim, (p, t) in board.by_dimension().items():
        lines.append(f"  {dim:<28} {p:>3}/{t:<3}")
    lines.append(f"  {'total':<28} {board.passed:>3}/{board.total:<3} ({board.pass_rate:.1%})")
    for r in board.failures():
        exp = sorted(r.case.expected)
        got = sorted(r.reported)
        lines.append(f"  FAIL {r.case.case_id}: expected {exp}, reported {got}" + (f" [{r.error}]" if r.error else ""))
    return "\n".join(lines) + "\n"


__all__ = [
    "Ablation",
    "BenchCase",
    "BenchError",
    "CaseResult",
    "Scoreboard",
    "ablation",
    "check_pairing",
    "format_scoreboard",
    "load_cases",
    "parse_manifest",
    "run_case",
    "run_suite",
]
