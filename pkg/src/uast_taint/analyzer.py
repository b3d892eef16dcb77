"""Parse, lower, analyze: the whole pipeline over a directory tree."""

from __future__ import annotations

import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .engine.config import AnalysisConfig
from .engine.interpreter import Interpreter, Task
from .engine.state import DeclInfo
from .engine.values import Obj
from .frameworks import FRAMEWORKS, EntryPoint, FrameworkModel, detect_framework, param_rule_entrypoints, param_source
from .frontends import ParseError, UnsupportedConstruct, compile_source, detect_language, module_name
from .taint import Finding, FindingSink, Ruleset, TaintChecker
from .uast import InterchangeError, UastNode, deserialize, walk

RAW_SUFFIX = ".uast.json"
LANG_CHOICES = ("minipy", "minijs", "raw")


class UsageError(ValueError):
    """Bad input from the command line (exit code 2)."""


def file_language(path: str) -> Optional[str]:
    if path.endswith(RAW_SUFFIX):
        return "raw"
    return detect_language(path)


def discover_files(root: str, lang: Optional[str] = None) -> list[str]:
    if os.path.isfile(root):
        found = [root] if file_language(root) else []
    else:
        found = []
        for dirpath, dirnames, filenames in os.walk(root):
            dirnames.sort()
            for name in sorted(filenames):
                path = os.path.join(dirpath, name)
                if file_language(path):
                    found.append(path)
    if lang is not None:
        found = [p for p in found if file_language(p) == lang]
    return sorted(found)


def count_loc(text: str) -> int:
    return sum(1 for line in text.splitlines() if line.strip())


def load_unit(path: str, text: str) -> UastNode:
    lang = file_language(path)
    if lang == "raw":
        return deserialize(text, file_hint=path)
    return compile_source(text, lang, path, module_name(path))


@dataclass
class FileError:
    file: str
    message: str


@dataclass
class RunReport:
    findings: list[Finding] = field(default_factory=list)
    file_count: int = 0
    loc_count: int = 0
    elapsed_ms: float = 0.0
    config: dict = field(default_factory=dict)
    errors: list[FileError] = field(default_factory=list)
    entry_points: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    sources: dict = field(default_factory=dict)  # file -> text, for excerpts

    @property
    def exit_code(self) -> int:
        return 1 if self.findings else 0


def _merge_stats(total: dict, stats: dict) -> None:
    for key, value in stats.items():
        if isinstance(value, int):
            total[key] = total.get(key, 0) + value


class UnitAnalysis:
    """Every analysis run for one compilation unit: the top level, then each entry point."""

    def __init__(self, unit: UastNode, ruleset: Ruleset, config: AnalysisConfig, framework: Optional[str]):
        self.unit = unit
        self.ruleset = ruleset
        self.config = config
        self.framework = framework
        self.findings = FindingSink()
        self.stats: dict = {}
        self.warnings: list[str] = []
        self.entries: list[EntryPoint] = []
        self._lock = threading.Lock()

    def _task(self, entry: str) -> tuple[Task, Optional[FrameworkModel]]:
        model = FrameworkModel(self.framework) if self.framework else None
        plugins = ([model] if model else []) + [TaintChecker(self.ruleset, FindingSink(), entry)]
        return Task(self.config, plugins), model

    def _finish(self, task: Task) -> None:
        checker = task.plugins[-1]
        self.findings.extend(checker.findings.sorted())
        with self._lock:
            _merge_stats(self.stats, task.stats)
            self.warnings.extend(f"{w.loc}: {w.message}" for w in task.warnings)

    def _top_level(self, task: Task, model: Optional[FrameworkModel]):
        interp = Interpreter(task)
        ctx = interp.new_context(self.unit.lang)
        if model is not None and model.framework == "miniflask":
            interp.declare("request", model.flask_request(ctx), ctx, DeclInfo("import", None))
        return interp, interp.run_module(self.unit, ctx)

    def run_main(self) -> list[EntryPoint]:
        task, model = self._task("<main>")
        self._top_level(task, model)
        self._finish(task)
        entries: list[EntryPoint] = []
        if model is not None:
            entries.extend(EntryPoint(fnode, model.framework, route) for _, route, fnode in model.captured)
        entries.extend(param_rule_entrypoints(self.unit, self.ruleset))
        for i, e in enumerate(entries):
            e.index = i
        return entries

    def run_entry(self, entry: EntryPoint) -> list[Finding]:
        task, model = self._task(entry.label)
        interp, ctx = self._top_level(task, model)
        fn = self._function_value(entry, model, ctx, interp)
        fnode = entry.function
        if model is not None and entry.framework == model.framework:
            args, seeded = model.seed_args(fnode, ctx)
        else:
            args = [param_source(p, entry.framework) for p in fnode.params]
            seeded = [(i, entry.framework) for i in range(len(args))]
        entry.seeded_params = seeded
        interp.call_function(fn, args, None, ctx, fnode)
        self._finish(task)
        return task.plugins[-1].findings.sorted()

    def _function_value(self, entry: EntryPoint, model, ctx, interp) -> Obj:
        if model is not None:
            same = [fn for fn, _, node in model.captured if node is entry.function]
            if same:
                return same[0]
        for addr, data in sorted(ctx.store.heap.items()):
            if data.kind == "function" and data.func is entry.function:
                return Obj(addr)
        return interp.make_function(entry.function, ctx)


def analyze_unit(
    unit: UastNode,
    ruleset: Ruleset,
    config: AnalysisConfig,
    framework: str = "auto",
    jobs: Optional[int] = None,
) -> UnitAnalysis:
    if framework == "auto":
        chosen = detect_framework(unit)
    elif framework in FRAMEWORKS:
        chosen = framework
    elif framework in ("none", None):
        chosen = None
    else:
        raise UsageError(f"unknown framework {framework!r}")
    analysis = UnitAnalysis(unit, ruleset, config, chosen)
    entries = analysis.run_main()
    if entries:
        workers = max(1, min(jobs or len(entries), len(entries)))
        if workers == 1:
            for e in entries:
                analysis.run_entry(e)
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                list(pool.map(analysis.run_entry, entries))
    analysis.entries = entries
    return analysis


def run(
    root: str,
    config: Optional[AnalysisConfig] = None,
    ruleset: Optional[Ruleset] = None,
    framework: str = "auto",
    lang: Optional[str] = None,
    jobs: Optional[int] = None,
) -> RunReport:
    """Analyze every supported file under ``root``."""
    if not os.path.exists(root):
        raise UsageError(f"no such file or directory: {root}")
    if lang is not None and lang not in LANG_CHOICES:
        raise UsageError(f"unknown language {lang!r}")
    if jobs is not None and jobs < 1:
        raise UsageError("--jobs must be at least 1")
    config = config or AnalysisConfig()
    ruleset = ruleset if ruleset is not None else Ruleset.default()
    start = time.perf_counter()
    report = RunReport(config=config.to_json())
    sink = FindingSink()
    for path in discover_files(root, lang):
        report.file_count += 1
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except (OSError, UnicodeDecodeError) as exc:
            report.errors.append(FileError(path, f"cannot read: {exc}"))
            continue
        if file_language(path) != "raw":
            # a raw document's locations point into some other source file
            report.sources[path] = text
            report.loc_count += count_loc(text)
        try:
            unit = load_unit(path, text)
        except (ParseError, UnsupportedConstruct, InterchangeError) as exc:
            report.errors.append(FileError(path, str(exc)))
            continue
        if file_language(path) == "raw":
            report.loc_count += len({n.loc.start_line for n, _, _ in walk(unit)})
        analysis = analyze_unit(unit, ruleset, config, framework, jobs)
        sink.extend(analysis.findings.sorted())
        report.entry_points.extend(e.label for e in analysis.entries)
        report.warnings.extend(analysis.warnings)
        _merge_stats(report.stats, analysis.stats)
    report.findings = sink.sorted()
    report.elapsed_ms = (time.perf_counter() - start) * 1000.0
    return report


__all__ = ["FileError", "RunReport", "UnitAnalysis", "UsageError", "analyze_unit", "count_loc", "discover_files", "file_language", "load_unit", "run"]
