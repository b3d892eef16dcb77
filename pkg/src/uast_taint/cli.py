"""``uast-taint`` command line."""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from typing import Optional, Sequence

from .analyzer import LANG_CHOICES, UsageError, discover_files, load_unit, run
from .bench import BenchError, ablation, format_scoreboard, load_cases, run_suite
from .engine.config import ConfigError, load_config
from .frameworks import FRAMEWORKS
from .report import emit_sarif, emit_text
from .taint import Ruleset, RulesError
from .uast import serialize

EXIT_CLEAN, EXIT_FINDINGS, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # route through main() so every usage error exits the same way
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="uast-taint", description="Multi-language taint analysis over a unified AST.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    an = sub.add_parser("analyze", help="analyze a file or directory tree")
    an.add_argument("root")
    an.add_argument("--rules", help="rules.json (default: built-in rules)")
    an.add_argument("--format", choices=("text", "sarif"), default="text")
    an.add_argument("--lang", choices=LANG_CHOICES, help="only analyze files of this language")
    an.add_argument("--framework", choices=FRAMEWORKS + ("auto", "none"), default="auto")
    an.add_argument("--max-call-depth", type=_positive)
    an.add_argument("--loop-bound", type=_positive)
    an.add_argument("--path-merge-cap", type=_positive)
    an.add_argument("--no-lang-handlers", action="store_true")
    an.add_argument("--jobs", type=_positive)
    an.add_argument("--emit-uast", action="store_true", help="print each file's lowered UAST document instead of analyzing")
    an.add_argument("-o", "--output", help="write the report here instead of stdout")

    be = sub.add_parser("bench", help="run a benchmark corpus")
    be.add_argument("bench_root")
    be.add_argument("--ablation", action="store_true")
    be.add_argument("--json-out")
    be.add_argument("--max-call-depth", type=_positive)
    be.add_argument("--loop-bound", type=_positive)
    be.add_argument("--path-merge-cap", type=_positive)
    be.add_argument("--no-lang-handlers", action="store_true")
    be.add_argument("--jobs", type=_positive, default=1)
    return parser


def _config(args, root: Optional[str]):
    base = load_config(root)
    return base.with_overrides(
        max_call_depth=args.max_call_depth,
        loop_unroll_bound=args.loop_bound,
        path_merge_cap=args.path_merge_cap,
        handlers_enabled=False if args.no_lang_handlers else None,
    )


def _write(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_analyze(args) -> int:
    if args.emit_uast:
        out = []
        for path in discover_files(args.root, args.lang):
            with open(path, encoding="utf-8") as fh:
                unit = load_unit(path, fh.read())
            out.append(serialize(unit).decode("utf-8"))
        _write("\n".join(out) + ("\n" if out else ""), args.output)
        return EXIT_CLEAN
    config = _config(args, args.root)
    ruleset = Ruleset.load(args.rules) if args.rules else Ruleset.default()
    report = run(args.root, config, ruleset, args.framework, args.lang, args.jobs)
    text = emit_sarif(report, args.root) if args.format == "sarif" else emit_text(report)
    _write(text, args.output)
    for err in report.errors:
        print(f"uast-taint: skipped {err.file}: {err.message}", file=sys.stderr)
    return EXIT_FINDINGS if report.findings else EXIT_CLEAN


def cmd_bench(args) -> int:
    config = _config(args, None)
    cases = load_cases(args.bench_root)
    if args.ablation:
        result = ablation(cases, config, args.bench_root, args.jobs)
        sys.stdout.write(format_scoreboard(result.full))
        sys.stdout.write(format_scoreboard(result.agnostic))
        print(f"delta: {len(result.delta)} case(s) changed")
        for case_id, full, agn in result.delta:
            print(f"  {case_id}: full={'pass' if full else 'fail'} agnostic-only={'pass' if agn else 'fail'}")
        for v in result.violations:
            print(f"violation: {v}")
        payload = result.to_json()
        ok = not result.violations and result.full.passed == result.full.total
    else:
        board = run_suite(cases, config, args.bench_root, args.jobs)
        sys.stdout.write(format_scoreboard(board))
        payload = board.to_json()
        ok = board.passed == board.total
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return EXIT_CLEAN if ok else EXIT_FINDINGS


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "analyze":
            return cmd_analyze(args)
        return cmd_bench(args)
    except (UsageError, ConfigError, RulesError, BenchError) as exc:
        print(f"uast-taint: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception:  # an engine bug, not a user error
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
