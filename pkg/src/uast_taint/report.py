"""Human-readable and SARIF renderings of a run report."""

from __future__ import annotations

import json
import os
from importlib import resources
from typing import Optional

from . import __version__
from .analyzer import RunReport
from .taint import Finding

TOOL_NAME = "uast-taint"
SARIF_VERSION = "2.1.0"
SARIF_SCHEMA_URI = "https://json.schemastore.org/sarif-2.1.0.json"


def _excerpt(report: RunReport, file: str, line: int) -> str:
    text = report.sources.get(file)
    if text is None:
        return ""
    lines = text.splitlines()
    return lines[line - 1].strip() if 0 < line <= len(lines) else ""


def emit_text(report: RunReport) -> str:
    out: list[str] = []
    for f in report.findings:
        sink = f.sink_loc
        out.append(f"{f.rule_id} @ {sink.file}:{sink.start_line}:{sink.start_col}")
        out.append(f"  {f.message}")
        for i, step in enumerate(f.trace, 1):
            loc = step.loc
            line = f"  {i}. [{step.kind}] {loc.file}:{loc.start_line}:{loc.start_col} {step.description}"
            excerpt = _excerpt(report, loc.file, loc.start_line)
            if excerpt:
                line += f"  |  {excerpt}"
            out.append(line)
        out.append("")
    if not report.findings:
        out.append("No findings.")
    else:
        out.append(f"{len(report.findings)} finding(s).")
    for err in report.errors:
        out.append(f"error: {err.message}")
    return "\n".join(out) + "\n"


def _uri(path: str, base: Optional[str]) -> str:
    if base is not None:
        root = base if os.path.isdir(base) else os.path.dirname(base)
        rel = os.path.relpath(path, root)
        if not rel.startswith(".."):
            path = rel
    return path.replace(os.sep, "/")


def _physical(loc, base) -> dict:
    return {
        "artifactLocation": {"uri": _uri(loc.file, base)},
        "region": {
            "startLine": loc.start_line,
            "startColumn": loc.start_col,
            "endLine": loc.end_line,
            "endColumn": loc.end_col + 1,
        },
    }


def _result(f: Finding, rule_index: int, base) -> dict:
    flow = [
        {
            "location": {"physicalLocation": _physical(step.loc, base), "message": {"text": f"{step.kind}: {step.description}"}},
            "kinds": [step.kind],
            "executionOrder": i,
        }
        for i, step in enumerate(f.trace, 1)
    ]
    return {
        "ruleId": f.rule_id,
        "ruleIndex": rule_index,
        "level": "error",
        "message": {"text": f.message},
        "locations": [{"physicalLocation": _physical(f.sink_loc, base)}],
        "codeFlows": [{"threadFlows": [{"locations": flow}]}],
    }


def sarif_document(report: RunReport, base: Optional[str] = None) -> dict:
    rule_ids = sorted({f.rule_id for f in report.findings})
    rules = [{"id": rid, "shortDescription": {"text": f"taint flow ({rid})"}} for rid in rule_ids]
    run = {
        "tool": {"driver": {"name": TOOL_NAME, "version": __version__, "rules": rules}},
        "columnKind": "unicodeCodePoints",
        "results": [_result(f, rule_ids.index(f.rule_id), base) for f in report.findings],
    }
    if report.errors:
        run["invocations"] = [
            {
                "executionSuccessful": True,
                "toolExecutionNotifications": [
                    {"level": "warning", "message": {"text": e.message}, "locations": [{"physicalLocation": {"artifactLocation": {"uri": _uri(e.file, base)}}}]}
                    for e in report.errors
                ],
            }
        ]
    return {"$schema": SARIF_SCHEMA_URI, "version": SARIF_VERSION, "runs": [run]}


def emit_sarif(report: RunReport, base: Optional[str] = None) -> str:
    """Canonical SARIF text: sorted keys, fixed indentation, no timings."""
    return json.dumps(sarif_document(report, base), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def sarif_schema() -> dict:
    text = resources.files("uast_taint.data").joinpath("sarif-2.1.0-subset.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def validate_sarif(doc: dict) -> list[str]:
    """Schema violations of ``doc`` (empty when valid)."""
    import jsonschema

    validator = jsonschema.Draft7Validator(sarif_schema(), format_checker=jsonschema.FormatChecker())
    return [f"{'/'.join(map(str, e.absolute_path))}: {e.message}" for e in validator.iter_errors(doc)]


__all__ = ["SARIF_VERSION", "TOOL_NAME", "emit_sarif", "emit_text", "sarif_document", "sarif_schema", "validate_sarif"]
