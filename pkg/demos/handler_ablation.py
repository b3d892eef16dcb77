"""Score the shipped corpus with and without the language-specific handlers.

Run with ``python3 demos/handler_ablation.py``.
"""

from __future__ import annotations

import os

from uast_taint.bench import ablation, format_scoreboard, load_cases

CORPUS = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "bench", "corpus")


def main() -> None:
    cases = load_cases(CORPUS)
    result = ablation(cases, bench_root=CORPUS)
    print(format_scoreboard(result.full))
    print(format_scoreboard(result.agnostic))
    # Only inheritance and prototype programs depend on the handlers; every
    # other case keeps its outcome when they are switched off.
    for case_id, full, agnostic in result.delta:
        print(f"{case_id}: full={'pass' if full else 'fail'}, agnostic-only={'pass' if agnostic else 'fail'}")
    print("violations:", result.violations or "none")


if __name__ == "__main__":
    main()
