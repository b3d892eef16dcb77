"""Look at the Phi values a branchy program leaves behind.

Run with ``python3 demos/phi_values.py``.
"""

from __future__ import annotations

from uast_taint.engine import AnalysisConfig
from uast_taint.engine.interpreter import Interpreter, Task
from uast_taint.engine.values import PathCondition, iter_leaves, restrict_path
from uast_taint.frontends import compile_source

PROGRAM = """\
x = 0
if ready:
    x = 1
    if verbose:
        x = 2
y = x
while more:
    y = y + 10
"""


def show(name, value):
    print(f"{name}:")
    for path, leaf in iter_leaves(value):
        label = " and ".join(f"{'' if c.polarity else 'not '}{c.key[2]}" for c in path) or "always"
        print(f"  {label:<36} -> {leaf.show()}")


def main() -> None:
    unit = compile_source(PROGRAM, "minipy", "branchy.mpy")
    interp = Interpreter(Task(AnalysisConfig(loop_unroll_bound=2)))
    ctx = interp.run_module(unit)
    show("x", interp.lookup("x", ctx))
    # 'more' is one unknown, so every iteration tests the same condition:
    # the loop either never runs or runs up to the bound of 2
    show("y", interp.lookup("y", ctx))
    ready = PathCondition(("sym", "unknown", "ready", None), False)
    print("x once 'ready' is known false:", restrict_path(interp.lookup("x", ctx), (ready,)).show())
    print("loop body runs:", interp.task.stats["loop_unrollings"])


if __name__ == "__main__":
    main()
