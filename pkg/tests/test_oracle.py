"""Phi leaves against brute-force enumeration of the unknown conditions."""

from __future__ import annotations

import pytest

from progen import VARS, enumerate_paths, generate
from support import cond, interpret, leaf_values
from uast_taint.engine.values import Prim, restrict_path

SEEDS = range(200)


def _final_values(program):
    interp, ctx, _ = interpret(program.text)
    out = {v: interp.lookup(v, ctx) for v in VARS}
    box = interp.lookup("box", ctx)
    out["box.f"] = interp.read_field(box, "f", ctx)
    return out


def _check(seed):
    program = generate(seed)
    finals = _final_values(program)
    runs = enumerate_paths(program)
    for name, value in finals.items():
        assert leaf_values(value) == {seen[name] for _, seen in runs}, (seed, name)
        for assignment, seen in runs:
            pi = tuple(cond(c, b) for c, b in assignment.items())
            leaf = restrict_path(value, pi)
            assert isinstance(leaf, Prim) and (leaf.type, leaf.value) == seen[name], (seed, name, assignment)


@pytest.mark.parametrize("block", range(10))
def test_oracle_equivalence(block):
    for seed in SEEDS[block::10]:
        _check(seed)


def test_generator_exercises_unknown_branches():
    programs = [generate(s) for s in SEEDS]
    assert all(len(p.conds) <= 3 for p in programs)
    assert sum(bool(p.conds) for p in programs) >= 100
    assert all("while" not in p.text and "for " not in p.text for p in programs)
