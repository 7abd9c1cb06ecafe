"""Benchmark and adversarial instance generators.

Families:

* ``add``: binary-representation gadgets. Each ``y_i`` is 0 or ``2**i`` and
  ``x`` is strictly between the sum and the sum plus one; decomposable since
  subset sums of distinct powers of two are unique.
* ``grid2d``: ``k`` lines aligned with the y axis punched by ``n`` random
  non-aligned lines; true on the aligned lines except at the punch points.
  Decomposable, and every orientation entailing the formula fixes ``x``.
* ``grid3d``: ``k`` aligned planes, each with a single point removed where
  two random planes cross it; decomposable, but orientations entailing the
  formula are complex for any binary split, exercising the full engine.
* ``prop_unsat``: reduction from propositional unsatisfiability. Variables
  become ``y_i != 0`` and ``z1 = z2`` is conjoined; the result is monadically
  decomposable iff the propositional input is unsatisfiable.
* ``prop_dnf``: reduction from DNF validity. Variables become ``y_i >= x``;
  for satisfiable inputs the result is monadically decomposable iff the
  propositional input is valid.

Generation is deterministic per (family, params, seed).
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import product
from typing import Sequence

from .formula import (
    EQ,
    GT,
    LT,
    Formula,
    Partition,
    atom,
    atom_ge,
    atom_ne,
    conj,
    disj,
)
from .sexpr import emit_problem

# -- propositional mini-terms -----------------------------------------------
# A propositional formula is nested tuples: ("var", i), ("not", p),
# ("and", (p, ...)), ("or", (p, ...)).

Prop = tuple


def prop_vars(prop: Prop) -> set[int]:
    tag = prop[0]
    if tag == "var":
        return {prop[1]}
    if tag == "not":
        return prop_vars(prop[1])
    out: set[int] = set()
    for sub in prop[1]:
        out |= prop_vars(sub)
    return out


def prop_eval(prop: Prop, assignment: dict[int, bool]) -> bool:
    tag = prop[0]
    if tag == "var":
        return assignment[prop[1]]
    if tag == "not":
        return not prop_eval(prop[1], assignment)
    if tag == "and":
        return all(prop_eval(s, assignment) for s in prop[1])
    return any(prop_eval(s, assignment) for s in prop[1])


def prop_satisfiable(prop: Prop) -> bool:
    names = sorted(prop_vars(prop))
    for bits in product((False, True), repeat=len(names)):
        if prop_eval(prop, dict(zip(names, bits))):
            return True
    return False


def prop_valid(prop: Prop) -> bool:
    names = sorted(prop_vars(prop))
    return all(
        prop_eval(prop, dict(zip(names, bits)))
        for bits in product((False, True), repeat=len(names))
    )


def random_prop(nvars: int, size: int, rng: random.Random) -> Prop:
    if size <= 1:
        leaf: Prop = ("var", rng.randrange(nvars))
        return leaf if rng.random() < 0.5 else ("not", leaf)
    kind = rng.choice(("and", "or", "not"))
    if kind == "not":
        return ("not", random_prop(nvars, size - 1, rng))
    left = rng.randrange(1, size)
    return (kind, (random_prop(nvars, left, rng), random_prop(nvars, size - left, rng)))


def random_dnf(nvars: int, terms: int, width: int, rng: random.Random) -> Prop:
    out = []
    for _ in range(terms):
        lits = []
        for _ in range(rng.randrange(1, width + 1)):
            v: Prop = ("var", rng.randrange(nvars))
            lits.append(v if rng.random() < 0.5 else ("not", v))
        out.append(("and", tuple(lits)))
    return ("or", tuple(out))


# -- LRA constructions ------------------------------------------------------


def add_instance(n: int) -> tuple[Formula, Partition]:
    if n < 1:
        raise ValueError("add family needs n >= 1")
    ys = [f"y{i}" for i in range(1, n + 1)]
    choices = [
        disj([atom({y: 1}, EQ, 0), atom({y: 1}, EQ, 2**i)])
        for i, y in enumerate(ys, start=1)
    ]
    sum_coeffs = {y: 1 for y in ys}
    below = atom({**sum_coeffs, "x": -1}, LT, 0)  # sum(y) < x
    above = atom({"x": 1, **{y: -1 for y in ys}}, LT, 1)  # x < sum(y) + 1
    phi = conj(choices + [below, above])
    return phi, Partition.singletons(["x"] + ys)


def grid2d_instance(n: int, k: int, seed: int) -> tuple[Formula, Partition]:
    if n < 0 or k < 1:
        raise ValueError("grid2d family needs n >= 0 and k >= 1")
    rng = random.Random(seed)
    aligned = disj([atom({"x": 1}, EQ, i) for i in range(1, k + 1)])
    punches = []
    for _ in range(n):
        a, b = _nonzero(rng), _nonzero(rng)
        c = rng.randint(-9, 9)
        punches.append(atom_ne({"x": a, "y": b}, c))
    phi = conj([aligned] + punches)
    return phi, Partition.of([["x"], ["y"]])


def grid3d_instance(k: int, seed: int) -> tuple[Formula, Partition]:
    if k < 1:
        raise ValueError("grid3d family needs k >= 1")
    rng = random.Random(seed)
    sheets = []
    for i in range(1, k + 1):
        # Two random planes whose traces on the sheet x = i are two
        # non-parallel lines, so exactly one point gets removed.
        while True:
            a1, b1, d1 = _nonzero(rng), _nonzero(rng), _nonzero(rng)
            a2, b2, d2 = _nonzero(rng), _nonzero(rng), _nonzero(rng)
            if b1 * d2 - b2 * d1 != 0:
                break
        e1 = rng.randint(-9, 9)
        e2 = rng.randint(-9, 9)
        sheets.append(
            conj(
                [
                    atom({"x": 1}, EQ, i),
                    disj(
                        [
                            atom_ne({"x": a1, "y": b1, "z": d1}, e1),
                            atom_ne({"x": a2, "y": b2, "z": d2}, e2),
                        ]
                    ),
                ]
            )
        )
    phi = disj(sheets)
    return phi, Partition.singletons(["x", "y", "z"])


def _nonzero(rng: random.Random) -> int:
    while True:
        v = rng.randint(-9, 9)
        if v != 0:
            return v


def prop_unsat_instance(prop: Prop) -> tuple[Formula, Partition]:
    """Monadically decomposable iff ``prop`` is unsatisfiable."""
    names = sorted(prop_vars(prop))
    variables = [f"y{i}" for i in names] + ["z1", "z2"]

    def tr(p: Prop) -> Formula:
        tag = p[0]
        if tag == "var":
            return atom_ne({f"y{p[1]}": 1}, 0)
        if tag == "not":
            from .formula import negate

            return negate(tr(p[1]))
        parts = [tr(s) for s in p[1]]
        return conj(parts) if tag == "and" else disj(parts)

    phi = conj([tr(prop), atom({"z1": 1, "z2": -1}, EQ, 0)])
    return phi, Partition.singletons(variables)


def prop_dnf_instance(prop: Prop) -> tuple[Formula, Partition]:
    """For satisfiable DNF input: monadically decomposable iff valid."""
    names = sorted(prop_vars(prop))
    variables = ["x"] + [f"y{i}" for i in names]

    def tr(p: Prop) -> Formula:
        tag = p[0]
        if tag == "var":
            return atom_ge({f"y{p[1]}": 1, "x": -1}, 0)  # y_i >= x
        if tag == "not":
            from .formula import negate

            return negate(tr(p[1]))
        parts = [tr(s) for s in p[1]]
        return conj(parts) if tag == "and" else disj(parts)

    return tr(prop), Partition.singletons(variables)


FAMILIES = ("add", "grid2d", "grid3d", "prop_unsat", "prop_dnf")


def gen(family: str, params: dict[str, int], seed: int = 0) -> str:
    """Generate a problem file for a benchmark family.

    Output is deterministic per (family, params, seed).
    """
    if family == "add":
        phi, partition = add_instance(params.get("n", 2))
    elif family == "grid2d":
        phi, partition = grid2d_instance(params.get("n", 2), params.get("k", 4), seed)
    elif family == "grid3d":
        phi, partition = grid3d_instance(params.get("k", 2), seed)
    elif family == "prop_unsat":
        rng = random.Random(seed)
        prop = random_prop(params.get("nvars", 3), params.get("size", 5), rng)
        phi, partition = prop_unsat_instance(prop)
    elif family == "prop_dnf":
        rng = random.Random(seed)
        prop = random_dnf(
            params.get("nvars", 3), params.get("terms", 3), params.get("width", 3), rng
        )
        phi, partition = prop_dnf_instance(prop)
    else:
        raise ValueError(f"unknown family {family!r}; pick one of {FAMILIES}")
    variables = tuple(sorted(partition.universe))
    return emit_problem(variables, partition, phi)
