"""Exact satisfiability and entailment for conjunctions of linear atoms.

The feasibility engine is Fourier-Motzkin elimination over exact rationals.
Equalities are eliminated first by Gaussian substitution; what remains is a
system of strict inequalities, which Fourier-Motzkin handles directly (the
combination of two strict bounds is strict again, so no bound bookkeeping
beyond that is needed). Models are recovered by back-substitution, picking
interval midpoints for eliminated variables.

On top of the engine this module provides the disjunct normal form used by
the decomposition pipeline: a *disjunct* of a formula fixes one orientation
(``<``, ``=`` or ``>``) for every atom base of the formula. Distinct
disjuncts share no model, and every satisfiable disjunct entails either the
formula or its negation, which is what makes classification by a single
model sound.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Iterator, Sequence

from .formula import (
    EQ,
    GT,
    LT,
    Formula,
    LinearPredicate,
    Model,
    Partition,
    PredicateSet,
    negate,
)

# Integer inequality row: coeffs . x < const  (always strict).
_Row = tuple[tuple[int, ...], int]

_sat_cache: dict[tuple, bool] = {}


def clear_caches() -> None:
    _sat_cache.clear()


def _row_reduce(coeffs: Sequence[int], const: int) -> _Row:
    g = 0
    for a in coeffs:
        g = gcd(g, abs(a))
    g = gcd(g, abs(const))
    if g > 1:
        return tuple(a // g for a in coeffs), const // g
    return tuple(coeffs), const


def _pred_rows(
    preds: Iterable[LinearPredicate], layout: Sequence[str]
) -> tuple[list[_Row], list[_Row]]:
    """Split atoms into strict rows (coeffs.x < c) and equality rows."""
    index = {v: i for i, v in enumerate(layout)}
    stricts: list[_Row] = []
    eqs: list[_Row] = []
    for p in preds:
        coeffs = [0] * len(layout)
        scale = 1
        for _, c in p.coeffs:
            scale = scale * c.denominator // gcd(scale, c.denominator)
        scale = scale * p.constant.denominator // gcd(scale, p.constant.denominator)
        for v, c in p.coeffs:
            coeffs[index[v]] = int(c * scale)
        const = int(p.constant * scale)
        if p.rel == EQ:
            eqs.append((tuple(coeffs), const))
        elif p.rel == LT:
            stricts.append(_row_reduce(coeffs, const))
        else:  # t > c  <=>  -t < -c
            stricts.append(_row_reduce([-a for a in coeffs], -const))
    return stricts, eqs


class _FMResult:
    __slots__ = ("feasible", "assignment")

    def __init__(self, feasible: bool, assignment: dict[int, Fraction] | None):
        self.feasible = feasible
        self.assignment = assignment


def _solve_rows(
    stricts: list[_Row], eqs: list[_Row], nvars: int, want_model: bool
) -> _FMResult:
    # Gaussian elimination of equalities; substitutions recorded for the
    # model reconstruction pass.
    subs: list[tuple[int, tuple[Fraction, ...], Fraction]] = []  # var = coeffs.x + c
    eq_rows = [([Fraction(a) for a in row], Fraction(c)) for row, c in eqs]
    strict_rows = [([Fraction(a) for a in row], Fraction(c)) for row, c in stricts]
    while eq_rows:
        row, const = eq_rows.pop()
        pivot = next((i for i, a in enumerate(row) if a != 0), None)
        if pivot is None:
            if const != 0:
                return _FMResult(False, None)
            continue
        pv = row[pivot]
        expr = tuple(-a / pv if i != pivot else Fraction(0) for i, a in enumerate(row))
        expr_const = const / pv
        subs.append((pivot, expr, expr_const))
        for rows in (eq_rows, strict_rows):
            for j, (r, c) in enumerate(rows):
                f = r[pivot]
                if f != 0:
                    nr = [
                        a + f * e if i != pivot else Fraction(0)
                        for i, (a, e) in enumerate(zip(r, expr))
                    ]
                    rows[j] = (nr, c - f * expr_const)

    # Fourier-Motzkin on the strict system.
    rows: set[_Row] = set()
    for r, c in strict_rows:
        scale = 1
        for a in r:
            scale = scale * a.denominator // gcd(scale, a.denominator)
        scale = scale * c.denominator // gcd(scale, c.denominator)
        ints = [int(a * scale) for a in r]
        const = int(c * scale)
        if not any(ints):
            if const <= 0:
                return _FMResult(False, None)
            continue
        rows.add(_row_reduce(ints, const))

    remaining = sorted({i for r, _ in rows for i, a in enumerate(r) if a != 0})
    stages: list[tuple[int, list[_Row]]] = []
    while remaining:
        # Greedy: eliminate the variable with the fewest bound combinations.
        def cost(v: int) -> tuple[int, int]:
            lo = sum(1 for r, _ in rows if r[v] < 0)
            hi = sum(1 for r, _ in rows if r[v] > 0)
            return (lo * hi, v)

        var = min(remaining, key=cost)
        lower = [(r, c) for r, c in rows if r[var] < 0]
        upper = [(r, c) for r, c in rows if r[var] > 0]
        passthrough = {(r, c) for r, c in rows if r[var] == 0}
        stages.append((var, lower + upper))
        new_rows = set(passthrough)
        for l, bl in lower:
            cl = l[var]
            for u, bu in upper:
                cu = u[var]
                coeffs = [cu * a - cl * b for a, b in zip(l, u)]
                const = cu * bl - cl * bu
                if not any(coeffs):
                    if const <= 0:
                        return _FMResult(False, None)
                    continue
                new_rows.add(_row_reduce(coeffs, const))
        rows = new_rows
        remaining = sorted({i for r, _ in rows for i, a in enumerate(r) if a != 0})

    for r, c in rows:
        if not any(r) and c <= 0:
            return _FMResult(False, None)
    if not want_model:
        return _FMResult(True, None)

    assignment: dict[int, Fraction] = {}

    def value(i: int) -> Fraction:
        return assignment.get(i, Fraction(0))

    # Assign FM-eliminated variables in reverse elimination order, choosing
    # interval midpoints so every strict bound holds with slack.
    for var, bounds in reversed(stages):
        lo: Fraction | None = None
        hi: Fraction | None = None
        for r, c in bounds:
            rest = sum((Fraction(a) * value(i) for i, a in enumerate(r) if i != var and a), Fraction(0))
            bound = (Fraction(c) - rest) / r[var]
            if r[var] > 0:
                hi = bound if hi is None else min(hi, bound)
            else:
                lo = bound if lo is None else max(lo, bound)
        if lo is not None and hi is not None:
            assignment[var] = (lo + hi) / 2
        elif lo is not None:
            assignment[var] = lo + 1
        elif hi is not None:
            assignment[var] = hi - 1
        else:
            assignment[var] = Fraction(0)
    # Recover Gaussian-substituted variables, most recent first.
    for var, expr, const in reversed(subs):
        assignment[var] = sum(
            (e * value(i) for i, e in enumerate(expr) if e), Fraction(0)
        ) + const
    for i in range(nvars):
        assignment.setdefault(i, Fraction(0))
    return _FMResult(True, assignment)


def is_sat(preds: PredicateSet) -> bool:
    """Exact satisfiability of a conjunction of atoms."""
    key = tuple(preds)
    hit = _sat_cache.get(key)
    if hit is not None:
        return hit
    layout = tuple(sorted(preds.free_vars()))
    stricts, eqs = _pred_rows(preds, layout)
    result = _solve_rows(stricts, eqs, len(layout), want_model=False).feasible
    _sat_cache[key] = result
    return result


def sat_model(
    preds: PredicateSet, variables: Iterable[str] = ()
) -> Model | None:
    """A model of ``preds`` (or ``None``), covering at least ``variables``.

    Returned values satisfy every atom with slack obtained from interval
    midpoints, so they double as small models: every assigned value is a
    ratio of subdeterminant-sized integers derived from the input rows.
    """
    layout = tuple(sorted(set(preds.free_vars()) | set(variables)))
    stricts, eqs = _pred_rows(preds, layout)
    result = _solve_rows(stricts, eqs, len(layout), want_model=True)
    if not result.feasible:
        return None
    model = {v: result.assignment[i] for i, v in enumerate(layout)}
    assert preds.evaluate(model)
    return model


def small_model(preds: PredicateSet, variables: Iterable[str] = ()) -> Model:
    """Model extraction for satisfiable input; raises on unsat input.

    The bit-size of every value is bounded by the bit-size of the interval
    endpoints produced by Fourier-Motzkin elimination: with ``n`` variables
    and input coefficients of at most ``L`` bits, each endpoint is a ratio of
    integers of at most ``2**n * (L + n)`` bits. The bound is enforced by
    tests rather than relied on by callers.
    """
    model = sat_model(preds, variables)
    if model is None:
        raise ValueError("small_model requires a satisfiable predicate set")
    return model


def entails_pred(preds: PredicateSet, p: LinearPredicate) -> bool:
    """True iff every model of ``preds`` satisfies ``p``.

    Checked as infeasibility of ``preds`` with each other orientation of
    ``p``'s base, which covers strict and equality atoms uniformly.
    """
    for rel in (LT, EQ, GT):
        if rel == p.rel:
            continue
        if is_sat(preds.union([p.with_rel(rel)])):
            return False
    return True


def sat_with_disequalities(
    preds: PredicateSet, neq_bases: Iterable[LinearPredicate]
) -> bool:
    """Satisfiability of ``preds`` plus a disequality per given base.

    By convexity of linear arithmetic the conjunction is satisfiable iff
    ``preds`` is satisfiable and entails none of the equalities.
    """
    if not is_sat(preds):
        return False
    return all(not entails_pred(preds, b.with_rel(EQ)) for b in neq_bases)


@dataclass(frozen=True)
class FixedVars:
    values: tuple[tuple[str, Fraction], ...]

    def as_dict(self) -> dict[str, Fraction]:
        return dict(self.values)

    def names(self) -> frozenset[str]:
        return frozenset(v for v, _ in self.values)


def fixed_vars(preds: PredicateSet) -> FixedVars:
    """The variables forced to a single value by ``preds``.

    The empty set is returned for unsatisfiable input.
    """
    model = sat_model(preds)
    if model is None:
        return FixedVars(())
    fixed = []
    for v in sorted(preds.free_vars()):
        pin = LinearPredicate(((v, Fraction(1)),), model[v], EQ)
        if not is_sat(preds.union([pin.with_rel(LT)])) and not is_sat(
            preds.union([pin.with_rel(GT)])
        ):
            fixed.append((v, model[v]))
    return FixedVars(tuple(fixed))


@dataclass(frozen=True)
class Simplicity:
    """Outcome of the simplicity test against a binary partition.

    A predicate set is *simple* when it is unsatisfiable or fixes every
    variable of some block, and *complex* otherwise.
    """

    satisfiable: bool
    fixed_block: int | None
    fixed: FixedVars

    @property
    def is_simple(self) -> bool:
        return not self.satisfiable or self.fixed_block is not None


def classify_simple(preds: PredicateSet, partition: Partition) -> Simplicity:
    if not partition.is_binary():
        raise ValueError("simplicity is defined against binary partitions")
    if not is_sat(preds):
        return Simplicity(False, None, FixedVars(()))
    fixed = fixed_vars(preds)
    names = fixed.names()
    block = next(
        (i for i, b in enumerate(partition.blocks) if set(b) <= names), None
    )
    return Simplicity(True, block, fixed)


# ---------------------------------------------------------------------------
# Disjunct normal form
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Disjunct:
    """One satisfiable orientation of every atom base of a formula."""

    preds: PredicateSet
    entails_phi: bool


def classify(preds: PredicateSet, phi: Formula) -> bool:
    """Whether the satisfiable set ``preds`` entails ``phi``.

    Sound for disjuncts because a disjunct entails the formula or its
    negation; a single model decides which.
    """
    model = sat_model(preds, phi.free_vars())
    if model is None:
        raise ValueError("classification needs a satisfiable predicate set")
    return phi.evaluate(model)


def _iter_cells(
    bases: Sequence[LinearPredicate],
    context: PredicateSet,
    variables: Iterable[str],
    phi: Formula | None = None,
    value: bool | None = None,
) -> Iterator[tuple[PredicateSet, Model, bool | None]]:
    """DFS over satisfiable full orientations of ``bases`` above ``context``.

    Yields ``(cell, model, truth)`` triples where ``cell`` extends the
    context by one orientation per base (in ``<``, ``=``, ``>`` order),
    ``model`` witnesses its satisfiability, and ``truth`` is the definite
    truth value of ``phi`` on the cell (``None`` without a formula).

    Two devices keep this fast: a branch whose atom is already satisfied by
    the parent's model needs no feasibility solve, and when a partial
    orientation already fixes the truth value of ``phi`` against ``value``
    the whole subtree is skipped.
    """
    want = tuple(sorted(set(variables)))
    root = sat_model(context, want)
    if root is None:
        return
    assign: dict = {}
    base_list = list(bases)

    def rec(
        i: int, acc: PredicateSet, model: Model
    ) -> Iterator[tuple[PredicateSet, Model, bool | None]]:
        truth = phi.orientation_eval(assign) if phi is not None else None
        if value is not None and truth is not None and truth != value:
            return
        if i == len(base_list):
            yield acc, model, truth
            return
        b = base_list[i]
        for rel in (LT, EQ, GT):
            assign[b.base] = rel
            p = b.with_rel(rel)
            ext = acc.union([p])
            if p.evaluate(model):
                yield from rec(i + 1, ext, model)
            else:
                fresh = sat_model(ext, want)
                if fresh is not None:
                    yield from rec(i + 1, ext, fresh)
            del assign[b.base]

    yield from rec(0, context, root)


def iter_orientations(
    bases: Sequence[LinearPredicate],
    context: PredicateSet = PredicateSet(),
) -> Iterator[PredicateSet]:
    """All satisfiable orientations of ``bases`` above ``context``.

    Yields ``context`` extended by one orientation per base, in
    lexicographic symbol order; unsatisfiable prefixes cut whole subtrees.
    """
    variables = set(context.free_vars())
    for b in bases:
        variables |= b.free_vars()
    for cell, _model, _truth in _iter_cells(bases, context, variables):
        yield cell


def enumerate_disjuncts(
    phi: Formula,
    context: PredicateSet = PredicateSet(),
    value: bool | None = None,
) -> Iterator[Disjunct]:
    """Stream the satisfiable disjuncts of ``phi`` consistent with ``context``.

    The classification tag is the formula's (definite) truth value on the
    orientation; with ``value`` given, only disjuncts of that class are
    produced and opposite subtrees are pruned early.
    """
    bases = phi.atom_bases()
    base_keys = {b.base for b in bases}
    variables = set(phi.free_vars()) | set(context.free_vars())
    for cell, _model, truth in _iter_cells(bases, context, variables, phi, value):
        core = PredicateSet(p for p in cell if p.base in base_keys)
        assert truth is not None
        yield Disjunct(core, truth)


def entails_formula(premise: PredicateSet, phi: Formula) -> bool:
    """Exact entailment ``premise |= phi`` for a conjunction premise."""
    ok, _ = entails_formula_counterexample(premise, phi)
    return ok


def entails_formula_counterexample(
    premise: PredicateSet, phi: Formula
) -> tuple[bool, Model | None]:
    """Entailment check returning a countermodel on failure.

    The countermodel satisfies ``premise`` and falsifies ``phi``.
    """
    if not is_sat(premise):
        return True, None
    variables = phi.free_vars() | premise.free_vars()
    for _cell, model, _truth in _iter_cells(
        phi.atom_bases(), premise, variables, phi, value=False
    ):
        return False, model
    return True, None


def entails_term_disjunction(
    premise: PredicateSet, terms: Sequence[PredicateSet]
) -> bool:
    """Exact check of ``premise |= term_1 or ... or term_k``.

    Splits the premise along an undecided atom of some consistent term until
    each piece is absorbed by a single term atomwise. Terminates because a
    split pins down one atom base per recursion level. Terms that orient an
    atom base differently from the premise contradict it outright, and a
    premise model that satisfies a term witnesses consistency; both filters
    avoid the bulk of the feasibility solves.
    """
    variables = set(premise.free_vars())
    for t in terms:
        variables |= t.free_vars()
    model = sat_model(premise, variables)
    if model is None:
        return True
    return _entails_term_disjunction(premise, model, list(terms), tuple(variables))


def _entails_term_disjunction(
    premise: PredicateSet,
    model: Model,
    terms: list[PredicateSet],
    variables: tuple[str, ...],
) -> bool:
    rel_of = {p.base: p.rel for p in premise}
    live: list[PredicateSet] = []
    for t in terms:
        if any(rel_of.get(p.base, p.rel) != p.rel for p in t):
            continue
        if t.evaluate(model) or is_sat(premise.union(t)):
            live.append(t)
    if not live:
        return False
    split_pred: LinearPredicate | None = None
    for t in live:
        undecided = next(
            (
                p
                for p in t
                if p.base not in rel_of and not entails_pred(premise, p)
            ),
            None,
        )
        if undecided is None:
            return True
        if split_pred is None:
            split_pred = undecided
    assert split_pred is not None
    for rel in (LT, EQ, GT):
        ext = premise.union([split_pred.with_rel(rel)])
        fresh = model if split_pred.with_rel(rel).evaluate(model) else sat_model(
            ext, variables
        )
        if fresh is None:
            continue
        if not _entails_term_disjunction(ext, fresh, live, variables):
            return False
    return True


def formula_model(phi: Formula, variables: Iterable[str] = ()) -> Model | None:
    """Some model of an arbitrary quantifier-free formula, or ``None``."""
    bases = phi.atom_bases()
    want = set(phi.free_vars()) | set(variables)
    if not bases:
        return {v: Fraction(0) for v in want} if phi.evaluate({}) else None
    for _cell, model, _truth in _iter_cells(
        bases, PredicateSet(), want, phi, value=True
    ):
        return model
    return None


def formula_sat(phi: Formula) -> bool:
    return formula_model(phi) is not None


def formula_equiv(a: Formula, b: Formula) -> bool:
    """Semantic equivalence of two formulas over the union of their atoms."""
    return formula_model(_xor(a, b)) is None


def _xor(a: Formula, b: Formula) -> Formula:
    from .formula import conj, disj

    return disj([conj([a, negate(b)]), conj([negate(a), b])])
