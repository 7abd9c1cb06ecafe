"""Top-level decision procedure for variable decomposability.

``decide`` determines whether a quantifier-free linear real arithmetic
formula is equivalent to a Boolean combination of atoms that each stay
inside one block of a given variable partition, and produces either such a
decomposition or a re-checkable witness of non-decomposability.

Binary partitions are decided directly by the covering reduction: the
formula is decomposable iff the covering of every satisfiable orientation
entailing the formula entails the formula again. Larger partitions are
decided through the binary reduction (the verdict is the conjunction of the
binary verdicts) and, on success, a decomposition is assembled recursively:
the binary decomposition for a two-way split of the blocks is regrouped by
the fibers it induces on one side, and both sides are decomposed further.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from . import lpsat
from .cover import CoverConfig, CoverContext, Covering, cover
from .formula import (
    EQ,
    Formula,
    FALSE,
    TRUE,
    LinearPredicate,
    Model,
    Partition,
    PredicateSet,
    conj,
    disj,
    dnf_formula,
    formula_respects,
    negate,
    predicate_set_formula,
)
from .partitions import binary_reduction


@dataclass(frozen=True)
class Decomposition:
    """A decomposition as a DNF of partition-respecting terms.

    ``sources`` maps positionally onto ``terms``; an entry is the formula
    orientation whose covering produced the term, or ``None`` for terms
    synthesized while assembling a non-binary partition's decomposition.
    """

    terms: tuple[PredicateSet, ...]
    sources: tuple[PredicateSet | None, ...]
    trivial: Formula | None = None

    def formula(self) -> Formula:
        if self.trivial is not None:
            return self.trivial
        return dnf_formula(self.terms)


@dataclass(frozen=True)
class NonDecWitness:
    """Everything needed to re-check a negative verdict independently.

    ``gamma`` entails the formula, ``covering`` is its computed covering,
    ``failing_term`` is a covering term that does not entail the formula and
    ``counter_model`` satisfies that term while falsifying the formula. The
    binary partition the covering was computed against is included because
    non-binary inputs are refuted through one of their binary reductions.
    """

    gamma: PredicateSet
    covering: Covering
    failing_term: PredicateSet
    counter_model: Model
    partition: Partition
    proof: object | None = None


@dataclass(frozen=True)
class DecideResult:
    decomposable: bool
    decomposition: Decomposition | None = None
    witness: NonDecWitness | None = None


def _trivial_verdict(phi: Formula) -> DecideResult | None:
    if lpsat.formula_model(phi) is None:
        return DecideResult(True, Decomposition((), (), trivial=FALSE))
    if lpsat.formula_model(negate(phi)) is None:
        return DecideResult(True, Decomposition((), (), trivial=TRUE))
    return None


class _TermIndex:
    """Index of covering terms for the cheap orientation-skip test.

    A term's atoms over the formula's own bases must literally appear in an
    orientation for the orientation to entail the term, which prunes the
    candidate terms to check; remaining atoms are verified by entailment.
    The check is a sound under-approximation of entailing the disjunction of
    all computed coverings: it only ever skips orientations that are already
    covered, so the verdict is unaffected.
    """

    def __init__(self, phi_bases: Sequence[LinearPredicate]):
        self._base_keys = {b.base for b in phi_bases}
        self._entries: list[tuple[frozenset, list[LinearPredicate]]] = []

    def add(self, term: PredicateSet) -> None:
        own = frozenset(p for p in term if p.base in self._base_keys)
        rest = [p for p in term if p.base not in self._base_keys]
        self._entries.append((own, rest))

    def covers(self, oriented: PredicateSet) -> bool:
        atoms = set(oriented)
        for own, rest in self._entries:
            if own <= atoms and all(lpsat.entails_pred(oriented, p) for p in rest):
                return True
        return False


def _decide_binary(
    phi: Formula, partition: Partition, cfg: CoverConfig
) -> DecideResult:
    ctx = CoverContext.create(phi, partition)
    terms: list[PredicateSet] = []
    sources: list[PredicateSet | None] = []
    seen: set[PredicateSet] = set()
    index = _TermIndex(ctx.bases)
    for dis in lpsat.enumerate_disjuncts(phi, value=True):
        if cfg.skip_covered and index.covers(dis.preds):
            continue
        covering = cover(ctx, dis.preds, cfg)
        for term in covering.terms:
            ok, counter = lpsat.entails_formula_counterexample(term, phi)
            if not ok:
                witness = NonDecWitness(
                    gamma=dis.preds,
                    covering=covering,
                    failing_term=term,
                    counter_model=counter,
                    partition=partition,
                )
                return DecideResult(False, witness=witness)
        for term in covering.terms:
            if term not in seen:
                seen.add(term)
                terms.append(term)
                sources.append(dis.preds)
                index.add(term)
    return DecideResult(True, Decomposition(tuple(terms), tuple(sources)))


def _split_blocks(partition: Partition) -> tuple[Partition, Partition, Partition]:
    """Two-way split of a partition's blocks plus the per-side partitions."""
    k = len(partition.blocks)
    half = (k + 1) // 2
    left = partition.blocks[:half]
    right = partition.blocks[half:]
    outer = Partition.of([[v for b in left for v in b], [v for b in right for v in b]])
    return outer, Partition.of(left), Partition.of(right)


def _restrict_term(term: PredicateSet, block_vars: set[str]) -> PredicateSet:
    return PredicateSet(p for p in term if p.free_vars() <= block_vars)


def _fiber_formula(alphas: Sequence[PredicateSet]) -> Formula:
    return disj([predicate_set_formula(a) for a in alphas])


def _fibers_equivalent(a: Sequence[PredicateSet], b: Sequence[PredicateSet]) -> bool:
    return all(lpsat.entails_term_disjunction(t, list(b)) for t in a) and all(
        lpsat.entails_term_disjunction(t, list(a)) for t in b
    )


def _decompose_general(
    phi: Formula, partition: Partition, cfg: CoverConfig
) -> DecideResult:
    """Decide and decompose against an arbitrary partition, recursively."""
    trivial = _trivial_verdict(phi)
    if trivial is not None:
        return trivial
    if len(partition.blocks) == 1:
        # Any formula respects a one-block partition; its satisfiable
        # orientations give a canonical DNF.
        terms = [d.preds for d in lpsat.enumerate_disjuncts(phi, value=True)]
        return DecideResult(
            True, Decomposition(tuple(terms), (None,) * len(terms))
        )
    if len(partition.blocks) == 2:
        return _decide_binary(phi, partition, cfg)

    outer, left_partition, right_partition = _split_blocks(partition)
    binary = _decide_binary(phi, outer, cfg)
    if not binary.decomposable:
        return binary

    left_vars = set(outer.blocks[0])
    right_vars = set(outer.blocks[1])
    pairs = [
        (_restrict_term(t, left_vars), _restrict_term(t, right_vars))
        for t in binary.decomposition.terms
    ]

    # Enumerate the cells of the right-hand atoms; each cell selects the set
    # of binary terms whose right part it satisfies, and that set determines
    # the left-hand fiber of the formula over the cell.
    right_atoms = sorted(
        {p.with_rel(EQ) for _, beta in pairs for p in beta}, key=lambda p: p.base
    )
    fiber_types: dict[frozenset[int], list[PredicateSet]] = {}
    for cell in lpsat.iter_orientations(right_atoms):
        selected = frozenset(
            i for i, (_, beta) in enumerate(pairs) if beta <= cell
        )
        fiber_types.setdefault(selected, []).append(cell)

    groups: list[tuple[list[PredicateSet], list[PredicateSet]]] = []
    for selected, cells in fiber_types.items():
        if not selected:
            continue
        alphas = [pairs[i][0] for i in sorted(selected)]
        for existing_alphas, existing_cells in groups:
            if _fibers_equivalent(alphas, existing_alphas):
                existing_cells.extend(cells)
                break
        else:
            groups.append((alphas, cells))

    terms: list[PredicateSet] = []
    sources: list[PredicateSet | None] = []
    for alphas, cells in groups:
        left_result = _decompose_general(
            _fiber_formula(alphas), left_partition, cfg
        )
        if not left_result.decomposable:
            return left_result
        right_result = _decompose_general(
            dnf_formula(cells), right_partition, cfg
        )
        if not right_result.decomposable:
            return right_result
        for a in _decomposition_terms(left_result.decomposition):
            for b in _decomposition_terms(right_result.decomposition):
                combined = a.union(b)
                if lpsat.is_sat(combined):
                    terms.append(combined)
                    sources.append(None)
    return DecideResult(True, Decomposition(tuple(terms), tuple(sources)))


def _decomposition_terms(dec: Decomposition) -> tuple[PredicateSet, ...]:
    if dec.trivial is TRUE:
        return (PredicateSet(),)
    if dec.trivial is FALSE:
        return ()
    return dec.terms


def decide(
    phi: Formula, partition: Partition, cfg: CoverConfig = CoverConfig()
) -> DecideResult:
    """Decide decomposability of ``phi`` against ``partition``.

    For a partition with more than two blocks the verdict is the conjunction
    of the verdicts for its binary reduction; a decomposition is assembled
    only when all of them hold (they must, by the meet argument, whenever the
    assembly is reached).
    """
    if not set(phi.free_vars()) <= set(partition.universe):
        raise ValueError("partition universe must cover the formula's variables")
    trivial = _trivial_verdict(phi)
    if trivial is not None:
        return trivial
    if len(partition.blocks) <= 2:
        return _decompose_general(phi, partition, cfg)
    for binary in binary_reduction(partition):
        result = _decide_binary(phi, binary, cfg)
        if not result.decomposable:
            return result
    result = _decompose_general(phi, partition, cfg)
    if not result.decomposable:  # pragma: no cover - contradicts the meet argument
        raise RuntimeError("assembly failed although all binary verdicts passed")
    return result


def mondec(phi: Formula, cfg: CoverConfig = CoverConfig()) -> DecideResult:
    """Monadic decomposability: one singleton block per free variable."""
    fv = phi.free_vars()
    if len(fv) <= 1:
        universe = fv or {"x"}
        return _decompose_general(phi, Partition.singletons(universe), cfg)
    return decide(phi, Partition.singletons(fv), cfg)


def approx(
    phi: Formula, partition: Partition, cfg: CoverConfig = CoverConfig()
) -> Formula:
    """Best partition-respecting over-approximation of ``phi``.

    The disjunction of the coverings of all orientations entailing ``phi``.
    It is entailed by ``phi``, respects the partition, entails every
    partition-respecting disjunction of orientations that covers ``phi``,
    and is equivalent to ``phi`` exactly when ``phi`` is decomposable.
    """
    if not partition.is_binary():
        raise ValueError("approximation is defined for binary partitions")
    trivial = _trivial_verdict(phi)
    if trivial is not None:
        return trivial.decomposition.formula()
    ctx = CoverContext.create(phi, partition)
    terms: list[PredicateSet] = []
    seen: set[PredicateSet] = set()
    for dis in lpsat.enumerate_disjuncts(phi, value=True):
        for term in cover(ctx, dis.preds, cfg).terms:
            if term not in seen:
                seen.add(term)
                terms.append(term)
    return dnf_formula(terms)


def check_decomposition(phi: Formula, partition: Partition, psi: Formula) -> bool:
    """Certify a decomposition: syntactic respect plus mutual entailment."""
    if not formula_respects(psi, partition):
        return False
    return formula_entails(phi, psi) and formula_entails(psi, phi)


def _dnf_terms_of(f: Formula) -> list[PredicateSet] | None:
    """The term list of a formula in DNF shape, or ``None`` otherwise."""
    from .formula import And, Atom as AtomNode, FalseFormula, Or, TrueFormula

    def term_of(g: Formula) -> PredicateSet | None:
        if isinstance(g, AtomNode):
            return PredicateSet([g.pred])
        if isinstance(g, And) and all(isinstance(a, AtomNode) for a in g.args):
            return PredicateSet([a.pred for a in g.args])
        return None

    if isinstance(f, TrueFormula):
        return [PredicateSet()]
    if isinstance(f, FalseFormula):
        return []
    single = term_of(f)
    if single is not None:
        return [single]
    if isinstance(f, Or):
        out = []
        for arg in f.args:
            t = term_of(arg)
            if t is None:
                return None
            out.append(t)
        return out
    return None


def _term_entails(term: PredicateSet, conclusion: Formula) -> bool:
    dnf = _dnf_terms_of(conclusion)
    if dnf is not None:
        return lpsat.entails_term_disjunction(term, dnf)
    return lpsat.entails_formula(term, conclusion)


def formula_entails(premise: Formula, conclusion: Formula) -> bool:
    """Exact entailment between arbitrary quantifier-free formulas.

    DNF premises check term by term; a DNF conclusion is handled by
    term-disjunction splitting, which avoids enumerating orientations of the
    conclusion's atoms wholesale.
    """
    premise_dnf = _dnf_terms_of(premise)
    if premise_dnf is not None:
        return all(_term_entails(t, conclusion) for t in premise_dnf)
    dnf = _dnf_terms_of(conclusion)
    for dis in lpsat.enumerate_disjuncts(premise, value=True):
        if dnf is not None:
            if not lpsat.entails_term_disjunction(dis.preds, dnf):
                return False
        elif not lpsat.entails_formula(dis.preds, conclusion):
            return False
    return True


def independent(
    phi: Formula,
    var_a: str,
    var_b: str,
    hint: Partition,
    cfg: CoverConfig = CoverConfig(),
) -> bool:
    """Decide independence of two variables via a candidate partition.

    The hint must place the two variables in different blocks; the verdict
    is decomposability against the hint.
    """
    fv = phi.free_vars()
    if var_a not in fv or var_b not in fv or var_a == var_b:
        raise ValueError("expected two distinct free variables of the formula")
    if hint.block_of(var_a) == hint.block_of(var_b):
        raise ValueError("hint partition does not separate the variables")
    return decide(phi, hint, cfg).decomposable
