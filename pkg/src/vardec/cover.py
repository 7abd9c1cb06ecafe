"""The covering engine for binary partitions.

Given a satisfiable orientation ``gamma`` of a formula's atoms, the engine
computes a *covering*: a partition-respecting DNF formula entailed by
``gamma`` with the model-flooding property, i.e. if the input formula is
decomposable, a single shared model forces every model of the covering into
the formula.

The construction works on the equality structure of predicate sets. For a
block ``Z`` of the binary partition, the *dependency space* of a predicate
set is the orthogonal complement (inside the block's coordinate space) of
the projected direction space of its equality system; it captures every
linear constraint the set enforces between the block's variables. The engine

* synthesizes equality predicates that transfer gamma's dependency spaces
  onto the covering (``enforce_deps``),
* separates every orientation group that exhibits dependencies gamma does
  not have, by a disequality on a witness vector of the excess
  (``excess_dependency``), recursively covering the lost models, and
* expands the collected disequalities into sign combinations
  (``compute_D``), keeping those consistent with gamma.

All five performance heuristics can be toggled through :class:`CoverConfig`;
none of them changes verdicts, only the amount of work and the shape of the
produced covering.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterator, Sequence

from . import lpsat
from .formula import (
    EQ,
    GT,
    LT,
    Atom,
    Formula,
    LinearPredicate,
    Partition,
    PredicateSet,
    atom,
    canonicalize,
    conj,
    dnf_formula,
)
from .linalg import (
    AffineSpace,
    Subspace,
    Vec,
    dot,
    intersect,
    orth_complement,
    project_vec,
    solve_equalities,
    spans_equal,
)


class CoverError(RuntimeError):
    """Internal guard breach; indicates a bug rather than bad input."""


@dataclass(frozen=True)
class CoverConfig:
    """Heuristic switches and the recursion guard for the covering engine.

    The flags correspond to: short-circuiting when the enforced-dependency
    set already entails the formula (a), skipping orientation groups that
    disagree with the collected disequalities (b), iterating orientation
    groups by equality pattern instead of full orientations (c), scanning
    the whole excess basis for a witness already strictly oriented by gamma
    (d), and processing groups that entail the negated formula first with an
    early exit (e). ``skip_covered`` controls the driver-level skipping of
    orientations already entailed by previously computed coverings.
    """

    theta_shortcut: bool = True
    prune_by_upsilon: bool = True
    group_by_equalities: bool = True
    full_intersection_basis: bool = True
    negative_first: bool = True
    skip_covered: bool = True
    recursion_guard: int | None = None

    @staticmethod
    def all_off() -> "CoverConfig":
        return CoverConfig(False, False, False, False, False, False, None)


@dataclass(frozen=True)
class CoverContext:
    """Shared immutable state for one covering run: formula and layout."""

    phi: Formula
    partition: Partition
    layout: tuple[str, ...]
    block_indices: tuple[tuple[int, ...], tuple[int, ...]]
    bases: tuple[LinearPredicate, ...]

    @staticmethod
    def create(phi: Formula, partition: Partition) -> "CoverContext":
        if not partition.is_binary():
            raise ValueError("the covering engine works on binary partitions")
        if not set(phi.free_vars()) <= set(partition.universe):
            raise ValueError("partition universe must cover the formula")
        x_block, y_block = partition.blocks
        layout = x_block + y_block
        nx = len(x_block)
        return CoverContext(
            phi=phi,
            partition=partition,
            layout=layout,
            block_indices=(tuple(range(nx)), tuple(range(nx, len(layout)))),
            bases=tuple(phi.atom_bases()),
        )


@dataclass(frozen=True)
class DependencySpace:
    """Block-local dependency data of a predicate set.

    ``space`` is the span of all linear dependencies the set enforces
    between the block's variables; ``image`` is its orthogonal complement,
    the projection of the equality system's direction space. ``offset`` is
    the block projection of one solution of the equality system.
    """

    block: int
    space: Subspace
    image: Subspace
    offset: Vec


@dataclass(frozen=True)
class Covering:
    """A partition-respecting DNF covering with provenance.

    ``thetas`` runs parallel to ``terms``: the dependency-enforcing set of
    the (possibly nested) engine call that produced each term, or ``None``
    for terms that came out of the simplicity shortcut.
    """

    terms: tuple[PredicateSet, ...]
    source: PredicateSet
    thetas: tuple[PredicateSet | None, ...] = ()

    def __post_init__(self):
        if len(self.thetas) != len(self.terms):
            object.__setattr__(self, "thetas", (None,) * len(self.terms))

    def theta_of(self, term: PredicateSet) -> PredicateSet | None:
        for t, th in zip(self.terms, self.thetas):
            if t == term:
                return th
        return None

    def formula(self) -> Formula:
        return dnf_formula(self.terms)


def affine_solution(preds: PredicateSet, layout: Sequence[str]) -> AffineSpace | None:
    """Solution space of the equality part of ``preds`` over ``layout``."""
    eqs = [(p.coeff_vec(layout), p.constant) for p in preds.equalities()]
    return solve_equalities(eqs, len(layout))


def _block_data(aff: AffineSpace, indices: Sequence[int]) -> DependencySpace:
    image = Subspace.from_spanning(
        len(indices), [project_vec(indices, b) for b in aff.direction.basis]
    )
    return DependencySpace(
        block=0,
        space=orth_complement(image),
        image=image,
        offset=project_vec(indices, aff.offset),
    )


def dependency_space(
    preds: PredicateSet, partition: Partition, block: int
) -> DependencySpace:
    """Dependency space of a satisfiable predicate set for one block."""
    layout = partition.blocks[0] + partition.blocks[1]
    nx = len(partition.blocks[0])
    indices = tuple(range(nx)) if block == 0 else tuple(range(nx, len(layout)))
    aff = affine_solution(preds, layout)
    if aff is None:
        raise ValueError("dependency analysis requires a satisfiable set")
    return replace(_block_data(aff, indices), block=block)


def _dep_predicate(
    w: Vec, indices: Sequence[int], block_offset: Vec, layout: Sequence[str]
) -> LinearPredicate:
    """The equality ``w . z_block = w . offset`` as a canonical atom."""
    coeffs = {layout[i]: w[k] for k, i in enumerate(indices) if w[k] != 0}
    return canonicalize(coeffs, dot(block_offset, w), EQ)


def enforce_deps(partition: Partition, gamma: PredicateSet) -> PredicateSet:
    """Respecting predicates of ``gamma`` plus its dependency equalities.

    The result entails exactly the same block dependencies as ``gamma``
    while consisting of partition-respecting predicates only.

    Raises:
        ValueError: when ``gamma`` is simple for the partition.
    """
    if lpsat.classify_simple(gamma, partition).is_simple:
        raise ValueError("dependency enforcement expects a complex input")
    layout = partition.blocks[0] + partition.blocks[1]
    nx = len(partition.blocks[0])
    aff = affine_solution(gamma, layout)
    assert aff is not None
    theta = list(gamma.respecting(partition))
    for indices in (tuple(range(nx)), tuple(range(nx, len(layout)))):
        data = _block_data(aff, indices)
        for w in data.space.basis:
            theta.append(_dep_predicate(w, indices, data.offset, layout))
    return PredicateSet(theta)


def excess_dependency_space(
    gamma_data: DependencySpace, omega_aff: AffineSpace, indices: Sequence[int]
) -> tuple[Subspace, Vec]:
    """Dependencies of an orientation group that exceed gamma's, per block.

    Returns the intersection of the group's dependency space with the image
    of gamma's projected direction space, together with the group's block
    offset. A nonzero intersection means the group has strictly more
    dependencies than gamma on this block.
    """
    omega = _block_data(omega_aff, indices)
    return intersect(omega.space, gamma_data.image), omega.offset


def excess_dependency(
    gamma: PredicateSet,
    omega: PredicateSet,
    partition: Partition,
    block: int,
) -> tuple[Vec, Fraction] | None:
    """Witness of excess dependencies of ``omega`` over ``gamma``, if any.

    Returns the first canonical basis vector ``w`` of the excess space and
    the right-hand side ``w . offset`` of the separating equality.
    """
    layout = partition.blocks[0] + partition.blocks[1]
    nx = len(partition.blocks[0])
    indices = tuple(range(nx)) if block == 0 else tuple(range(nx, len(layout)))
    gamma_aff = affine_solution(gamma, layout)
    omega_aff = affine_solution(omega, layout)
    if gamma_aff is None or omega_aff is None:
        raise ValueError("excess analysis requires satisfiable inputs")
    space, offset = excess_dependency_space(
        _block_data(gamma_aff, indices), omega_aff, indices
    )
    if space.dim == 0:
        return None
    w = space.basis[0]
    return w, dot(offset, w)


def _substituted(p: LinearPredicate, values: dict[str, Fraction]) -> LinearPredicate:
    keep = {}
    const = p.constant
    for v, c in p.coeffs:
        if v in values:
            const -= c * values[v]
        else:
            keep[v] = c
    return canonicalize(keep, const, p.rel)


def simple_term(gamma: PredicateSet, partition: Partition) -> PredicateSet | None:
    """The single covering term of a simple predicate set (None when unsat)."""
    status = lpsat.classify_simple(gamma, partition)
    if not status.is_simple:
        raise ValueError("input is complex for the partition")
    if not status.satisfiable:
        return None
    values = status.fixed.as_dict()
    out: list[LinearPredicate] = [
        canonicalize({v: 1}, val, EQ) for v, val in status.fixed.values
    ]
    for p in gamma:
        sub = _substituted(p, values)
        if sub.is_trivial():
            assert sub.evaluate({}), "substituted atom contradicts satisfiability"
            continue
        out.append(sub)
    return PredicateSet(out)


def decsimple(partition: Partition, gamma: PredicateSet) -> Formula:
    """Respecting formula equivalent to a simple predicate set.

    Every fixed variable contributes a pinning equality and gets substituted
    into the remaining atoms, which afterwards live inside single blocks.
    """
    term = simple_term(gamma, partition)
    if term is None:
        from .formula import FALSE

        return FALSE
    return conj([Atom(p) for p in term])


def compute_D(
    diseq_bases: Sequence[LinearPredicate], base: PredicateSet = PredicateSet()
) -> list[PredicateSet]:
    """All satisfiable strict orientations of the given disequality bases.

    Every result extends ``base`` (which must be strict-only) by one of
    ``<``/``>`` per disequality. The traversal asserts that no satisfiable
    interior node is a dead end, which is a theorem for strict systems.
    """
    if any(p.rel == EQ for p in base):
        raise ValueError("orientation base must contain strict atoms only")
    if not lpsat.is_sat(base):
        return []
    out: list[PredicateSet] = []

    def rec(i: int, acc: PredicateSet) -> None:
        if i == len(diseq_bases):
            out.append(acc)
            return
        children = []
        for rel in (LT, GT):
            ext = acc.union([diseq_bases[i].with_rel(rel)])
            if lpsat.is_sat(ext):
                children.append(ext)
        assert children, "green dead end reached; this contradicts strictness"
        for child in children:
            rec(i + 1, child)

    rec(0, base)
    return out


@dataclass
class _Group:
    """One equality pattern of the formula atoms, consistent with theta."""

    eq_bases: tuple[LinearPredicate, ...]
    neq_bases: tuple[LinearPredicate, ...]
    entails_phi: bool


def _enumerate_groups(theta: PredicateSet, ctx: CoverContext) -> Iterator[_Group]:
    """Equality patterns of the formula atoms realizable together with theta."""
    bases = ctx.bases

    def rec(i: int, eqs: list, neqs: list) -> Iterator[tuple[tuple, tuple]]:
        if i == len(bases):
            yield tuple(eqs), tuple(neqs)
            return
        b = bases[i]
        eq_ext = theta.union([x.with_rel(EQ) for x in eqs + [b]])
        if lpsat.sat_with_disequalities(eq_ext, neqs):
            eqs.append(b)
            yield from rec(i + 1, eqs, neqs)
            eqs.pop()
        ne_ext = theta.union([x.with_rel(EQ) for x in eqs])
        if lpsat.sat_with_disequalities(ne_ext, neqs + [b]):
            neqs.append(b)
            yield from rec(i + 1, eqs, neqs)
            neqs.pop()

    for eq_bases, neq_bases in rec(0, [], []):
        yield _Group(eq_bases, neq_bases, _group_entails_phi(theta, eq_bases, neq_bases, ctx))


def _group_entails_phi(
    theta: PredicateSet,
    eq_bases: Sequence[LinearPredicate],
    neq_bases: Sequence[LinearPredicate],
    ctx: CoverContext,
) -> bool:
    """Classification of a representative orientation of the group."""
    acc = theta.union([b.with_rel(EQ) for b in eq_bases])
    for b in neq_bases:
        for rel in (LT, GT):
            ext = acc.union([b.with_rel(rel)])
            if lpsat.is_sat(ext):
                acc = ext
                break
        else:  # pragma: no cover - contradicts group satisfiability
            raise CoverError("group lost satisfiability while orienting")
    model = lpsat.sat_model(acc, ctx.phi.free_vars())
    assert model is not None
    return ctx.phi.evaluate(model)


def _enumerate_member_orientations(
    theta: PredicateSet, ctx: CoverContext
) -> Iterator[_Group]:
    """Heuristic (c) disabled: one group per full satisfiable orientation."""
    for oriented in lpsat.iter_orientations(list(ctx.bases), theta):
        eqs = tuple(b for b in ctx.bases if b.with_rel(EQ) in oriented)
        neqs = tuple(b for b in ctx.bases if b.with_rel(EQ) not in oriented)
        model = lpsat.sat_model(oriented, ctx.phi.free_vars())
        assert model is not None
        yield _Group(eqs, neqs, ctx.phi.evaluate(model))


def cover(
    ctx: CoverContext,
    gamma: PredicateSet,
    cfg: CoverConfig = CoverConfig(),
    _depth: int = 0,
) -> Covering:
    """Covering of ``gamma`` with respect to the context's binary partition.

    The result respects the partition, is entailed by ``gamma``, and floods
    models into the context formula: under decomposability every DNF term
    either entails the formula or its negation.
    """
    partition = ctx.partition
    guard = cfg.recursion_guard if cfg.recursion_guard is not None else len(ctx.layout)
    if guard < len(ctx.layout):
        raise ValueError("recursion guard below the number of variables")
    if _depth > guard:
        raise CoverError("recursion exceeded the variable-count bound")

    status = lpsat.classify_simple(gamma, partition)
    if status.is_simple:
        term = simple_term(gamma, partition)
        return Covering((term,) if term is not None else (), gamma)

    theta = enforce_deps(partition, gamma)
    if cfg.theta_shortcut and lpsat.entails_formula(theta, ctx.phi):
        return Covering((theta,), gamma, (theta,))

    layout = ctx.layout
    gamma_aff = affine_solution(gamma, layout)
    assert gamma_aff is not None
    gamma_data = [_block_data(gamma_aff, idx) for idx in ctx.block_indices]

    delta_terms: list[tuple[PredicateSet, PredicateSet | None]] = []
    diseqs: dict = {}  # base key -> canonical equality atom
    forced: dict = {}  # base key -> strict atom fixed by heuristic (d)

    if cfg.group_by_equalities:
        groups = list(_enumerate_groups(theta, ctx))
    else:
        groups = list(_enumerate_member_orientations(theta, ctx))
    if cfg.negative_first:
        groups.sort(key=lambda g: g.entails_phi)

    def current_terms() -> list[tuple[PredicateSet, PredicateSet | None]]:
        expanded = compute_D(sorted(diseqs.values()), PredicateSet(forced.values()))
        kept = [u for u in expanded if lpsat.is_sat(gamma.union(u))]
        terms = delta_terms + [(theta.union(u), theta) for u in kept]
        return _dedupe(terms)

    def candidate_entails_phi() -> bool:
        expanded = compute_D(sorted(diseqs.values()), PredicateSet(forced.values()))
        for u in expanded:
            if not lpsat.entails_formula(theta.union(u), ctx.phi):
                return False
        return all(lpsat.entails_formula(t, ctx.phi) for t, _ in delta_terms)

    seen_phi_group = False
    for group in groups:
        if cfg.negative_first and group.entails_phi and not seen_phi_group:
            seen_phi_group = True
            if candidate_entails_phi():
                pairs = current_terms()
                return Covering(
                    tuple(t for t, _ in pairs), gamma, tuple(th for _, th in pairs)
                )
        if cfg.prune_by_upsilon and (diseqs or forced):
            probe = theta.union([b.with_rel(EQ) for b in group.eq_bases]).union(
                forced.values()
            )
            if not lpsat.sat_with_disequalities(
                probe, list(group.neq_bases) + list(diseqs.values())
            ):
                continue
        omega_eqs = theta.union([b.with_rel(EQ) for b in group.eq_bases]).equalities()
        omega_aff = affine_solution(omega_eqs, layout)
        if omega_aff is None:  # pragma: no cover - groups are satisfiable
            continue
        for block, indices in enumerate(ctx.block_indices):
            space, offset = excess_dependency_space(
                gamma_data[block], omega_aff, indices
            )
            if space.dim == 0:
                continue
            handled = False
            if cfg.full_intersection_basis:
                for w in space.basis:
                    base = _dep_predicate(w, indices, offset, layout)
                    if base.base in forced or base.base in diseqs:
                        handled = True
                        break
                    oriented = next(
                        (
                            base.with_rel(rel)
                            for rel in (LT, GT)
                            if lpsat.entails_pred(gamma, base.with_rel(rel))
                        ),
                        None,
                    )
                    if oriented is not None:
                        forced[base.base] = oriented
                        handled = True
                        break
            if not handled:
                w = space.basis[0]
                base = _dep_predicate(w, indices, offset, layout)
                if base.base in diseqs or base.base in forced:
                    break
                diseqs[base.base] = base
                extended = gamma.union([base])
                if lpsat.is_sat(extended):
                    ext_aff = affine_solution(extended, layout)
                    assert ext_aff is not None
                    grown = _block_data(ext_aff, indices)
                    assert grown.space.dim > gamma_data[block].space.dim, (
                        "separating equality failed to grow the dependency space"
                    )
                    sub = cover(ctx, extended, cfg, _depth + 1)
                    delta_terms.extend(zip(sub.terms, sub.thetas))
            break  # one block suffices; block 0 preferred

    pairs = current_terms()
    result = Covering(
        tuple(t for t, _ in pairs), gamma, tuple(th for _, th in pairs)
    )
    assert lpsat.entails_term_disjunction(gamma, list(result.terms)), (
        "covering lost models of its source"
    )
    return result


def _dedupe(
    terms: list[tuple[PredicateSet, PredicateSet | None]]
) -> list[tuple[PredicateSet, PredicateSet | None]]:
    seen: dict = {}
    for t, th in terms:
        seen.setdefault(t, th)
    return list(seen.items())
