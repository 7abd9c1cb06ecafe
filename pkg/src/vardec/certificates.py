"""Certificates of non-decomposability: verification, construction, compression.

A certificate consists of four predicate sets ``(l0, l1, l0p, l1p)``. The
primed sets orient every atom of the formula (so a single model classifies
them against the formula), are equivalent to their unprimed subsets, and the
unprimed sets are complex for the partition, agree on all block dependency
spaces, and differ in exactly one predicate, which is an equality in ``l1``
and a strict orientation of it in ``l0``. Jointly these checks refute
decomposability: under a decomposition, two complex sets with identical
dependency structure that sit next to each other across one hyperplane
cannot classify oppositely.

All checks run in time polynomial in the certificate size. Construction
walks the orientations of the source disjunct's block-crossing atoms,
maintaining a pair of oppositely classified orientations until the pair is
one hyperplane apart; compression replaces the potentially long strict tail
shared by both primed sets with an open cube around a model.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from . import lpsat
from .cover import affine_solution
from .formula import (
    EQ,
    GT,
    LT,
    Formula,
    LinearPredicate,
    Model,
    Partition,
    PredicateSet,
    canonicalize,
)
from .linalg import Subspace, project_vec, spans_equal


class CertificateError(RuntimeError):
    """Witness construction failed; indicates a bug, not bad input."""


@dataclass(frozen=True)
class LambdaProof:
    """Four-set certificate of non-decomposability."""

    l0: PredicateSet
    l1: PredicateSet
    l0p: PredicateSet
    l1p: PredicateSet


@dataclass(frozen=True)
class VerifyResult:
    accepted: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.accepted


def _reject(reason: str) -> VerifyResult:
    return VerifyResult(False, reason)


ACCEPT = VerifyResult(True)


def _pivot_of(proof: LambdaProof) -> tuple[LinearPredicate, LinearPredicate] | None:
    """The (equality, strict) pivot pair when l1 is next to l0, else None."""
    only_l1 = list(proof.l1.difference(proof.l0))
    only_l0 = list(proof.l0.difference(proof.l1))
    if len(only_l1) != 1 or len(only_l0) != 1:
        return None
    p_eq, p_strict = only_l1[0], only_l0[0]
    if p_eq.rel != EQ or p_strict.rel == EQ or p_eq.base != p_strict.base:
        return None
    return p_eq, p_strict


def verify(phi: Formula, partition: Partition, proof: LambdaProof) -> VerifyResult:
    """Check a certificate; rejects carry the name of the first failed check.

    The partition must be binary; non-binary inputs are refuted through one
    of their binary reductions, and certificates refer to that partition.
    """
    if not partition.is_binary():
        raise ValueError("certificates are checked against binary partitions")
    bases = phi.atom_bases()
    for primed in (proof.l0p, proof.l1p):
        present = {p.base for p in primed}
        if any(b.base not in present for b in bases):
            return _reject("atom-coverage")
    if not (proof.l0 <= proof.l0p and proof.l1 <= proof.l1p):
        return _reject("subset")
    for small, big in ((proof.l0, proof.l0p), (proof.l1, proof.l1p)):
        if any(not lpsat.entails_pred(small, p) for p in big):
            return _reject("equivalence")
    if _pivot_of(proof) is None:
        return _reject("p-next")
    if lpsat.classify_simple(proof.l0, partition).is_simple:
        return _reject("complexity")
    if lpsat.classify_simple(proof.l1, partition).is_simple:
        return _reject("complexity")
    layout = partition.blocks[0] + partition.blocks[1]
    nx = len(partition.blocks[0])
    aff0 = affine_solution(proof.l0, layout)
    aff1 = affine_solution(proof.l1, layout)
    assert aff0 is not None and aff1 is not None
    for indices in (tuple(range(nx)), tuple(range(nx, len(layout)))):
        image0 = Subspace.from_spanning(
            len(indices), [project_vec(indices, b) for b in aff0.direction.basis]
        )
        image1 = Subspace.from_spanning(
            len(indices), [project_vec(indices, b) for b in aff1.direction.basis]
        )
        if not spans_equal(image0, image1):
            return _reject("dependency")
    want = phi.free_vars()
    v0 = lpsat.sat_model(proof.l0, want)
    v1 = lpsat.sat_model(proof.l1, want)
    assert v0 is not None and v1 is not None
    if phi.evaluate(v0) == phi.evaluate(v1):
        return _reject("classification")
    return ACCEPT


# ---------------------------------------------------------------------------
# Witness construction
# ---------------------------------------------------------------------------


def _members(
    phi: Formula, base: PredicateSet
) -> Iterator[tuple[PredicateSet, bool]]:
    """Full orientations of phi's atoms consistent with ``base``, classified."""
    for oriented in lpsat.iter_orientations(phi.atom_bases(), base):
        model = lpsat.sat_model(oriented, phi.free_vars())
        assert model is not None
        yield oriented, phi.evaluate(model)


def _opposite_pair(
    phi: Formula, base: PredicateSet
) -> tuple[PredicateSet | None, PredicateSet | None]:
    """First formula-entailing and first negation-entailing member of base."""
    pos = neg = None
    for member, truth in _members(phi, base):
        if truth and pos is None:
            pos = member
        if not truth and neg is None:
            neg = member
        if pos is not None and neg is not None:
            break
    return pos, neg


def _orientation_of(preds: PredicateSet, base: LinearPredicate) -> str:
    for p in preds:
        if p.base == base.base:
            return p.rel
    raise CertificateError("orientation missing from a full member")


def find_witness(
    phi: Formula,
    partition: Partition,
    gamma: PredicateSet,
    failing_term: PredicateSet,
) -> LambdaProof:
    """Construct an accepting certificate from a failed covering term.

    ``gamma`` must entail the formula while ``failing_term`` (a DNF term of
    gamma's covering) must not. The primary strategy follows the inductive
    pair-walking construction; if it produces a rejected certificate (which
    would indicate a bug), a bounded search over next-to pairs of the term's
    members runs as a fallback before giving up.
    """
    if not partition.is_binary():
        raise ValueError("witness construction needs a binary partition")
    if not lpsat.entails_formula(gamma, phi):
        raise ValueError("the source orientation must entail the formula")
    pos, neg = _opposite_pair(phi, failing_term)
    if neg is None:
        raise ValueError("the covering term entails the formula; nothing to refute")
    assert pos is not None, "term inconsistent with its own source"
    p_list = sorted(gamma.disrespecting(partition))
    proof = _construct(phi, failing_term, p_list, pos, neg, len(p_list))
    if proof is not None and verify(phi, partition, proof):
        return proof
    proof = _fallback_pair_search(phi, partition, failing_term)
    if proof is None:
        raise CertificateError("no certificate found; completeness is violated")
    return proof


def _construct(
    phi: Formula,
    lam: PredicateSet,
    p_list: Sequence[LinearPredicate],
    gamma_pos: PredicateSet,
    gamma_neg: PredicateSet,
    m: int,
) -> LambdaProof | None:
    fixed: list[LinearPredicate] = []
    while m >= 1:
        pivot = p_list[m - 1]
        base = lam.union(fixed)
        # Status of the three orientations of the pivot hyperplane.
        mixed_s = None
        members: dict[str, tuple[PredicateSet | None, PredicateSet | None]] = {}
        for rel in (LT, EQ, GT):
            ext = base.union([pivot.with_rel(rel)])
            if not lpsat.is_sat(ext):
                members[rel] = (None, None)
                continue
            pos, neg = _opposite_pair(phi, ext)
            members[rel] = (pos, neg)
            if pos is not None and neg is not None and mixed_s is None:
                mixed_s = rel
        if mixed_s is not None:
            # Undetermined orientation: descend into it with a fresh pair.
            fixed.append(pivot.with_rel(mixed_s))
            gamma_pos, gamma_neg = members[mixed_s]
            m -= 1
            continue
        s_pos = _orientation_of(gamma_pos, pivot)
        s_neg = _orientation_of(gamma_neg, pivot)
        if s_pos == s_neg:
            fixed.append(pivot.with_rel(s_pos))
            m -= 1
            continue
        if {s_pos, s_neg} == {LT, GT}:
            # Both strict: the equality slice is satisfiable and determined;
            # swap one side of the pair for a member of the slice.
            pos_eq, neg_eq = members[EQ]
            if pos_eq is None and neg_eq is None:
                return None  # contradicts predicate convexity
            if pos_eq is not None:
                gamma_pos = pos_eq
            else:
                gamma_neg = neg_eq
            s_pos = _orientation_of(gamma_pos, pivot)
            s_neg = _orientation_of(gamma_neg, pivot)
        strict_rel = s_pos if s_neg == EQ else s_neg
        return _build_proof(phi, base, p_list[:m], pivot, strict_rel)
    return None


def _build_proof(
    phi: Formula,
    base: PredicateSet,
    loop_preds: Sequence[LinearPredicate],
    pivot: LinearPredicate,
    strict_rel: str,
) -> LambdaProof | None:
    """Run the orientation-absorbing loop and assemble the certificate.

    Invariants maintained per step: the accumulated set stays satisfiable
    together with each pivot orientation, and each side's private additions
    are entailed by the accumulated set plus that side's pivot orientation.
    """
    ups = base
    ups_strict: list[LinearPredicate] = []
    ups_eq: list[LinearPredicate] = []
    pivot_strict = pivot.with_rel(strict_rel)
    pivot_eq = pivot.with_rel(EQ)
    for p in loop_preds:
        absorbed = None
        for rel in (LT, EQ, GT):
            ext = ups.union([p.with_rel(rel)])
            if lpsat.is_sat(ext.union([pivot_strict])) and lpsat.is_sat(
                ext.union([pivot_eq])
            ):
                absorbed = p.with_rel(rel)
                break
        if absorbed is not None:
            ups = ups.union([absorbed])
            continue
        q_strict = _entailed_orientation(ups.union([pivot_strict]), p)
        q_eq = _entailed_orientation(ups.union([pivot_eq]), p)
        if q_strict is None or q_eq is None:
            return None  # contradicts convexity
        if q_strict == q_eq:
            ups = ups.union([p.with_rel(q_strict)])
        else:
            ups_strict.append(p.with_rel(q_strict))
            ups_eq.append(p.with_rel(q_eq))
    l0p = ups.union(ups_strict)
    l1p = ups.union(ups_eq)
    l0 = ups.union([pivot_strict])
    l1 = ups.union([pivot_eq])
    return LambdaProof(l0, l1, l0p, l1p)


def _entailed_orientation(
    preds: PredicateSet, base: LinearPredicate
) -> str | None:
    for rel in (LT, EQ, GT):
        if lpsat.entails_pred(preds, base.with_rel(rel)):
            return rel
    return None


def _fallback_pair_search(
    phi: Formula, partition: Partition, lam: PredicateSet
) -> LambdaProof | None:
    members = list(_members(phi, lam))
    for (d0, t0) in members:
        for (d1, t1) in members:
            if t0 == t1:
                continue
            candidate = LambdaProof(d0, d1, d0, d1)
            if _pivot_of(candidate) is None:
                continue
            if verify(phi, partition, candidate):
                return candidate
    return None


# ---------------------------------------------------------------------------
# Cube compression
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CubePredicateSet:
    """An open axis-aligned cube around a point, as strict atoms."""

    center: tuple[tuple[str, Fraction], ...]
    epsilon: Fraction
    predicates: PredicateSet


def open_cube(center: Model, strict_preds: PredicateSet) -> CubePredicateSet:
    """Cube around ``center`` small enough to entail the given strict atoms.

    The side length avoids square roots: it is the minimum over the atoms of
    ``|margin| / (3 * l1-norm of the coefficients)``, which suffices because
    moving every coordinate by less than ``eps/2`` changes the atom's value
    by less than ``l1-norm * eps/2``.
    """
    for p in strict_preds:
        if p.rel == EQ:
            raise ValueError("cube construction expects strict atoms only")
        if not p.evaluate(center):
            raise ValueError("cube center violates a predicate")
    eps = Fraction(1)
    for p in strict_preds:
        value = sum((c * center[v] for v, c in p.coeffs), Fraction(0))
        margin = abs(value - p.constant)
        norm = sum(abs(c) for _, c in p.coeffs)
        eps = min(eps, margin / (3 * norm))
    assert eps > 0
    atoms = []
    for v in sorted(center):
        atoms.append(canonicalize({v: 1}, center[v] + eps / 2, LT))
        atoms.append(canonicalize({v: 1}, center[v] - eps / 2, GT))
    return CubePredicateSet(
        tuple(sorted(center.items())), eps, PredicateSet(atoms)
    )


def compression_context(
    phi: Formula, theta: PredicateSet, proof: LambdaProof
) -> tuple[PredicateSet, PredicateSet, PredicateSet]:
    """The (theta, gamma0, gamma1) context compress() expects.

    ``gamma_i`` is theta plus the orientations of the formula's own atoms
    inside the i-th primed set.
    """
    keys = {b.base for b in phi.atom_bases()}
    g0 = theta.union(p for p in proof.l0p if p.base in keys)
    g1 = theta.union(p for p in proof.l1p if p.base in keys)
    return theta, g0, g1


def compress(
    proof: LambdaProof,
    theta: PredicateSet,
    gamma0: PredicateSet,
    gamma1: PredicateSet,
) -> LambdaProof:
    """Replace the shared strict tail of a certificate by an open cube.

    ``gamma0``/``gamma1`` are the orientation parts of the primed sets and
    ``theta`` the dependency-enforcing set of the producing engine call; the
    strict predicates of the primed sets beyond them are entailed by a cube
    around any model of ``l1``, so the certificate stays valid with the cube
    substituted and its size drops to the orientation part plus two atoms
    per variable.
    """
    if not (theta <= gamma0 and theta <= gamma1):
        raise ValueError("theta must be part of both orientation sets")
    if not (gamma0 <= proof.l0p and gamma1 <= proof.l1p):
        raise ValueError("orientation sets must sit inside the primed sets")
    tail0 = proof.l0p.difference(gamma0)
    tail1 = proof.l1p.difference(gamma1)
    if tail0 != tail1:
        raise ValueError("primed sets disagree on the shared strict tail")
    if any(p.rel == EQ for p in tail0):
        raise ValueError("shared tail must be strict")
    if not len(tail0):
        return proof
    pivot = _pivot_of(proof)
    if pivot is None:
        raise ValueError("certificate lacks a pivot pair")
    p_eq, p_strict = pivot
    variables = (
        proof.l0p.free_vars()
        | proof.l1p.free_vars()
        | proof.l0.free_vars()
        | proof.l1.free_vars()
    )
    center = lpsat.small_model(proof.l1, variables)
    cube = open_cube(center, tail0).predicates
    core = gamma0.intersection(gamma1)
    ups_strict = proof.l0p.difference(proof.l1p)
    ups_eq = proof.l1p.difference(proof.l0p)
    return LambdaProof(
        l0=core.union(cube).union([p_strict]),
        l1=core.union(cube).union([p_eq]),
        l0p=core.union(cube).union(ups_strict),
        l1p=core.union(cube).union(ups_eq),
    )
