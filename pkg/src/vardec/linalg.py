"""Exact linear algebra over the rationals.

Vectors are tuples of :class:`fractions.Fraction`, matrices are tuples of row
vectors. Every operation is exact; there is no floating point anywhere. The
module provides the usual suspects (reduced row echelon form, kernels, affine
solution spaces) plus subspace algebra (intersection via the Zassenhaus
sum-intersection scheme, orthogonal complements, span membership).

Determinism matters here because callers derive predicates from basis vectors:
subspace bases are kept in a canonical form (each vector scaled to coprime
integer entries with positive leading entry, vectors in reduced row echelon
order), so equal subspaces compare structurally equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

Vec = tuple[Fraction, ...]
Matrix = tuple[Vec, ...]

_ZERO = Fraction(0)
_ONE = Fraction(1)


def vec(entries: Iterable) -> Vec:
    return tuple(Fraction(e) for e in entries)


def matrix(rows: Iterable[Iterable]) -> Matrix:
    rs = tuple(vec(r) for r in rows)
    if rs and any(len(r) != len(rs[0]) for r in rs):
        raise ValueError("matrix rows must have equal length")
    return rs


def zeros(n: int) -> Vec:
    return (_ZERO,) * n


def dot(u: Vec, v: Vec) -> Fraction:
    if len(u) != len(v):
        raise ValueError("dimension mismatch in dot product")
    return sum((a * b for a, b in zip(u, v)), _ZERO)


def vec_add(u: Vec, v: Vec) -> Vec:
    return tuple(a + b for a, b in zip(u, v))


def vec_sub(u: Vec, v: Vec) -> Vec:
    return tuple(a - b for a, b in zip(u, v))


def vec_scale(c: Fraction, u: Vec) -> Vec:
    return tuple(c * a for a in u)


def mat_vec(m: Matrix, v: Vec) -> Vec:
    return tuple(dot(row, v) for row in m)


def transpose(m: Matrix) -> Matrix:
    if not m:
        return ()
    return tuple(zip(*m))


def normalize_vec(v: Vec) -> Vec:
    """Scale ``v`` to coprime integer entries with positive first nonzero entry.

    The zero vector is returned unchanged. The result spans the same line as
    ``v``, which makes "equal up to scaling" checks structural.
    """
    denom_lcm = 1
    for e in v:
        denom_lcm = denom_lcm * e.denominator // gcd(denom_lcm, e.denominator)
    ints = [int(e * denom_lcm) for e in v]
    g = 0
    for a in ints:
        g = gcd(g, abs(a))
    if g == 0:
        return v
    lead = next(a for a in ints if a != 0)
    sign = 1 if lead > 0 else -1
    return tuple(Fraction(sign * a, g) for a in ints)


def rref(m: Matrix) -> tuple[Matrix, tuple[int, ...]]:
    """Reduced row echelon form of ``m`` and its pivot columns.

    Returns:
        A pair ``(r, pivots)`` where ``r`` is the RREF of ``m`` and ``pivots``
        is the strictly increasing tuple of pivot column indices.
    """
    rows = [list(r) for r in m]
    nrows = len(rows)
    ncols = len(rows[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot_row = next((i for i in range(r, nrows) if rows[i][c] != 0), None)
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        inv = rows[r][c]
        rows[r] = [e / inv for e in rows[r]]
        for i in range(nrows):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [e - f * p for e, p in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return tuple(tuple(row) for row in rows), tuple(pivots)


def rank(m: Matrix) -> int:
    return len(rref(m)[1])


@dataclass(frozen=True)
class Subspace:
    """A linear subspace of Q^n given by a canonical basis.

    ``basis`` is a tuple of linearly independent vectors; the empty tuple
    denotes the zero space. Instances built through :meth:`from_spanning` are
    canonical, so two equal subspaces are equal as values.
    """

    ambient_dim: int
    basis: tuple[Vec, ...]

    @staticmethod
    def zero(ambient_dim: int) -> "Subspace":
        return Subspace(ambient_dim, ())

    @staticmethod
    def full(ambient_dim: int) -> "Subspace":
        eye = tuple(
            tuple(_ONE if i == j else _ZERO for j in range(ambient_dim))
            for i in range(ambient_dim)
        )
        return Subspace(ambient_dim, eye)

    @staticmethod
    def from_spanning(ambient_dim: int, vectors: Sequence[Vec]) -> "Subspace":
        """Canonical subspace spanned by ``vectors`` (dependencies dropped)."""
        vecs = [v for v in vectors if any(e != 0 for e in v)]
        if not vecs:
            return Subspace.zero(ambient_dim)
        if any(len(v) != ambient_dim for v in vecs):
            raise ValueError("spanning vector has wrong dimension")
        reduced, pivots = rref(tuple(vecs))
        basis = tuple(normalize_vec(reduced[i]) for i in range(len(pivots)))
        return Subspace(ambient_dim, basis)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, v: Vec) -> bool:
        """Exact span membership test."""
        if len(v) != self.ambient_dim:
            raise ValueError("dimension mismatch in containment test")
        # Reduce v against the RREF basis; membership iff the residual is zero.
        residual = list(v)
        for b in self.basis:
            lead = next((i for i, e in enumerate(b) if e != 0), None)
            if lead is None:
                continue
            coef = residual[lead] / b[lead]
            if coef != 0:
                for i in range(self.ambient_dim):
                    residual[i] -= coef * b[i]
        return all(e == 0 for e in residual)

    def sum(self, other: "Subspace") -> "Subspace":
        self._check(other)
        return Subspace.from_spanning(self.ambient_dim, self.basis + other.basis)


def spans_equal(u: Subspace, v: Subspace) -> bool:
    if u.ambient_dim != v.ambient_dim:
        raise ValueError("dimension mismatch in span comparison")
    return Subspace.from_spanning(u.ambient_dim, u.basis).basis == Subspace.from_spanning(
        v.ambient_dim, v.basis
    ).basis


def member(u: Subspace, v: Vec) -> bool:
    return u.contains(v)


def _check_pair(u: Subspace, v: Subspace) -> None:
    if u.ambient_dim != v.ambient_dim:
        raise ValueError("subspaces live in different ambient spaces")


# Subspace._check used internally by sum().
Subspace._check = _check_pair  # type: ignore[attr-defined]


def kernel_basis(m: Matrix, ncols: int | None = None) -> Subspace:
    """Kernel of ``m`` as a subspace of Q^ncols.

    Basis vectors are produced in free-column order of the RREF (one vector
    per free column) and then normalized, giving a deterministic result.
    """
    if ncols is None:
        if not m:
            raise ValueError("cannot infer column count of an empty matrix")
        ncols = len(m[0])
    if not m:
        return Subspace.full(ncols)
    reduced, pivots = rref(m)
    pivot_set = set(pivots)
    free_cols = [c for c in range(ncols) if c not in pivot_set]
    basis = []
    for fc in free_cols:
        v = [_ZERO] * ncols
        v[fc] = _ONE
        for row_idx, pc in enumerate(pivots):
            v[pc] = -reduced[row_idx][fc]
        basis.append(normalize_vec(tuple(v)))
    return Subspace(ncols, tuple(basis))


@dataclass(frozen=True)
class AffineSpace:
    """An affine solution set ``offset + direction``."""

    offset: Vec
    direction: Subspace

    def __post_init__(self) -> None:
        if len(self.offset) != self.direction.ambient_dim:
            raise ValueError("offset length must match ambient dimension")

    def contains(self, v: Vec) -> bool:
        return self.direction.contains(vec_sub(v, self.offset))


def solve_equalities(
    equations: Sequence[tuple[Vec, Fraction]], nvars: int | None = None
) -> AffineSpace | None:
    """Exact solution set of a linear system ``coeffs . x = rhs``.

    Returns:
        The affine solution space, or ``None`` when the system is infeasible.
    """
    if nvars is None:
        if not equations:
            raise ValueError("cannot infer variable count of an empty system")
        nvars = len(equations[0][0])
    if any(len(c) != nvars for c, _ in equations):
        raise ValueError("coefficient vectors must share one length")
    if not equations:
        return AffineSpace(zeros(nvars), Subspace.full(nvars))
    augmented = tuple(c + (rhs,) for c, rhs in equations)
    reduced, pivots = rref(augmented)
    if any(p == nvars for p in pivots):
        return None  # a row reduced to 0 = 1
    offset = [_ZERO] * nvars
    for row_idx, pc in enumerate(pivots):
        offset[pc] = reduced[row_idx][nvars]
    direction = kernel_basis(tuple(c for c, _ in equations), nvars)
    return AffineSpace(tuple(offset), direction)


def intersect(u: Subspace, v: Subspace) -> Subspace:
    """Intersection of two subspaces via the Zassenhaus block construction.

    Row-reducing ``[U U; V 0]`` leaves the intersection basis in the right
    half of the rows whose left half vanished.
    """
    _check_pair(u, v)
    n = u.ambient_dim
    if not u.basis or not v.basis:
        return Subspace.zero(n)
    block = [b + b for b in u.basis] + [b + zeros(n) for b in v.basis]
    reduced, _pivots = rref(tuple(block))
    out = []
    for row in reduced:
        left, right = row[:n], row[n:]
        if all(e == 0 for e in left) and any(e != 0 for e in right):
            out.append(right)
    return Subspace.from_spanning(n, out)


def orth_complement(u: Subspace) -> Subspace:
    """Orthogonal complement of ``u`` in its ambient space."""
    if not u.basis:
        return Subspace.full(u.ambient_dim)
    return kernel_basis(u.basis, u.ambient_dim)


def project_vec(indices: Sequence[int], v: Vec) -> Vec:
    """Restrict ``v`` to the given coordinate positions, order preserved."""
    if any(i < 0 or i >= len(v) for i in indices):
        raise ValueError("projection index out of range")
    return tuple(v[i] for i in indices)


def project_subspace(indices: Sequence[int], u: Subspace) -> Subspace:
    """Image of ``u`` under the coordinate projection onto ``indices``."""
    if any(i < 0 or i >= u.ambient_dim for i in indices):
        raise ValueError("projection index out of range")
    return Subspace.from_spanning(len(indices), [project_vec(indices, b) for b in u.basis])
