"""Quantifier-free linear real arithmetic: atoms, formulas and partitions.

An atom compares a linear term with a rational constant using one of the
three relations ``<``, ``=``, ``>``. Non-strict comparisons and disequality
are sugar handled at the formula level (``t <= c`` becomes ``not (t > c)``,
``t != c`` becomes ``t < c or t > c``), so conjunctions of atoms only ever
contain the three primitive relations.

Atoms are canonicalized on construction: coefficients are scaled to coprime
integers and the lexicographically first variable with a nonzero coefficient
gets a positive coefficient (flipping ``<``/``>`` when the scaling is
negative). Canonical equality is therefore structural equality, and two
syntactically different spellings of the same hyperplane share one "base".
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, Iterator, Mapping, Sequence

from .linalg import Vec

LT, EQ, GT = "<", "=", ">"
RELATIONS = (LT, EQ, GT)

_REL_FLIP = {LT: GT, EQ: EQ, GT: LT}

Model = dict[str, Fraction]


class NonlinearTermError(ValueError):
    """Raised when an input term is not linear with rational coefficients."""


_REL_ORDER = {LT: 0, EQ: 1, GT: 2}


class LinearPredicate:
    """A canonical atom ``sum(coeff_i * var_i) rel constant``.

    ``coeffs`` maps variables to (integer-valued) coefficients; zero entries
    are never stored. A predicate without variables is a constant sentinel
    and only appears transiently before formula-level simplification.

    Instances are immutable by convention; hash and ordering key are
    precomputed because predicates live in sets and sorted containers on
    every hot path.
    """

    __slots__ = ("coeffs", "constant", "rel", "_base", "_key", "_hash", "_rels")

    def __init__(
        self,
        coeffs: tuple[tuple[str, Fraction], ...],
        constant: Fraction,
        rel: str,
    ):
        if rel not in RELATIONS:
            raise ValueError(f"unknown relation {rel!r}")
        self.coeffs = tuple(coeffs)
        self.constant = constant
        self.rel = rel
        self._base = (self.coeffs, constant)
        self._key = (self.coeffs, constant, _REL_ORDER[rel])
        self._hash = hash(self._key)
        self._rels: dict[str, "LinearPredicate"] = {rel: self}

    def __eq__(self, other) -> bool:
        return (
            self is other
            or isinstance(other, LinearPredicate)
            and self._key == other._key
        )

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "LinearPredicate") -> bool:
        return self._key < other._key

    def __repr__(self) -> str:
        return f"LinearPredicate({self.coeffs!r}, {self.constant!r}, {self.rel!r})"

    @property
    def base(self):
        """The relation-free part (term, constant) identifying the hyperplane."""
        return self._base

    def with_rel(self, rel: str) -> "LinearPredicate":
        cached = self._rels.get(rel)
        if cached is None:
            cached = LinearPredicate(self.coeffs, self.constant, rel)
            self._rels[rel] = cached
        return cached

    def free_vars(self) -> frozenset[str]:
        return frozenset(v for v, _ in self.coeffs)

    def coeff_map(self) -> dict[str, Fraction]:
        return dict(self.coeffs)

    def coeff_vec(self, layout: Sequence[str]) -> Vec:
        cm = self.coeff_map()
        return tuple(cm.get(v, Fraction(0)) for v in layout)

    def evaluate(self, model: Mapping[str, Fraction]) -> bool:
        total = Fraction(0)
        for v, c in self.coeffs:
            if v not in model:
                raise KeyError(f"model does not assign variable {v!r}")
            total += c * model[v]
        if self.rel == LT:
            return total < self.constant
        if self.rel == GT:
            return total > self.constant
        return total == self.constant

    def is_trivial(self) -> bool:
        return not self.coeffs

    def __str__(self) -> str:
        if not self.coeffs:
            return f"0 {self.rel} {self.constant}"
        parts = []
        for v, c in self.coeffs:
            if c == 1:
                parts.append(v)
            elif c == -1:
                parts.append(f"-{v}")
            else:
                parts.append(f"{c}*{v}")
        return f"{' + '.join(parts)} {self.rel} {self.constant}".replace("+ -", "- ")


def canonicalize(
    coeffs: Mapping[str, Fraction | int], constant, rel: str
) -> LinearPredicate:
    """Build the canonical atom for ``sum(coeffs) rel constant``.

    Coefficients are cleared to coprime integers; if the scaling needed to
    make the first variable's coefficient positive is negative, the relation
    is flipped between ``<`` and ``>``.
    """
    const = Fraction(constant)
    items = sorted((v, Fraction(c)) for v, c in coeffs.items() if Fraction(c) != 0)
    if not items:
        return LinearPredicate((), const, rel)
    denom_lcm = 1
    for _, c in items:
        denom_lcm = denom_lcm * c.denominator // gcd(denom_lcm, c.denominator)
    nums = [int(c * denom_lcm) for _, c in items]
    g = 0
    for a in nums:
        g = gcd(g, abs(a))
    scale = Fraction(denom_lcm, g)
    if nums[0] < 0:
        scale = -scale
        rel = _REL_FLIP[rel]
    return LinearPredicate(
        tuple((v, c * scale) for (v, c) in items), const * scale, rel
    )


def substitute_symbol(p: LinearPredicate, rel: str) -> LinearPredicate:
    """The atom with the same term but relation ``rel``."""
    return p.with_rel(rel)


class PredicateSet:
    """A duplicate-free, canonically ordered set of atoms (a conjunction)."""

    __slots__ = ("_preds", "_set", "_hash")

    def __init__(self, preds: Iterable[LinearPredicate] = ()):
        seen = dict.fromkeys(preds)
        for p in seen:
            if p.is_trivial():
                raise ValueError("constant atoms do not belong in predicate sets")
        self._preds = tuple(sorted(seen, key=lambda p: p._key))
        self._set = frozenset(self._preds)
        self._hash = hash(self._preds)

    def __iter__(self) -> Iterator[LinearPredicate]:
        return iter(self._preds)

    def __len__(self) -> int:
        return len(self._preds)

    def __contains__(self, p: LinearPredicate) -> bool:
        return p in self._set

    def __eq__(self, other) -> bool:
        return isinstance(other, PredicateSet) and self._preds == other._preds

    def __hash__(self) -> int:
        return self._hash

    def __le__(self, other: "PredicateSet") -> bool:
        return set(self._preds) <= set(other._preds)

    def union(self, other: Iterable[LinearPredicate]) -> "PredicateSet":
        return PredicateSet(self._preds + tuple(other))

    def difference(self, other: Iterable[LinearPredicate]) -> "PredicateSet":
        drop = set(other)
        return PredicateSet(p for p in self._preds if p not in drop)

    def intersection(self, other: Iterable[LinearPredicate]) -> "PredicateSet":
        keep = set(other)
        return PredicateSet(p for p in self._preds if p in keep)

    def equalities(self) -> "PredicateSet":
        return PredicateSet(p for p in self._preds if p.rel == EQ)

    def stricts(self) -> "PredicateSet":
        return PredicateSet(p for p in self._preds if p.rel != EQ)

    def respecting(self, partition: "Partition") -> "PredicateSet":
        return PredicateSet(p for p in self._preds if respects(p, partition))

    def disrespecting(self, partition: "Partition") -> "PredicateSet":
        return PredicateSet(p for p in self._preds if not respects(p, partition))

    def free_vars(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for p in self._preds:
            out |= p.free_vars()
        return out

    def evaluate(self, model: Mapping[str, Fraction]) -> bool:
        return all(p.evaluate(model) for p in self._preds)

    def __str__(self) -> str:
        return "{" + ", ".join(str(p) for p in self._preds) + "}"

    __repr__ = __str__


EMPTY_SET = PredicateSet()


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------


class Formula:
    """Base class for quantifier-free formulas over canonical atoms."""

    def free_vars(self) -> frozenset[str]:
        raise NotImplementedError

    def atom_bases(self) -> list[LinearPredicate]:
        """The distinct atom bases of the formula, canonically sorted.

        Each base is returned as its ``=`` orientation; the three
        orientations of one base count as a single entry.
        """
        seen: dict = {}
        self._collect(seen)
        return sorted(seen.values())

    def _collect(self, acc: dict) -> None:
        raise NotImplementedError

    def evaluate(self, model: Mapping[str, Fraction]) -> bool:
        raise NotImplementedError

    def orientation_eval(self, assign: Mapping) -> bool | None:
        """Three-valued truth under a partial orientation of atom bases.

        ``assign`` maps atom bases to relations; an atom is true iff its
        base is assigned its own relation. Returns ``None`` when the
        orientation does not determine the truth value yet. On a full
        orientation the result is definite, which is what makes a single
        orientation classify against the formula without any model.
        """
        raise NotImplementedError


@dataclass(frozen=True)
class TrueFormula(Formula):
    def free_vars(self) -> frozenset[str]:
        return frozenset()

    def _collect(self, acc: dict) -> None:
        pass

    def evaluate(self, model) -> bool:
        return True

    def orientation_eval(self, assign) -> bool | None:
        return True

    def __str__(self) -> str:
        return "true"


@dataclass(frozen=True)
class FalseFormula(Formula):
    def free_vars(self) -> frozenset[str]:
        return frozenset()

    def _collect(self, acc: dict) -> None:
        pass

    def evaluate(self, model) -> bool:
        return False

    def orientation_eval(self, assign) -> bool | None:
        return False

    def __str__(self) -> str:
        return "false"


TRUE = TrueFormula()
FALSE = FalseFormula()


@dataclass(frozen=True)
class Atom(Formula):
    pred: LinearPredicate

    def free_vars(self) -> frozenset[str]:
        return self.pred.free_vars()

    def _collect(self, acc: dict) -> None:
        acc[self.pred.base] = self.pred.with_rel(EQ)

    def evaluate(self, model) -> bool:
        return self.pred.evaluate(model)

    def orientation_eval(self, assign) -> bool | None:
        rel = assign.get(self.pred.base)
        if rel is None:
            return None
        return rel == self.pred.rel

    def __str__(self) -> str:
        return f"({self.pred})"


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def free_vars(self) -> frozenset[str]:
        return self.arg.free_vars()

    def _collect(self, acc: dict) -> None:
        self.arg._collect(acc)

    def evaluate(self, model) -> bool:
        return not self.arg.evaluate(model)

    def orientation_eval(self, assign) -> bool | None:
        inner = self.arg.orientation_eval(assign)
        return None if inner is None else not inner

    def __str__(self) -> str:
        return f"(not {self.arg})"


@dataclass(frozen=True)
class And(Formula):
    args: tuple[Formula, ...]

    def free_vars(self) -> frozenset[str]:
        return frozenset().union(*(a.free_vars() for a in self.args)) if self.args else frozenset()

    def _collect(self, acc: dict) -> None:
        for a in self.args:
            a._collect(acc)

    def evaluate(self, model) -> bool:
        return all(a.evaluate(model) for a in self.args)

    def orientation_eval(self, assign) -> bool | None:
        undecided = False
        for a in self.args:
            v = a.orientation_eval(assign)
            if v is False:
                return False
            if v is None:
                undecided = True
        return None if undecided else True

    def __str__(self) -> str:
        return "(and " + " ".join(str(a) for a in self.args) + ")"


@dataclass(frozen=True)
class Or(Formula):
    args: tuple[Formula, ...]

    def free_vars(self) -> frozenset[str]:
        return frozenset().union(*(a.free_vars() for a in self.args)) if self.args else frozenset()

    def _collect(self, acc: dict) -> None:
        for a in self.args:
            a._collect(acc)

    def evaluate(self, model) -> bool:
        return any(a.evaluate(model) for a in self.args)

    def orientation_eval(self, assign) -> bool | None:
        undecided = False
        for a in self.args:
            v = a.orientation_eval(assign)
            if v is True:
                return True
            if v is None:
                undecided = True
        return None if undecided else False

    def __str__(self) -> str:
        return "(or " + " ".join(str(a) for a in self.args) + ")"


def atom(coeffs: Mapping[str, Fraction | int], rel: str, constant) -> Formula:
    """Atom constructor with constant folding for variable-free terms."""
    p = canonicalize(coeffs, constant, rel)
    if p.is_trivial():
        return TRUE if p.evaluate({}) else FALSE
    return Atom(p)


def negate(f: Formula) -> Formula:
    if isinstance(f, TrueFormula):
        return FALSE
    if isinstance(f, FalseFormula):
        return TRUE
    if isinstance(f, Not):
        return f.arg
    return Not(f)


def conj(args: Iterable[Formula]) -> Formula:
    flat: list[Formula] = []
    for a in args:
        if isinstance(a, FalseFormula):
            return FALSE
        if isinstance(a, TrueFormula):
            continue
        if isinstance(a, And):
            flat.extend(a.args)
        else:
            flat.append(a)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(args: Iterable[Formula]) -> Formula:
    flat: list[Formula] = []
    for a in args:
        if isinstance(a, TrueFormula):
            return TRUE
        if isinstance(a, FalseFormula):
            continue
        if isinstance(a, Or):
            flat.extend(a.args)
        else:
            flat.append(a)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def implies(a: Formula, b: Formula) -> Formula:
    return disj([negate(a), b])


def iff(a: Formula, b: Formula) -> Formula:
    return disj([conj([a, b]), conj([negate(a), negate(b)])])


def atom_le(coeffs, constant) -> Formula:
    return negate(atom(coeffs, GT, constant))


def atom_ge(coeffs, constant) -> Formula:
    return negate(atom(coeffs, LT, constant))


def atom_ne(coeffs, constant) -> Formula:
    return disj([atom(coeffs, LT, constant), atom(coeffs, GT, constant)])


def predicate_set_formula(preds: PredicateSet) -> Formula:
    return conj([Atom(p) for p in preds])


def dnf_formula(terms: Sequence[PredicateSet]) -> Formula:
    return disj([predicate_set_formula(t) for t in terms])


# ---------------------------------------------------------------------------
# Partitions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Partition:
    """Disjoint, nonempty variable blocks covering a universe.

    Blocks are stored sorted by their smallest variable and each block is
    internally sorted, so a partition is a canonical value.
    """

    blocks: tuple[tuple[str, ...], ...]
    _index: dict = field(default=None, compare=False, hash=False, repr=False)

    @staticmethod
    def of(blocks: Iterable[Iterable[str]]) -> "Partition":
        bs = [tuple(sorted(set(b))) for b in blocks]
        if any(not b for b in bs):
            raise ValueError("partition blocks must be nonempty")
        flat = [v for b in bs for v in b]
        if len(flat) != len(set(flat)):
            raise ValueError("partition blocks must be disjoint")
        return Partition(tuple(sorted(bs, key=lambda b: b[0])))

    @staticmethod
    def singletons(variables: Iterable[str]) -> "Partition":
        return Partition.of([[v] for v in set(variables)])

    def __post_init__(self):
        object.__setattr__(
            self, "_index", {v: i for i, b in enumerate(self.blocks) for v in b}
        )

    @property
    def universe(self) -> tuple[str, ...]:
        return tuple(sorted(self._index))

    def block_of(self, var: str) -> int:
        if var not in self._index:
            raise ValueError(f"variable {var!r} is not in the partition universe")
        return self._index[var]

    def is_binary(self) -> bool:
        return len(self.blocks) == 2

    def __len__(self) -> int:
        return len(self.blocks)

    def __str__(self) -> str:
        return "{" + ", ".join("{" + ", ".join(b) + "}" for b in self.blocks) + "}"


def respects(p: LinearPredicate, partition: Partition) -> bool:
    """True iff all free variables of ``p`` lie within one partition block."""
    fv = p.free_vars()
    if not fv:
        return True
    blocks = {partition.block_of(v) for v in fv}
    return len(blocks) == 1


def formula_respects(f: Formula, partition: Partition) -> bool:
    """Syntactic check that every atom of ``f`` respects the partition."""
    bases = f.atom_bases()
    return all(respects(p, partition) for p in bases)
