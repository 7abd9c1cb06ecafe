"""Variable decomposability of quantifier-free linear real arithmetic.

Decides whether a formula is equivalent to a Boolean combination of atoms
confined to single blocks of a variable partition, synthesizes such
decompositions and best-possible approximations, and emits and checks
polynomial-size certificates of non-decomposability. All arithmetic is
exact over the rationals; there is no external solver.
"""

from .cover import CoverConfig, Covering, cover, compute_D, decsimple, enforce_deps
from .certificates import LambdaProof, VerifyResult, compress, find_witness, open_cube, verify
from .formula import (
    EQ,
    GT,
    LT,
    Formula,
    LinearPredicate,
    Partition,
    PredicateSet,
    atom,
    canonicalize,
    conj,
    disj,
    negate,
)
from .partitions import binary_reduction, meet, refines
from .vardec import (
    DecideResult,
    Decomposition,
    NonDecWitness,
    approx,
    check_decomposition,
    decide,
    independent,
    mondec,
)

__all__ = [
    "CoverConfig",
    "Covering",
    "DecideResult",
    "Decomposition",
    "EQ",
    "Formula",
    "GT",
    "LT",
    "LambdaProof",
    "LinearPredicate",
    "NonDecWitness",
    "Partition",
    "PredicateSet",
    "VerifyResult",
    "approx",
    "atom",
    "binary_reduction",
    "canonicalize",
    "check_decomposition",
    "compress",
    "compute_D",
    "conj",
    "cover",
    "decide",
    "decsimple",
    "disj",
    "enforce_deps",
    "find_witness",
    "independent",
    "meet",
    "mondec",
    "negate",
    "open_cube",
    "refines",
    "verify",
]

__version__ = "0.1.0"
