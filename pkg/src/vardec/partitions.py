"""Partition lattice operations and the reduction to binary partitions.

Deciding decomposability against a partition with ``k`` blocks reduces to
deciding it against ``ceil(log2 k)`` binary partitions whose meet is the
original partition: assign every block an index, and for each bit position
split the blocks by the value of that bit. Decomposability with respect to
all of the binary partitions is equivalent to decomposability with respect
to their meet.
"""

from __future__ import annotations

from math import ceil, log2

from .formula import Partition


def meet(p1: Partition, p2: Partition) -> Partition:
    """The partition whose blocks are the nonempty pairwise intersections."""
    if p1.universe != p2.universe:
        raise ValueError("partitions must share one universe")
    blocks = []
    for a in p1.blocks:
        for b in p2.blocks:
            common = set(a) & set(b)
            if common:
                blocks.append(common)
    return Partition.of(blocks)


def refines(p1: Partition, p2: Partition) -> bool:
    """True iff every block of ``p1`` is contained in some block of ``p2``."""
    if p1.universe != p2.universe:
        raise ValueError("partitions must share one universe")
    return all(any(set(a) <= set(b) for b in p2.blocks) for a in p1.blocks)


def binary_reduction(partition: Partition) -> list[Partition]:
    """Binary partitions whose meet is ``partition``.

    Blocks are ordered by their smallest variable and indexed in binary with
    ``m = ceil(log2 k)`` bits; the i-th output partition splits the universe
    by the i-th most significant bit. The result has exactly ``m`` elements,
    each refined by the input, and their meet equals the input.

    Raises:
        ValueError: for a unary partition, which admits no binary split.
    """
    k = len(partition.blocks)
    if k < 2:
        raise ValueError("binary reduction requires a non-unary partition")
    m = ceil(log2(k))
    out = []
    for bit in range(m):
        shift = m - 1 - bit
        zeros = [v for idx, b in enumerate(partition.blocks) if not (idx >> shift) & 1 for v in b]
        ones = [v for idx, b in enumerate(partition.blocks) if (idx >> shift) & 1 for v in b]
        out.append(Partition.of([zeros, ones]))
    return out
