"""GF(2) linear algebra on int bitmask rows."""

from __future__ import annotations

from typing import List, Sequence, Tuple

__all__ = ["rank", "row_reduce", "kernel_basis", "reduce_mod", "in_rowspace"]


def row_reduce(rows: Sequence[int]) -> List[int]:
    """Independent rows in reduced echelon form (each pivot in one row only)."""
    basis: List[int] = []
    for r in rows:
        for b in basis:
            r = min(r, r ^ b)
        if r:
            p = 1 << (r.bit_length() - 1)
            basis = [b ^ r if b & p else b for b in basis]
            basis.append(r)
            basis.sort(reverse=True)
    return basis


def rank(rows: Sequence[int]) -> int:
    return len(row_reduce(rows))


def reduce_mod(v: int, basis: Sequence[int]) -> int:
    """Reduce v modulo a row_reduce basis (coset representative)."""
    for b in basis:
        v = min(v, v ^ b)
    return v


def in_rowspace(v: int, basis: Sequence[int]) -> bool:
    return reduce_mod(v, basis) == 0


def kernel_basis(rows: Sequence[int], width: int) -> List[int]:
    """Basis of {v : parity(v & r) = 0 for all r}, vectors of `width` bits.

    Gaussian elimination on the transposed system via column tracking.
    """
    # Augment each candidate unit vector with bookkeeping of combinations.
    # Work with rows as equations: solve A v = 0.
    eqs = row_reduce(rows)
    pivots = []
    for e in eqs:
        pivots.append(e.bit_length() - 1)
    pivot_set = set(pivots)
    free = [i for i in range(width) if i not in pivot_set]
    out = []
    for f in free:
        v = 1 << f
        # Back-substitute: choose pivot values so every equation has even parity.
        for e, p in sorted(zip(eqs, pivots), key=lambda t: t[1]):
            if bin(v & e).count("1") % 2:
                v ^= 1 << p
        out.append(v)
    return out
