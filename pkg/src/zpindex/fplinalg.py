"""Sparse linear algebra over the prime field F_p.

Matrices are given column-wise as dicts {row_index: coefficient}. Rank is
computed by left-to-right column reduction on the lowest nonzero row
(persistence-style), which is deterministic for a fixed column order.
"""

from __future__ import annotations


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def fp_rank(columns: list[dict[int, int]], p: int) -> int:
    """Rank over F_p of the matrix whose columns are the given dicts."""
    pivots: dict[int, dict[int, int]] = {}
    rank = 0
    for col in columns:
        work = {r: c % p for r, c in col.items() if c % p != 0}
        while work:
            low = max(work)
            pivot = pivots.get(low)
            if pivot is None:
                pivots[low] = work
                rank += 1
                break
            factor = (work[low] * pow(pivot[low], p - 2, p)) % p
            for r, c in pivot.items():
                v = (work.get(r, 0) - factor * c) % p
                if v:
                    work[r] = v
                elif r in work:
                    del work[r]
    return rank


def betti_numbers(boundary_columns: list[list[dict[int, int]]], p: int) -> list[int]:
    """Betti numbers over F_p of a chain complex.

    boundary_columns[k] holds the columns of the boundary operator
    C_k -> C_{k-1}; boundary_columns[0] must be the columns of the zero map
    (empty dicts), one per 0-chain generator, so chain ranks can be read off.
    """
    dims = [len(cols) for cols in boundary_columns]
    ranks = [fp_rank(cols, p) for cols in boundary_columns]
    ranks.append(0)  # no boundaries coming from above the top degree
    betti = []
    for k in range(len(dims)):
        betti.append(dims[k] - ranks[k] - ranks[k + 1])
    return betti
