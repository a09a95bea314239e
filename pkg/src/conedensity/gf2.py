"""GF(2) linear algebra on int bitmasks.

A vector over GF(2) is a Python int (bit k = coordinate k); a linear map is a
list of column masks.  Everything is exact and allocation-light, which matters
because certificate searches solve many small systems.
"""

from __future__ import annotations

import bisect
from typing import Iterable, Iterator, List, Optional, Tuple


def bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def apply_cols(cols: List[int], vec: int) -> int:
    out = 0
    for j in bits(vec):
        out ^= cols[j]
    return out


def mat_mul(outer: List[int], inner: List[int]) -> List[int]:
    """Columns of outer∘inner (inner applied first)."""
    return [apply_cols(outer, c) for c in inner]


def mat_add(a: List[int], b: List[int]) -> List[int]:
    return [x ^ y for x, y in zip(a, b)]


def identity_cols(n: int) -> List[int]:
    return [1 << j for j in range(n)]


def transpose(cols: List[int], nrows: int) -> List[int]:
    rows = [0] * nrows
    for j, c in enumerate(cols):
        for i in bits(c):
            rows[i] |= 1 << j
    return rows


class Span:
    """Row-echelon span of GF(2) vectors, supporting membership and growth."""

    def __init__(self, vecs: Iterable[int] = ()):
        self.pivots = {}  # leading-bit -> vector
        self._order: List[int] = []  # pivot bits, descending
        for v in vecs:
            self.add(v)

    def residue(self, v: int) -> int:
        """Canonical representative of v modulo the span.

        Fully reduced (no pivot bit remains), so the map is linear:
        residue(x ^ y) == residue(x) ^ residue(y).
        """
        for lead in reversed(self._order):
            if (v >> lead) & 1:
                v ^= self.pivots[lead]
        return v

    def contains(self, v: int) -> bool:
        return self.residue(v) == 0

    def add(self, v: int) -> bool:
        v = self.residue(v)
        if v == 0:
            return False
        lead = v.bit_length() - 1
        self.pivots[lead] = v
        bisect.insort(self._order, lead)
        return True

    def dim(self) -> int:
        return len(self.pivots)


def solve(cols: List[int], target: int) -> Optional[int]:
    """A coefficient mask x with XOR of cols[j] over bits(x) == target, or None."""
    piv = {}  # leading bit -> (reduced column, combination mask)
    for j, c in enumerate(cols):
        cur, combo = c, 1 << j
        while cur:
            lead = cur.bit_length() - 1
            if lead in piv:
                pc, pm = piv[lead]
                cur ^= pc
                combo ^= pm
            else:
                piv[lead] = (cur, combo)
                break
    cur, combo = target, 0
    while cur:
        lead = cur.bit_length() - 1
        if lead not in piv:
            return None
        pc, pm = piv[lead]
        cur ^= pc
        combo ^= pm
    return combo


def nullspace(cols: List[int]) -> List[int]:
    """Basis of {x : sum of cols over bits(x) = 0}."""
    piv = {}
    out: List[int] = []
    for j, c in enumerate(cols):
        cur, combo = c, 1 << j
        while cur:
            lead = cur.bit_length() - 1
            if lead in piv:
                pc, pm = piv[lead]
                cur ^= pc
                combo ^= pm
            else:
                piv[lead] = (cur, combo)
                break
        if cur == 0:
            out.append(combo)
    return out


def rank(cols: List[int]) -> int:
    sp = Span()
    for c in cols:
        sp.add(c)
    return sp.dim()


def solve_affine(cols: List[int], target: int) -> Optional[Tuple[int, List[int]]]:
    """All solutions of the linear system, as (particular, kernel basis)."""
    x0 = solve(cols, target)
    if x0 is None:
        return None
    return x0, nullspace(cols)
