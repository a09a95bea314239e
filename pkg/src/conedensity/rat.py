"""Exact scalar values: rationals plus a +infinity sentinel.

All levels, lengths and shifts in this package are `Fraction`s; the only
non-rational value we ever need is +inf (open cover radius, infinite bar
endpoints, "no constraint").  We reuse ``math.inf`` as the sentinel and keep
a handful of inf-safe helpers here so the rest of the code never has to
special-case it inline.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

Val = Union[Fraction, float]  # Fraction, or math.inf / -math.inf

INF = math.inf
NEG_INF = -math.inf


def is_inf(x: Val) -> bool:
    return x == INF


def is_neg_inf(x: Val) -> bool:
    return x == NEG_INF


def is_finite(x: Val) -> bool:
    return not (x == INF or x == NEG_INF)


def q(s) -> Val:
    """Parse a scalar: 'p/q' or integer string or Fraction/int passthrough; 'inf' allowed."""
    if isinstance(s, Fraction):
        return s
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, float):
        if s == INF:
            return INF
        if s == NEG_INF:
            return NEG_INF
        # floats are banned as data; accept only exact integral values
        if s != int(s):
            raise ValueError(f"refusing inexact float {s!r}; pass a Fraction or 'p/q' string")
        return Fraction(int(s))
    t = str(s).strip()
    if t in ("inf", "+inf", "Infinity"):
        return INF
    if t in ("-inf", "-Infinity"):
        return NEG_INF
    return Fraction(t)


def fmt(x: Val) -> str:
    """Format a scalar as 'p/q' (or 'p'), 'inf', '-inf'.  Inverse of q()."""
    if x == INF:
        return "inf"
    if x == NEG_INF:
        return "-inf"
    f = Fraction(x)
    return str(f)


def add(x: Val, y: Val) -> Val:
    """inf-absorbing addition (inf + finite = inf; inf + inf = inf).

    -inf never meets +inf in this codebase; raise if it does.
    """
    if x == INF or y == INF:
        if x == NEG_INF or y == NEG_INF:
            raise ArithmeticError("inf + -inf")
        return INF
    if x == NEG_INF or y == NEG_INF:
        return NEG_INF
    return x + y


def sub(x: Val, y: Val) -> Val:
    """x - y with the conventions used by sup-difference bookkeeping:

    finite - inf = -inf,   inf - finite = inf,   inf - inf -> error.
    """
    if x == INF:
        if y == INF:
            raise ArithmeticError("inf - inf")
        return INF
    if y == INF:
        return NEG_INF
    if x == NEG_INF or y == NEG_INF:
        raise ArithmeticError("unexpected -inf operand")
    return x - y


def vmin(*xs: Val) -> Val:
    return min(xs)


def vmax(*xs: Val) -> Val:
    return max(xs)
