"""Shared fixtures: graphs, random tame functions, random complexes.

Randomized tests use a seeded random.Random so every run sees the same
instances; hypothesis strategies are built per-file where they are used.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import pytest

from conedensity import (
    Bar, Barcode, Generator, GraphPoint, MetricGraph, TwistedComplex,
    constant, distance_cone,
)
from conedensity import gf2  # type: ignore[attr-defined]
from conedensity.rat import INF

F = Fraction
V = GraphPoint.V


def path_graph(n: int, length=F(1)) -> MetricGraph:
    names = tuple(f"v{i}" for i in range(n + 1))
    edges = tuple((f"v{i}", f"v{i+1}", F(length)) for i in range(n))
    return MetricGraph(names, edges)


def cycle_graph(n: int, length=F(1)) -> MetricGraph:
    names = tuple(f"v{i}" for i in range(n))
    edges = tuple((f"v{i}", f"v{(i+1) % n}", F(length)) for i in range(n))
    return MetricGraph(names, edges)


POINT = MetricGraph(("pt",), ())


@pytest.fixture
def p2() -> MetricGraph:
    return path_graph(2)


@pytest.fixture
def c6() -> MetricGraph:
    return cycle_graph(6)


def rational(rng: random.Random, lo=0, hi=8, den=4) -> Fraction:
    return F(rng.randint(lo * den, hi * den), den)


def random_point_on(rng: random.Random, g: MetricGraph) -> GraphPoint:
    if g.edges and rng.random() < 0.5:
        e = rng.randrange(len(g.edges))
        L = g.edges[e][2]
        return g.point(e, L * rng.randint(0, 4) / 4)
    return V(rng.choice(g.vertices))


# ----------------------------------------------------------------------
# random point-base complexes (single-vertex graph): levels + degrees +
# a differential conjugated from a random matching, so d^2 = 0 by design
# ----------------------------------------------------------------------


def random_point_complex(rng: random.Random, max_gens: int = 12,
                         levels=range(0, 9), degrees=(0, 1, 2)) -> TwistedComplex:
    n = rng.randint(1, max_gens)
    lv = [F(rng.choice(list(levels))) for _ in range(n)]
    dg = [rng.choice(degrees) for _ in range(n)]
    # random partial matching: birth j -> death i needs deg_i = deg_j + 1
    # and level_i > level_j (a zero-length pair is not a complex generator
    # pairing we want to plant; equal levels make ghost pairs, also fine)
    cols = [0] * n
    used = set()
    idx = list(range(n))
    rng.shuffle(idx)
    for j in idx:
        if j in used or rng.random() < 0.4:
            continue
        deaths = [i for i in idx
                  if i not in used and i != j
                  and dg[i] == dg[j] + 1 and lv[i] >= lv[j]]
        if not deaths:
            continue
        i = rng.choice(deaths)
        cols[j] = 1 << i
        used.add(i)
        used.add(j)
    # conjugate by a random legal change of basis, unitriangular under the
    # (level, index) order so it is always invertible
    psi = []
    for j in range(n):
        col = 1 << j
        for i in range(n):
            if (i != j and dg[i] == dg[j] and (lv[i], i) > (lv[j], j)
                    and rng.random() < 0.2):
                col |= 1 << i
        psi.append(col)
    cols = gf2.mat_mul(psi, gf2.mat_mul(cols, _invert(psi)))
    gens = tuple(Generator(constant(POINT, lv[k]), dg[k]) for k in range(n))
    cx = TwistedComplex(POINT, gens, tuple(cols))
    cx.validate()
    return cx


def _invert(cols: Sequence[int]) -> List[int]:
    n = len(cols)
    a = list(cols)
    inv = [1 << j for j in range(n)]
    for j in range(n):
        pivot = None
        for r in range(j, n):
            if a[r] >> j & 1:
                pivot = r
                break
        assert pivot is not None
        a[j], a[pivot] = a[pivot], a[j]
        inv[j], inv[pivot] = inv[pivot], inv[j]
        for r in range(n):
            if r != j and a[r] >> j & 1:
                a[r] ^= a[j]
                inv[r] ^= inv[j]
    return inv


# ----------------------------------------------------------------------
# random cone complexes on a real graph; differential respects pointwise
# domination by keeping death - birth >= distance + slack
# ----------------------------------------------------------------------


def random_cone_complex(rng: random.Random, g: MetricGraph, max_gens: int = 4,
                        slack=F(0), degrees=(0, 1)) -> TwistedComplex:
    n = rng.randint(1, max_gens)
    pts = [random_point_on(rng, g) for _ in range(n)]
    lv = [rational(rng, 0, 4) for _ in range(n)]
    dg = [rng.choice(degrees) for _ in range(n)]
    cols = [0] * n
    used = set()
    for j in range(n):
        if j in used or rng.random() < 0.5:
            continue
        targets = [i for i in range(n)
                   if i not in used and i != j and dg[i] == dg[j] + 1
                   and lv[i] - lv[j] >= g.distance(pts[j], pts[i]) + slack]
        if targets:
            i = rng.choice(targets)
            cols[j] = 1 << i
            used.add(i)
            used.add(j)
    gens = tuple(Generator(distance_cone(g, pts[k], base=lv[k]), dg[k])
                 for k in range(n))
    cx = TwistedComplex(g, gens, tuple(cols))
    cx.validate()
    return cx


def random_barcode(rng: random.Random, max_bars=10) -> Barcode:
    bars = []
    for _ in range(rng.randint(0, max_bars)):
        d = rng.choice((0, 1, 2))
        birth = F(rng.randint(0, 16), 2)
        if rng.random() < 0.4:
            death = INF
        else:
            death = birth + F(rng.randint(1, 8), 2)
        bars.append(Bar(d, birth, death))
    return Barcode.make(bars)
