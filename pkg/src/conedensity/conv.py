"""Cone smoothing of tame functions: radius-limited inf-convolution and the
Lipschitz lower envelope.

`inf_convolution(f, radius, slope)` computes, exactly,

    t  |->  inf { f(y) + slope * d(t, y)  :  d(t, y) <= radius }

on the whole graph.  `lipschitz_envelope` is the radius = inf case, i.e. the
largest `slope`-Lipschitz minorant of f.

Method.  First refine the graph at f's interior breaks so f is a single affine
(or +inf) gap on every refined edge, with point values at refined vertices.
For a target point t on a refined edge, every competitor y is reached either
directly along the same edge or through one of the edge's endpoints, and for y
interior to a gap the objective is concave in y's offset, so the infimum is
attained at gap ends (dominated by the endpoint-value candidates, by lower
semicontinuity) or where the path length saturates the radius.  That leaves
three finite families of affine candidate pieces per output edge:

  * identity: f's own gap piece (y = t),
  * vertex cones: f(z) + slope * (routed distance to z), clipped to the radius,
  * horizon pieces: full-budget targets inside a gap, value + slope * radius,

and their pointwise minimum (an epigraph union, so `from_pieces` applies) is
the exact result.  Radius horizons generically create downward jumps, which is
why tame functions carry spike values in the first place.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .graph import GraphPoint, MetricGraph, subdivide_at
from .rat import INF, Val
from .tame import Piece, TameFunction, TameError


class EmptySheafError(TameError):
    """The function is +inf everywhere: it has no Lipschitz minorant."""


class NonLipschitzError(TameError):
    """An operation restricted to the Lipschitz class met a function outside it."""


def is_lipschitz(f: TameFunction, slope) -> bool:
    """Finite, continuous, and |gap slope| <= slope on every edge."""
    r = Fraction(slope)
    if not f.is_finite_everywhere() or not f.is_continuous():
        return False
    for e, pr in enumerate(f.profiles):
        L = f.graph.edge_length(e)
        for k, gap in enumerate(pr.gaps):
            lo, hi = pr.gap_span(k, L)
            if abs(gap[1] - gap[0]) > r * (hi - lo):
                return False
    return True


def inf_convolution(f: TameFunction, radius, slope=1) -> TameFunction:
    r = Fraction(slope)
    if r < 0:
        raise TameError("slope must be >= 0")
    s: Val = INF if radius == INF else Fraction(radius)
    if s != INF and s < 0:
        raise TameError("radius must be >= 0")
    if s == 0:
        return f

    g = f.graph
    cuts = [tuple(x for x, _ in pr.breaks) for pr in f.profiles]
    sub = subdivide_at(g, cuts)
    ff = f.on_subdivision(sub)
    gf = sub.graph
    dv = gf.vertex_distances()

    # per refined edge: its single gap (or None) with limits, as (z1, z2, Lg, lim1, lim2)
    gap_edges: List[Optional[Tuple[str, str, Fraction, Fraction, Fraction]]] = []
    for e2, (z1, z2, Lg) in enumerate(gf.edges):
        pr = ff.profiles[e2]
        assert not pr.breaks, "refinement at breaks failed"
        gap = pr.gaps[0]
        gap_edges.append(None if gap is None else (z1, z2, Lg, gap[0], gap[1]))

    fin_vertices = [
        (name, val) for name, val in zip(gf.vertices, ff.vertex_values) if val != INF
    ]

    identity_pieces = ff.pieces()
    pieces_out: List[List[Piece]] = []
    for e2, (u, w, L) in enumerate(gf.edges):
        ps: List[Piece] = list(identity_pieces[e2])  # identity candidates
        du, dw = dv[u], dv[w]
        for z, fz in fin_vertices:
            # routed through u: value fz + r*(t + d(u,z)) on t <= s - d(u,z)
            if du[z] != INF:
                hi = L if s == INF else min(L, s - du[z])
                if hi >= 0:
                    ps.append((Fraction(0), hi, fz + r * du[z], fz + r * (du[z] + hi)))
            if dw[z] != INF:
                lo = Fraction(0) if s == INF else max(Fraction(0), L - (s - dw[z]))
                if lo <= L:
                    ps.append((lo, L, fz + r * (L - lo + dw[z]), fz + r * dw[z]))
        if s != INF:
            ps.extend(_horizon_pieces(gf, gap_edges, e2, s, r))
        pieces_out.append(ps)

    overrides: Dict[str, Val] = {}
    for name in gf.vertices:
        best: Val = ff.vertex_value(name)
        dn = dv[name]
        for z, fz in fin_vertices:
            if dn[z] != INF and (s == INF or dn[z] <= s):
                cand = fz + r * dn[z]
                if cand < best:
                    best = cand
        if s != INF:
            for ge in gap_edges:
                if ge is None:
                    continue
                z1, z2, Lg, lim1, lim2 = ge
                for zz, near, far in ((z1, lim1, lim2), (z2, lim2, lim1)):
                    if dn[zz] == INF:
                        continue
                    tau = s - dn[zz]
                    if 0 <= tau <= Lg:
                        cand = near + (far - near) * tau / Lg + r * s
                        if cand < best:
                            best = cand
        overrides[name] = best

    out_fine = TameFunction.from_pieces(gf, pieces_out, overrides)
    return TameFunction.from_subdivision(sub, out_fine)


def _horizon_pieces(gf: MetricGraph, gap_edges, e2: int, s: Fraction, r: Fraction) -> List[Piece]:
    """Full-budget candidates: y sits inside a gap at exactly distance s along
    a fixed routing, contributing gap_value(y) + r*s."""
    u, w, L = gf.edges[e2]
    dv = gf.vertex_distances()
    out: List[Piece] = []
    for eg, ge in enumerate(gap_edges):
        if ge is None:
            continue
        z1, z2, Lg, lim1, lim2 = ge

        def val(tau: Fraction) -> Fraction:
            return lim1 + (lim2 - lim1) * tau / Lg

        # same-edge direct: y = t -+ s
        if eg == e2:
            for sign in (1, -1):
                # y = t - sign*s must lie in [0, Lg]; t in [sign*s, Lg + sign*s]
                lo = max(Fraction(0), sign * s)
                hi = min(L, Lg + sign * s)
                if lo <= hi:
                    out.append((lo, hi, val(lo - sign * s) + r * s, val(hi - sign * s) + r * s))
        # routed: t -> (u or w) -> (z1 or z2) -> y; arc tau measured from z1
        for end in ("u", "w"):
            base = u if end == "u" else w
            for zz, into in ((z1, 1), (z2, -1)):
                dz = dv[base][zz]
                if dz == INF:
                    continue
                # path length = t_of(t) + dz + arc; arc = s - t_of(t) - dz in [0, Lg]
                # t_of(t) in [s - dz - Lg, s - dz]
                lo_t, hi_t = s - dz - Lg, s - dz
                if end == "u":
                    lo, hi = max(Fraction(0), lo_t), min(L, hi_t)
                else:
                    lo, hi = max(Fraction(0), L - hi_t), min(L, L - lo_t)
                if lo > hi:
                    continue

                def y_val(t: Fraction) -> Fraction:
                    arc = s - (t if end == "u" else L - t) - dz
                    tau = arc if into == 1 else Lg - arc
                    return val(tau) + r * s

                out.append((lo, hi, y_val(lo), y_val(hi)))
    return out


def lipschitz_envelope(f: TameFunction, slope=1) -> TameFunction:
    """Largest slope-Lipschitz function below f (pointwise -inf never occurs:
    values stay rational because the graph is compact)."""
    if all(v == INF for v in f.vertex_values) and all(
            not pr.breaks and all(g is None for g in pr.gaps) for pr in f.profiles):
        raise EmptySheafError("no Lipschitz minorant of an everywhere-infinite function")
    return inf_convolution(f, INF, slope)
