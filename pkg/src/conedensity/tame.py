"""Piecewise-affine lower-semicontinuous functions on a metric graph.

A TameFunction assigns an extended value (Fraction or +inf) to every point of a
metric graph, and is affine on finitely many intervals per edge.  We store, per
edge, the interior break offsets with their (finite) point values and, between
consecutive breaks, either None (the function is +inf on that open gap) or the
pair of one-sided limits at the gap's ends.  Vertex values are stored
separately.  Lower semicontinuity means every stored point value is <= the
adjacent gap limits; a value strictly below its limits is a genuine downward
spike (these show up naturally as radius horizons of limited inf-convolution,
so the representation has to carry them).

The workhorse constructor is `from_pieces`: the function whose epigraph is the
union of finitely many closed affine pieces per edge.  Unions of closed pieces
are automatically lower semicontinuous, so every operation built on it stays
inside the class, and the canonical form it produces makes equality a plain
structural comparison.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .graph import ClosedSubgraph, GraphPoint, MetricGraph, Subdivision
from .rat import INF, NEG_INF, Val

Gap = Optional[Tuple[Fraction, Fraction]]  # (limit at lower end, limit at upper end)
Piece = Tuple[Fraction, Fraction, Fraction, Fraction]  # (lo, hi, value_lo, value_hi)


class TameError(ValueError):
    pass


@dataclass(frozen=True)
class EdgeProfile:
    """Function data on a single edge, in the edge's own parametrization.

    breaks: ((offset, value), ...) with 0 < offsets < length, strictly
            increasing, values finite.
    gaps:   len(breaks)+1 entries; entry k describes the open interval between
            break k-1 and break k (padded with the edge ends).  None means +inf
            there; otherwise the pair of one-sided limits at the interval ends.
    """

    breaks: Tuple[Tuple[Fraction, Fraction], ...]
    gaps: Tuple[Gap, ...]

    def boundaries(self, length: Fraction) -> Tuple[Fraction, ...]:
        return (Fraction(0),) + tuple(x for x, _ in self.breaks) + (length,)

    def gap_span(self, k: int, length: Fraction) -> Tuple[Fraction, Fraction]:
        bs = self.boundaries(length)
        return bs[k], bs[k + 1]

    def value_inside(self, length: Fraction, t: Fraction) -> Val:
        """Value at an interior offset (0 < t < length)."""
        k = 0
        for x, v in self.breaks:
            if x == t:
                return v
            if x < t:
                k += 1
        gap = self.gaps[k]
        if gap is None:
            return INF
        lo, hi = self.gap_span(k, length)
        return _affine_at(lo, hi, gap[0], gap[1], t)

    def limit_into_gap(self, k: int, at_lower_end: bool) -> Val:
        gap = self.gaps[k]
        if gap is None:
            return INF
        return gap[0] if at_lower_end else gap[1]


ALL_INF_PROFILE = EdgeProfile(breaks=(), gaps=(None,))


def _affine_at(lo: Fraction, hi: Fraction, vlo: Fraction, vhi: Fraction, t: Fraction) -> Fraction:
    if hi == lo:
        return vlo
    return vlo + (vhi - vlo) * (t - lo) / (hi - lo)


def _check_same_graph(a: "TameFunction", b: "TameFunction") -> None:
    if a.graph != b.graph:
        raise TameError("functions live on different graphs")


@dataclass(frozen=True)
class TameFunction:
    graph: MetricGraph
    vertex_values: Tuple[Val, ...]          # aligned with graph.vertices
    profiles: Tuple[EdgeProfile, ...]       # aligned with graph.edges

    # ------------------------------------------------------------------
    # access
    # ------------------------------------------------------------------

    def _vindex(self, name: str) -> int:
        idx = getattr(self.graph, "_vidx", None)
        if idx is None:
            idx = {v: i for i, v in enumerate(self.graph.vertices)}
            object.__setattr__(self.graph, "_vidx", idx)
        return idx[name]

    def vertex_value(self, name: str) -> Val:
        return self.vertex_values[self._vindex(name)]

    def value_at(self, p: GraphPoint) -> Val:
        if p.kind == "v":
            return self.vertex_value(p.vertex)
        L = self.graph.edge_length(p.edge)
        return self.profiles[p.edge].value_inside(L, p.offset)

    def is_finite_everywhere(self) -> bool:
        if any(v == INF for v in self.vertex_values):
            return False
        return all(g is not None for pr in self.profiles for g in pr.gaps)

    def is_continuous(self) -> bool:
        """No downward spikes: every stored value equals its one-sided limits."""
        for pr in self.profiles:
            for k, (x, v) in enumerate(pr.breaks):
                if pr.limit_into_gap(k, at_lower_end=False) != v:
                    return False
                if pr.limit_into_gap(k + 1, at_lower_end=True) != v:
                    return False
        for name, val in zip(self.graph.vertices, self.vertex_values):
            for e, (u, w, _) in enumerate(self.graph.edges):
                pr = self.profiles[e]
                if u == name and pr.limit_into_gap(0, at_lower_end=True) != val:
                    return False
                if w == name and pr.limit_into_gap(len(pr.gaps) - 1, at_lower_end=False) != val:
                    return False
        return True

    def validate(self) -> None:
        g = self.graph
        if len(self.vertex_values) != len(g.vertices) or len(self.profiles) != len(g.edges):
            raise TameError("shape mismatch with graph")
        for e, pr in enumerate(self.profiles):
            L = g.edge_length(e)
            if len(pr.gaps) != len(pr.breaks) + 1:
                raise TameError(f"edge {e}: gap count mismatch")
            prev = Fraction(0)
            for k, (x, v) in enumerate(pr.breaks):
                if not (prev < x < L) if k else not (0 < x < L):
                    raise TameError(f"edge {e}: bad break offset {x}")
                if k and x <= pr.breaks[k - 1][0]:
                    raise TameError(f"edge {e}: breaks out of order")
                if not isinstance(v, Fraction):
                    raise TameError(f"edge {e}: break value must be finite")
                for lim in (pr.limit_into_gap(k, False), pr.limit_into_gap(k + 1, True)):
                    if lim != INF and v > lim:
                        raise TameError(f"edge {e}: break at {x} not lower semicontinuous")
                prev = x
        for name, val in zip(g.vertices, self.vertex_values):
            for e, (u, w, _) in enumerate(g.edges):
                pr = self.profiles[e]
                ends: List[Val] = []
                if u == name:
                    ends.append(pr.limit_into_gap(0, True))
                if w == name:
                    ends.append(pr.limit_into_gap(len(pr.gaps) - 1, False))
                for lim in ends:
                    if lim != INF and (val == INF or val > lim):
                        raise TameError(f"vertex {name}: not lower semicontinuous")

    # ------------------------------------------------------------------
    # the epigraph-union constructor
    # ------------------------------------------------------------------

    @staticmethod
    def from_pieces(
        graph: MetricGraph,
        edge_pieces: Sequence[Sequence[Piece]],
        vertex_overrides: Optional[Dict[str, Val]] = None,
    ) -> "TameFunction":
        """Pointwise min of closed affine pieces; +inf where nothing covers.

        Each piece on edge e is (lo, hi, value_at_lo, value_at_hi) with
        0 <= lo <= hi <= len(e); lo == hi gives a single-point piece.  The
        value at a vertex is the min of all touching pieces and any override.
        """
        overrides = vertex_overrides or {}
        profiles: List[EdgeProfile] = []
        end_vals: Dict[str, List[Val]] = {v: [] for v in graph.vertices}
        for e, (u, w, L) in enumerate(graph.edges):
            pieces: List[Piece] = []
            for raw in edge_pieces[e] if e < len(edge_pieces) else ():
                lo, hi, vlo, vhi = (Fraction(x) for x in raw)
                if lo > hi:
                    lo, hi, vlo, vhi = hi, lo, vhi, vlo
                if lo < 0 or hi > L:
                    raise TameError(f"piece outside edge {e}: {raw}")
                pieces.append((lo, hi, vlo, vhi))
                if lo == 0:
                    end_vals[u].append(vlo)
                if hi == L:
                    end_vals[w].append(vhi)
            profiles.append(_profile_from_pieces(pieces, L))
        vvals: List[Val] = []
        for name in graph.vertices:
            cands = [c for c in end_vals[name] if c != INF]
            if name in overrides and overrides[name] != INF:
                cands.append(Fraction(overrides[name]))
            vvals.append(min(cands) if cands else INF)
        return TameFunction(graph, tuple(vvals), tuple(profiles))

    def pieces(self) -> List[List[Piece]]:
        """Closed affine pieces whose epigraph union gives this function back."""
        out: List[List[Piece]] = []
        for e, pr in enumerate(self.profiles):
            L = self.graph.edge_length(e)
            ps: List[Piece] = []
            for k, gap in enumerate(pr.gaps):
                if gap is None:
                    continue
                lo, hi = pr.gap_span(k, L)
                ps.append((lo, hi, gap[0], gap[1]))
            for (x, v) in pr.breaks:
                ps.append((x, x, v, v))
            out.append(ps)
        return out

    def vertex_dict(self) -> Dict[str, Val]:
        return dict(zip(self.graph.vertices, self.vertex_values))

    # ------------------------------------------------------------------
    # pointwise operations
    # ------------------------------------------------------------------

    def add_const(self, c) -> "TameFunction":
        c = Fraction(c)
        vv = tuple(v if v == INF else v + c for v in self.vertex_values)
        prs = []
        for pr in self.profiles:
            breaks = tuple((x, v + c) for x, v in pr.breaks)
            gaps = tuple(None if g is None else (g[0] + c, g[1] + c) for g in pr.gaps)
            prs.append(EdgeProfile(breaks, gaps))
        return TameFunction(self.graph, vv, tuple(prs))

    def min_with(self, other: "TameFunction") -> "TameFunction":
        _check_same_graph(self, other)
        mine, theirs = self.pieces(), other.pieces()
        merged = [mine[e] + theirs[e] for e in range(len(self.graph.edges))]
        ov: Dict[str, Val] = {
            name: min(a, b)
            for name, a, b in zip(self.graph.vertices, self.vertex_values, other.vertex_values)
        }
        return TameFunction.from_pieces(self.graph, merged, ov)

    def tensor_indicator(self, U: ClosedSubgraph) -> "TameFunction":
        """Restrict to a closed subset: keep values on U, +inf off U."""
        if U.graph != self.graph:
            raise TameError("subset lives on a different graph")
        uverts = U.vertices()
        vv = tuple(
            v if name in uverts else INF
            for name, v in zip(self.graph.vertices, self.vertex_values)
        )
        prs = tuple(
            pr if e in U.edge_ids else ALL_INF_PROFILE
            for e, pr in enumerate(self.profiles)
        )
        return TameFunction(self.graph, vv, prs)

    # ------------------------------------------------------------------
    # comparisons
    # ------------------------------------------------------------------

    def pointwise_leq(self, other: "TameFunction") -> bool:
        """self <= other everywhere (the one-dimensional hom condition)."""
        _check_same_graph(self, other)
        for a, b in zip(self.vertex_values, other.vertex_values):
            if b != INF and (a == INF or a > b):
                return False
        for e in range(len(self.graph.edges)):
            L = self.graph.edge_length(e)
            pf, pg = self.profiles[e], other.profiles[e]
            if not pf.breaks and not pg.breaks:
                # one affine piece each: the gap limits decide the whole edge
                fl, gl = pf.gaps[0], pg.gaps[0]
                if gl is None:
                    continue
                if fl is None or fl[0] > gl[0] or fl[1] > gl[1]:
                    return False
                continue
            for lo, hi in _merged_intervals(pf, pg, L):
                fl = _limits_on(pf, L, lo, hi)
                gl = _limits_on(pg, L, lo, hi)
                if gl is None:
                    continue
                if fl is None or fl[0] > gl[0] or fl[1] > gl[1]:
                    return False
            for x in {x for x, _ in pf.breaks} | {x for x, _ in pg.breaks}:
                a, b = pf.value_inside(L, x), pg.value_inside(L, x)
                if b != INF and (a == INF or a > b):
                    return False
        return True

    def sup_difference(self, other: "TameFunction") -> Val:
        """sup(self - other): the least shift c with self <= other + c.

        Conventions: points where other = +inf and self is finite contribute
        -inf (skipped); self = +inf where other is finite makes the sup +inf;
        both +inf contributes nothing.  All-skipped returns -inf.
        """
        _check_same_graph(self, other)
        best: Val = NEG_INF

        def diff(a: Val, b: Val) -> Optional[Val]:
            if a == INF:
                return INF if b != INF else None
            if b == INF:
                return None
            return a - b

        for a, b in zip(self.vertex_values, other.vertex_values):
            d = diff(a, b)
            if d == INF:
                return INF
            if d is not None and d > best:
                best = d
        for e in range(len(self.graph.edges)):
            L = self.graph.edge_length(e)
            pf, pg = self.profiles[e], other.profiles[e]
            if not pf.breaks and not pg.breaks:
                # one affine piece each: the gap limits decide the whole edge
                fl, gl = pf.gaps[0], pg.gaps[0]
                if gl is None:
                    continue
                if fl is None:
                    return INF
                for d in (fl[0] - gl[0], fl[1] - gl[1]):
                    if d > best:
                        best = d
                continue
            for lo, hi in _merged_intervals(pf, pg, L):
                fl = _limits_on(pf, L, lo, hi)
                gl = _limits_on(pg, L, lo, hi)
                if gl is None:
                    continue
                if fl is None:
                    return INF
                for d in (fl[0] - gl[0], fl[1] - gl[1]):
                    if d > best:
                        best = d
            for x in {x for x, _ in pf.breaks} | {x for x, _ in pg.breaks}:
                d = diff(pf.value_inside(L, x), pg.value_inside(L, x))
                if d == INF:
                    return INF
                if d is not None and d > best:
                    best = d
        return best

    # ------------------------------------------------------------------
    # subdivision transport
    # ------------------------------------------------------------------

    def on_subdivision(self, sub: Subdivision) -> "TameFunction":
        """The same function, re-expressed on the refined graph."""
        if sub.parent != self.graph:
            raise TameError("subdivision of a different graph")
        g2 = sub.graph
        fine_pieces: List[List[Piece]] = [[] for _ in g2.edges]
        for e, ps in enumerate(self.pieces()):
            bounds = (Fraction(0),) + sub.cuts[e] + (self.graph.edge_length(e),)
            for (lo, hi, vlo, vhi) in ps:
                for k, sub_e in enumerate(sub.pieces[e]):
                    a, b = bounds[k], bounds[k + 1]
                    s, t = max(lo, a), min(hi, b)
                    if s > t:
                        continue
                    vs = _affine_at(lo, hi, vlo, vhi, s)
                    vt = _affine_at(lo, hi, vlo, vhi, t)
                    fine_pieces[sub_e].append((s - a, t - a, vs, vt))
        ov: Dict[str, Val] = {}
        for name in g2.vertices:
            if name in self.graph.vertices:
                ov[name] = self.vertex_value(name)
            else:
                e, k = sub._cut_vertex(name)
                ov[name] = self.value_at(self.graph.point(e, sub.cuts[e][k]))
        return TameFunction.from_pieces(g2, fine_pieces, ov)

    @staticmethod
    def from_subdivision(sub: Subdivision, fine: "TameFunction") -> "TameFunction":
        """Stitch a function on the refined graph back onto the parent graph."""
        if fine.graph != sub.graph:
            raise TameError("function does not live on the refined graph")
        parent = sub.parent
        coarse_pieces: List[List[Piece]] = [[] for _ in parent.edges]
        fine_ps = fine.pieces()
        for e in range(len(parent.edges)):
            bounds = (Fraction(0),) + sub.cuts[e] + (parent.edge_length(e),)
            for k, sub_e in enumerate(sub.pieces[e]):
                off = bounds[k]
                for (lo, hi, vlo, vhi) in fine_ps[sub_e]:
                    coarse_pieces[e].append((lo + off, hi + off, vlo, vhi))
                if k > 0:
                    v = fine.vertex_value(sub.cut_name(e, k))
                    if v != INF:
                        coarse_pieces[e].append((off, off, v, v))
        ov = {name: fine.vertex_value(name) for name in parent.vertices}
        return TameFunction.from_pieces(parent, coarse_pieces, ov)


# ----------------------------------------------------------------------
# profile construction internals
# ----------------------------------------------------------------------


def _profile_from_pieces(pieces: List[Piece], L: Fraction) -> EdgeProfile:
    """Lower envelope of closed affine pieces on [0, L], in canonical form."""
    if not pieces:
        return ALL_INF_PROFILE
    cuts = {Fraction(0), L}
    for (lo, hi, _, _) in pieces:
        if 0 < lo < L:
            cuts.add(lo)
        if 0 < hi < L:
            cuts.add(hi)
    # crossings of the affine extensions, clipped to the common closed domain
    for i, (lo1, hi1, a1, b1) in enumerate(pieces):
        if hi1 == lo1:
            continue
        s1 = (b1 - a1) / (hi1 - lo1)
        for (lo2, hi2, a2, b2) in pieces[i + 1:]:
            if hi2 == lo2:
                continue
            s2 = (b2 - a2) / (hi2 - lo2)
            if s1 == s2:
                continue
            # values at t: a1 + s1*(t - lo1) = a2 + s2*(t - lo2)
            t = (a2 - s2 * lo2 - a1 + s1 * lo1) / (s1 - s2)
            if max(lo1, lo2) < t < min(hi1, hi2) and 0 < t < L:
                cuts.add(t)
    xs = sorted(cuts)
    gaps: List[Gap] = []
    for a, b in zip(xs, xs[1:]):
        active = [p for p in pieces if p[0] <= a and b <= p[1]]
        if not active:
            gaps.append(None)
            continue
        mid = (a + b) / 2
        best = min(active, key=lambda p: _affine_at(p[0], p[1], p[2], p[3], mid))
        gaps.append((
            _affine_at(best[0], best[1], best[2], best[3], a),
            _affine_at(best[0], best[1], best[2], best[3], b),
        ))
    breaks: List[Tuple[Fraction, Optional[Fraction]]] = []
    for x in xs[1:-1]:
        vals = [
            _affine_at(lo, hi, vlo, vhi, x)
            for (lo, hi, vlo, vhi) in pieces
            if lo <= x <= hi
        ]
        breaks.append((x, min(vals) if vals else None))
    return _canonical(breaks, gaps, L)


def _canonical(
    breaks: List[Tuple[Fraction, Optional[Fraction]]],
    gaps: List[Gap],
    L: Fraction,
) -> EdgeProfile:
    """Drop removable breaks: value None (inside an inf region) or matching
    limits with equal slopes on both sides."""
    out_breaks: List[Tuple[Fraction, Fraction]] = []
    out_gaps: List[Gap] = [gaps[0]]
    bounds = [Fraction(0)] + [x for x, _ in breaks] + [L]
    for k, (x, v) in enumerate(breaks):
        left, right = out_gaps[-1], gaps[k + 1]
        if v is None:
            assert left is None and right is None, "inf point value next to a finite gap"
            continue  # merge the two inf gaps
        if left is not None and right is not None and left[1] == v == right[0]:
            llo = out_breaks[-1][0] if out_breaks else Fraction(0)  # left gap start
            rhi = bounds[k + 2]
            sl = (left[1] - left[0]) / (x - llo)
            sr = (right[1] - right[0]) / (rhi - x)
            if sl == sr:
                out_gaps[-1] = (left[0], right[1])
                continue
        out_breaks.append((x, v))
        out_gaps.append(right)
    return EdgeProfile(tuple(out_breaks), tuple(out_gaps))


def _merged_intervals(pf: EdgeProfile, pg: EdgeProfile, L: Fraction):
    xs = sorted(set(pf.boundaries(L)) | set(pg.boundaries(L)))
    return zip(xs, xs[1:])


def _limits_on(pr: EdgeProfile, L: Fraction, lo: Fraction, hi: Fraction) -> Gap:
    """One-sided limits of pr on the open interval (lo, hi), which must sit
    inside a single gap of pr.  None if pr is +inf there."""
    mid = (lo + hi) / 2
    k = 0
    for x, _ in pr.breaks:
        if x < mid:
            k += 1
    gap = pr.gaps[k]
    if gap is None:
        return None
    glo, ghi = pr.gap_span(k, L)
    if lo == glo and hi == ghi:
        return gap
    return (
        _affine_at(glo, ghi, gap[0], gap[1], lo),
        _affine_at(glo, ghi, gap[0], gap[1], hi),
    )


# ----------------------------------------------------------------------
# standard constructors
# ----------------------------------------------------------------------


def constant(graph: MetricGraph, c) -> TameFunction:
    if c == INF:
        vv = tuple(INF for _ in graph.vertices)
        return TameFunction(graph, vv, tuple(ALL_INF_PROFILE for _ in graph.edges))
    c = Fraction(c)
    vv = tuple(c for _ in graph.vertices)
    prs = tuple(EdgeProfile((), ((c, c),)) for _ in graph.edges)
    return TameFunction(graph, vv, prs)


def skyscraper(graph: MetricGraph, p: GraphPoint, height=0) -> TameFunction:
    """`height` at the point p, +inf everywhere else."""
    h = Fraction(height)
    vv = tuple(
        h if (p.kind == "v" and name == p.vertex) else INF for name in graph.vertices
    )
    prs = []
    for e in range(len(graph.edges)):
        if p.kind == "e" and p.edge == e:
            prs.append(EdgeProfile(((p.offset, h),), (None, None)))
        else:
            prs.append(ALL_INF_PROFILE)
    return TameFunction(graph, vv, tuple(prs))


def distance_cone(graph: MetricGraph, p: GraphPoint, base=0, slope=1) -> TameFunction:
    """base + slope * d(., p); +inf on components p cannot reach.

    With slope 0 this is the constant `base` on p's component.
    """
    base, slope = Fraction(base), Fraction(slope)
    if slope < 0:
        raise TameError("cone slope must be >= 0")
    edge_pieces: List[List[Piece]] = []
    for e, (u, w, L) in enumerate(graph.edges):
        ps: List[Piece] = []
        du = graph.distance(GraphPoint.V(u), p)
        dw = graph.distance(GraphPoint.V(w), p)
        if du != INF:
            ps.append((Fraction(0), L, base + slope * du, base + slope * (du + L)))
        if dw != INF:
            ps.append((Fraction(0), L, base + slope * (dw + L), base + slope * dw))
        if p.kind == "e" and p.edge == e:
            t = p.offset
            ps.append((Fraction(0), t, base + slope * t, base))
            ps.append((t, L, base, base + slope * (L - t)))
        edge_pieces.append(ps)
    ov: Dict[str, Val] = {}
    for name in graph.vertices:
        d = graph.distance(GraphPoint.V(name), p)
        if d != INF:
            ov[name] = base + slope * d
    return TameFunction.from_pieces(graph, edge_pieces, ov)
