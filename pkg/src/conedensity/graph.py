"""Metric graphs with exact rational edge lengths.

A graph is a list of named vertices plus indexed edges (u, v, length); parallel
edges and self-loops are allowed.  Points are either vertices or interior
points of an edge, addressed by an exact offset from the edge's first endpoint.
Geodesic distance is computed exactly (Dijkstra over Fractions, then four
endpoint routings for interior points).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Tuple

from .rat import Val, INF


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class GraphPoint:
    """A point of a metric graph: a vertex, or an interior point of an edge."""

    kind: str  # 'v' or 'e'
    vertex: Optional[str] = None
    edge: Optional[int] = None
    offset: Optional[Fraction] = None

    @staticmethod
    def V(name: str) -> "GraphPoint":
        return GraphPoint("v", vertex=name)

    @staticmethod
    def E(edge: int, offset: Fraction) -> "GraphPoint":
        return GraphPoint("e", edge=edge, offset=Fraction(offset))

    def __repr__(self) -> str:
        if self.kind == "v":
            return f"Pt({self.vertex})"
        return f"Pt(e{self.edge}@{self.offset})"


@dataclass(frozen=True)
class MetricGraph:
    vertices: Tuple[str, ...]
    edges: Tuple[Tuple[str, str, Fraction], ...]  # (u, v, length), length > 0

    def __post_init__(self):
        seen = set()
        for v in self.vertices:
            if v in seen:
                raise GraphError(f"duplicate vertex {v!r}")
            seen.add(v)
        for i, (u, v, L) in enumerate(self.edges):
            if u not in seen or v not in seen:
                raise GraphError(f"edge {i} references unknown vertex")
            if not isinstance(L, Fraction):
                raise GraphError(f"edge {i} length must be a Fraction, got {type(L).__name__}")
            if L <= 0:
                raise GraphError(f"edge {i} has non-positive length {L}")

    @staticmethod
    def build(vertices, edges) -> "MetricGraph":
        """Convenience constructor coercing lengths via Fraction()."""
        es = tuple((u, v, Fraction(L)) for (u, v, L) in edges)
        return MetricGraph(tuple(vertices), es)

    # ------------------------------------------------------------------
    # incidence
    # ------------------------------------------------------------------

    def incident_edges(self, v: str) -> List[int]:
        return [i for i, (a, b, _) in enumerate(self.edges) if a == v or b == v]

    def edge_length(self, e: int) -> Fraction:
        return self.edges[e][2]

    def point(self, e: int, offset) -> GraphPoint:
        """Point on edge e at the given offset, snapped to a vertex at the ends."""
        off = Fraction(offset)
        u, v, L = self.edges[e]
        if off < 0 or off > L:
            raise GraphError(f"offset {off} outside edge {e} of length {L}")
        if off == 0:
            return GraphPoint.V(u)
        if off == L:
            return GraphPoint.V(v)
        return GraphPoint.E(e, off)

    # ------------------------------------------------------------------
    # exact geodesic distances
    # ------------------------------------------------------------------

    def vertex_distances(self) -> Dict[str, Dict[str, Val]]:
        """All-pairs vertex geodesic distance (INF across disconnected parts).

        Cached on first use; the graph is frozen so this is safe.
        """
        cache = getattr(self, "_vdist", None)
        if cache is not None:
            return cache
        table: Dict[str, Dict[str, Val]] = {}
        adj: Dict[str, List[Tuple[str, Fraction]]] = {v: [] for v in self.vertices}
        for (u, v, L) in self.edges:
            adj[u].append((v, L))
            adj[v].append((u, L))
        for src in self.vertices:
            dist: Dict[str, Val] = {v: INF for v in self.vertices}
            dist[src] = Fraction(0)
            pq = [(Fraction(0), src)]
            done = set()
            while pq:
                d, x = heapq.heappop(pq)
                if x in done:
                    continue
                done.add(x)
                for (y, L) in adj[x]:
                    nd = d + L
                    if dist[y] == INF or nd < dist[y]:
                        dist[y] = nd
                        heapq.heappush(pq, (nd, y))
            table[src] = dist
        object.__setattr__(self, "_vdist", table)
        return table

    def d_vv(self, a: str, b: str) -> Val:
        return self.vertex_distances()[a][b]

    def distance(self, p: GraphPoint, q: GraphPoint) -> Val:
        """Exact geodesic distance between two points."""
        if p.kind == "v" and q.kind == "v":
            return self.d_vv(p.vertex, q.vertex)
        if p.kind == "v":
            p, q = q, p
        # p is interior
        u, w, L = self.edges[p.edge]
        t = p.offset
        if q.kind == "v":
            z = q.vertex
            return min(t + self.d_vv(u, z), (L - t) + self.d_vv(w, z))
        u2, w2, L2 = self.edges[q.edge]
        s = q.offset
        best: Val = INF
        if p.edge == q.edge:
            best = abs(t - s)
        for (ca, na) in ((t, u), (L - t, w)):
            for (cb, nb) in ((s, u2), (L2 - s, w2)):
                mid = self.d_vv(na, nb)
                if mid != INF:
                    cand = ca + mid + cb
                    if cand < best:
                        best = cand
        return best

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        dist = self.vertex_distances()[self.vertices[0]]
        return all(dist[v] != INF for v in self.vertices)

    def _max_from_point(self, p: GraphPoint, e: int) -> Val:
        """Exact max over q on edge e of distance(p, q).

        distance(p, .) restricted to an edge is a min of affine functions of the
        offset, so its max sits at an endpoint or at a pairwise crossing; we
        evaluate the exact candidate offsets.
        """
        u, w, L = self.edges[e]
        cands: List[Fraction] = [Fraction(0), L]
        if p.kind == "e" and p.edge == e:
            D = self.d_vv(u, w)  # never INF: edge e itself is a path
            t = p.offset
            for s in (t + (L + D) / 2, t - (L + D) / 2):
                if 0 < s < L:
                    cands.append(s)
        else:
            a = self.distance(p, GraphPoint.V(u))
            b = self.distance(p, GraphPoint.V(w))
            if a == INF and b == INF:
                return INF
            if a == INF:
                return L + b
            if b == INF:
                return L + a
            s_star = (L + b - a) / 2
            if 0 < s_star < L:
                cands.append(s_star)
        return max(self.distance(p, self.point(e, s)) for s in cands)


# ----------------------------------------------------------------------
# subdivision
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class Subdivision:
    """Result of subdividing a graph: the refined graph plus coordinate maps."""

    parent: MetricGraph
    graph: MetricGraph
    pieces: Tuple[Tuple[int, ...], ...]   # old edge -> its new edge indices, in order
    cuts: Tuple[Tuple[Fraction, ...], ...]  # old edge -> interior cut offsets

    def to_new(self, p: GraphPoint) -> GraphPoint:
        if p.kind == "v":
            return p
        e, t = p.edge, p.offset
        cuts = self.cuts[e]
        lo = Fraction(0)
        for k, sub in enumerate(self.pieces[e]):
            hi = cuts[k] if k < len(cuts) else self.parent.edge_length(e)
            if t <= hi:
                return self.graph.point(sub, t - lo)
            lo = hi
        raise GraphError("offset outside edge")  # pragma: no cover

    def to_old(self, p: GraphPoint) -> GraphPoint:
        if p.kind == "v":
            if p.vertex in self.parent.vertices:
                return p
            e, k = self._cut_vertex(p.vertex)
            return self.parent.point(e, self.cuts[e][k])
        sub = p.edge
        e, lo = self._sub_span(sub)
        return self.parent.point(e, lo + p.offset)

    def cut_name(self, e: int, k: int) -> str:
        """Name of the k-th cut vertex (1-based) on parent edge e."""
        return f"{_cut_prefix(self.parent)}{e}:{k}"

    def _cut_vertex(self, name: str) -> Tuple[int, int]:
        pre = _cut_prefix(self.parent)
        if not name.startswith(pre):
            raise GraphError(f"{name!r} is not a subdivision vertex")
        es, ks = name[len(pre):].split(":")
        return int(es), int(ks) - 1

    def _sub_span(self, sub: int) -> Tuple[int, Fraction]:
        for e, subs in enumerate(self.pieces):
            for k, s in enumerate(subs):
                if s == sub:
                    lo = self.cuts[e][k - 1] if k > 0 else Fraction(0)
                    return e, lo
        raise GraphError("unknown sub-edge")  # pragma: no cover


def _cut_prefix(g: MetricGraph) -> str:
    """Shortest run of '~' that no vertex of g starts with.

    Keeps cut-vertex names unambiguous when a graph that is itself a
    subdivision gets subdivided again.
    """
    pre = "~"
    while any(v.startswith(pre) for v in g.vertices):
        pre += "~"
    return pre


def subdivide_at(g: MetricGraph, cut_offsets) -> Subdivision:
    """Cut each edge at the given interior offsets.

    `cut_offsets[e]` is a strictly increasing tuple of offsets in (0, len(e));
    new vertices on old edge e are named "<pre>e:k" (k = 1..#cuts) in offset
    order, where <pre> is a tilde run that collides with no existing name.
    """
    verts: List[str] = list(g.vertices)
    edges: List[Tuple[str, str, Fraction]] = []
    pieces: List[Tuple[int, ...]] = []
    cuts: List[Tuple[Fraction, ...]] = []
    pre = _cut_prefix(g)
    for e, (u, v, L) in enumerate(g.edges):
        cs = tuple(Fraction(c) for c in cut_offsets[e]) if e < len(cut_offsets) else ()
        for a, b in zip(cs, cs[1:]):
            if not a < b:
                raise GraphError(f"cuts on edge {e} not strictly increasing")
        if cs and not (0 < cs[0] and cs[-1] < L):
            raise GraphError(f"cuts on edge {e} not interior")
        names = [u] + [f"{pre}{e}:{k}" for k in range(1, len(cs) + 1)] + [v]
        verts.extend(names[1:-1])
        bounds = (Fraction(0),) + cs + (L,)
        idxs = []
        for k in range(len(bounds) - 1):
            idxs.append(len(edges))
            edges.append((names[k], names[k + 1], bounds[k + 1] - bounds[k]))
        pieces.append(tuple(idxs))
        cuts.append(cs)
    g2 = MetricGraph(tuple(verts), tuple(edges))
    return Subdivision(parent=g, graph=g2, pieces=tuple(pieces), cuts=tuple(cuts))


def subdivide(g: MetricGraph, mesh) -> Subdivision:
    """Refine every edge into equal pieces of length <= mesh."""
    mesh = Fraction(mesh)
    if mesh <= 0:
        raise GraphError("mesh must be positive")
    all_cuts: List[Tuple[Fraction, ...]] = []
    for e, (u, v, L) in enumerate(g.edges):
        n = int(L // mesh)
        if n * mesh < L:
            n += 1
        step = L / n
        all_cuts.append(tuple(step * k for k in range(1, n)))
    return subdivide_at(g, all_cuts)


# ----------------------------------------------------------------------
# closed subgraphs and the closed-star cover
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class ClosedSubgraph:
    """A closed subset of a metric graph: full closed edges plus isolated vertices.

    Isolated vertices are listed in `extra_vertices`; endpoints of the edges in
    `edge_ids` are implicitly included.
    """

    graph: MetricGraph
    edge_ids: FrozenSet[int]
    extra_vertices: FrozenSet[str] = frozenset()

    def vertices(self) -> FrozenSet[str]:
        vs = set(self.extra_vertices)
        for e in self.edge_ids:
            u, v, _ = self.graph.edges[e]
            vs.add(u)
            vs.add(v)
        return frozenset(vs)

    def is_empty(self) -> bool:
        return not self.edge_ids and not self.extra_vertices

    def contains(self, p: GraphPoint) -> bool:
        if p.kind == "e":
            return p.edge in self.edge_ids
        return p.vertex in self.vertices()

    def component_count(self) -> int:
        """Number of connected components (as a point set)."""
        nodes = list(self.vertices())
        if not nodes:
            return 0
        parent = {v: v for v in nodes}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in self.edge_ids:
            u, v, _ = self.graph.edges[e]
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
        return len({find(v) for v in nodes})

    def intersect(self, other: "ClosedSubgraph") -> "ClosedSubgraph":
        """Honest point-set intersection, returned as a closed subgraph.

        Shared edges stay edges; vertices lying in both pieces but not on a
        shared edge become isolated vertices.
        """
        es = self.edge_ids & other.edge_ids
        shared_ep = set()
        for e in es:
            u, v, _ = self.graph.edges[e]
            shared_ep.add(u)
            shared_ep.add(v)
        vs = (self.vertices() & other.vertices()) - shared_ep
        return ClosedSubgraph(self.graph, es, frozenset(vs))

    def max_distance_from(self, p: GraphPoint) -> Val:
        """Exact sup of distance(p, q) over q in this subset."""
        g = self.graph
        m: Val = Fraction(0)
        for v in self.extra_vertices:
            d = g.distance(p, GraphPoint.V(v))
            m = max(m, d)
        for e in self.edge_ids:
            m = max(m, g._max_from_point(p, e))
        if self.is_empty():
            raise GraphError("max_distance_from on empty subset")
        return m


class CoverError(ValueError):
    pass


@dataclass(frozen=True)
class CechCover:
    """The closed-star cover of a metric graph, with its edge-level nerve.

    Pieces are the closed stars of all vertices.  Nerve pairs are the vertex
    pairs whose stars share at least one full closed edge; the shared edge
    bundle is recorded as the overlap.  Pairs meeting only in vertices carry
    no edge-level overlap and are not part of the nerve.
    """

    graph: MetricGraph
    centers: Tuple[str, ...]
    stars: Tuple[ClosedSubgraph, ...]
    pairs: Tuple[Tuple[int, int, ClosedSubgraph], ...]

    def star_of(self, v: str) -> ClosedSubgraph:
        return self.stars[self.centers.index(v)]

    def radius(self) -> Val:
        """Max over pieces of the piece's reach from its center vertex."""
        r: Val = Fraction(0)
        for c, st in zip(self.centers, self.stars):
            if st.is_empty():
                continue
            r = max(r, st.max_distance_from(GraphPoint.V(c)))
        return r


def closed_star_cover(g: MetricGraph, validate: bool = True) -> CechCover:
    centers = tuple(g.vertices)
    stars = []
    for v in centers:
        es = frozenset(g.incident_edges(v))
        extra = frozenset() if es else frozenset({v})
        stars.append(ClosedSubgraph(g, es, extra))
    pairs: List[Tuple[int, int, ClosedSubgraph]] = []
    for i in range(len(centers)):
        for j in range(i + 1, len(centers)):
            inter = stars[i].intersect(stars[j])
            if inter.is_empty():
                continue
            if validate and inter.component_count() > 1:
                raise CoverError(
                    f"closed stars of {centers[i]!r} and {centers[j]!r} meet in "
                    f"{inter.component_count()} components; refine the graph first"
                )
            if inter.edge_ids:
                # edge-level overlap: a genuine nerve pair
                pairs.append((i, j, ClosedSubgraph(g, inter.edge_ids)))
    return CechCover(graph=g, centers=centers, stars=tuple(stars), pairs=tuple(pairs))
