"""Barcodes of leveled complexes: decomposition, certificates and distances.

A leveled complex is a twisted complex over a single point: generators carry a
finite level and a degree, differential entries go up one degree and never
decrease the level.  Every such complex splits into two-generator pairs
(a bar [birth, death) in the source degree) and singletons (bars [birth, inf));
`gabriel_decompose` computes the splitting *constructively*, returning the
change of basis as a replayable certificate rather than as a trusted claim.

Two distances live here: the classical symmetric bottleneck distance, and the
asymmetric two-parameter matching distance used to compare complexes whose
comparison maps only go one way at each shift (the matching partner of a live
bar may itself be short-lived; the composite relations then hold vacuously, so
feasibility is upward closed in the two shifts and a staircase search over the
finitely many threshold values is exact).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from . import gf2
from .graph import GraphPoint, MetricGraph
from .rat import INF, Val, fmt
from .tame import distance_cone
from .twisted import Generator, TwistedComplex

BARCODE_FORMAT_VERSION = "1"


class CertificateError(ValueError):
    pass


# ----------------------------------------------------------------------
# leveled complexes
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class LeveledComplex:
    levels: Tuple[Fraction, ...]
    degrees: Tuple[int, ...]
    cols: Tuple[int, ...]  # cols[j] = bitmask of targets of generator j

    def n(self) -> int:
        return len(self.levels)

    def validate(self) -> None:
        if not (len(self.levels) == len(self.degrees) == len(self.cols)):
            raise CertificateError("leveled complex shape mismatch")
        for j, col in enumerate(self.cols):
            for i in gf2.bits(col):
                if i >= self.n():
                    raise CertificateError("entry out of range")
                if self.degrees[i] != self.degrees[j] + 1:
                    raise CertificateError(f"entry {i} <- {j} skips degrees")
                if self.levels[i] < self.levels[j]:
                    raise CertificateError(f"entry {i} <- {j} lowers the level")
        for j in range(self.n()):
            if gf2.apply_cols(list(self.cols), self.cols[j]) != 0:
                raise CertificateError("differential does not square to zero")

    @staticmethod
    def from_stalk(cx: TwistedComplex, p: GraphPoint) -> Tuple["LeveledComplex", List[int]]:
        kept, levels, degs, cols = cx.stalk_at(p)
        return LeveledComplex(tuple(levels), tuple(degs), tuple(cols)), kept

    def betti_at(self, t, degree: int) -> int:
        """dim H^degree of the sub-level quotient at level t (born => counted)."""
        t = Fraction(t)
        kept = [j for j in range(self.n()) if self.levels[j] <= t]
        pos = {j: k for k, j in enumerate(kept)}
        cols_d = []   # differential out of `degree`
        cols_dm = []  # differential out of degree-1
        dim_d = 0
        for j in kept:
            m = 0
            for i in gf2.bits(self.cols[j]):
                if i in pos:
                    m |= 1 << pos[i]
            if self.degrees[j] == degree:
                dim_d += 1
                cols_d.append(m)
            elif self.degrees[j] == degree - 1:
                cols_dm.append(m)
        return dim_d - gf2.rank(cols_d) - gf2.rank(cols_dm)


# ----------------------------------------------------------------------
# barcodes
# ----------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Bar:
    degree: int
    birth: Fraction
    death: Val  # Fraction or +inf

    def length(self) -> Val:
        if self.death == INF:
            return INF
        return self.death - self.birth

    def __repr__(self) -> str:
        return f"Bar(d{self.degree} [{fmt(self.birth)}, {fmt(self.death)}))"


@dataclass(frozen=True)
class Barcode:
    bars: Tuple[Bar, ...]

    @staticmethod
    def make(bars: Iterable[Bar]) -> "Barcode":
        return Barcode(tuple(sorted(bars, key=lambda b: (b.degree, b.birth, b.death == INF, b.death))))

    def in_degree(self, d: int) -> List[Bar]:
        return [b for b in self.bars if b.degree == d]

    def degrees(self) -> List[int]:
        return sorted({b.degree for b in self.bars})

    def betti_at(self, t, degree: int) -> int:
        t = Fraction(t)
        return sum(1 for b in self.bars if b.degree == degree and b.birth <= t and t < b.death)

    def __len__(self) -> int:
        return len(self.bars)


# ----------------------------------------------------------------------
# constructive decomposition
# ----------------------------------------------------------------------


@dataclass
class GabrielCertificate:
    """Replayable witness that `source` decomposes with barcode `barcode`.

    `order` maps sorted slots to original generator positions; `canonical` is
    the matched-pairs complex in sorted slots (same levels and degrees slotwise
    as the sorted source); `psi` is the unitriangular change of basis
    canonical -> sorted-source.  `verify()` re-checks everything from scratch.
    """

    source: LeveledComplex
    order: Tuple[int, ...]
    canonical: LeveledComplex
    psi: Tuple[int, ...]
    barcode: Barcode

    def verify(self) -> None:
        self.source.validate()
        n = self.source.n()
        if sorted(self.order) != list(range(n)):
            raise CertificateError("order is not a permutation")
        lv = [self.source.levels[j] for j in self.order]
        dg = [self.source.degrees[j] for j in self.order]
        # sorted copy of the source differential
        pos = {j: k for k, j in enumerate(self.order)}
        scols = []
        for j in self.order:
            m = 0
            for i in gf2.bits(self.source.cols[j]):
                m |= 1 << pos[i]
            scols.append(m)
        # canonical complex: same slots, decomposed differential
        if list(self.canonical.levels) != lv or list(self.canonical.degrees) != dg:
            raise CertificateError("canonical slots disagree with the source")
        self.canonical.validate()
        partner: Dict[int, int] = {}
        for j, col in enumerate(self.canonical.cols):
            tgts = list(gf2.bits(col))
            if len(tgts) > 1:
                raise CertificateError("canonical differential is not a matching")
            if tgts:
                i = tgts[0]
                if i in partner or j in partner:
                    raise CertificateError("canonical matching reuses a generator")
                partner[i] = j
                partner[j] = i
        # psi: unitriangular, allowed entries, intertwines the differentials
        if len(self.psi) != n:
            raise CertificateError("psi shape mismatch")
        for j, col in enumerate(self.psi):
            if not (col >> j) & 1:
                raise CertificateError("psi is missing a diagonal entry")
            for i in gf2.bits(col):
                if dg[i] != dg[j]:
                    raise CertificateError("psi mixes degrees")
                if lv[i] < lv[j]:
                    raise CertificateError("psi entry lowers the level")
            if col >> (j + 1):
                raise CertificateError("psi is not triangular")
        lhs = gf2.mat_mul(scols, list(self.psi))
        rhs = gf2.mat_mul(list(self.psi), list(self.canonical.cols))
        if lhs != rhs:
            raise CertificateError("psi does not intertwine the differentials")
        # barcode read-off agrees
        bars: List[Bar] = []
        seen = set()
        for j, col in enumerate(self.canonical.cols):
            tgts = list(gf2.bits(col))
            if tgts:
                i = tgts[0]
                seen.add(i)
                seen.add(j)
                if lv[i] != lv[j]:
                    bars.append(Bar(dg[j], lv[j], lv[i]))
        for j in range(n):
            if j not in seen:
                bars.append(Bar(dg[j], lv[j], INF))
        if Barcode.make(bars) != self.barcode:
            raise CertificateError("barcode does not match the canonical complex")

    def psi_inverse(self) -> Tuple[int, ...]:
        """Inverse of the unitriangular psi (also unitriangular and allowed)."""
        n = len(self.psi)
        inv = list(gf2.identity_cols(n))
        # forward substitution column by column
        for j in range(n):
            col = 1 << j
            for i in gf2.bits(self.psi[j] ^ (1 << j)):
                col ^= inv[i]
            inv[j] = col
        # verify
        if gf2.mat_mul(list(self.psi), inv) != gf2.identity_cols(n):
            raise CertificateError("psi inversion failed")  # pragma: no cover
        return tuple(inv)


def gabriel_decompose(lc: LeveledComplex) -> GabrielCertificate:
    """Split a leveled complex into bars by allowed column reduction.

    Generators are processed in decreasing level order, so reducing a column
    by earlier columns only ever adds generators of level >= the column's own
    level, which is exactly the allowed direction for a change of basis; the
    pivot of a reduced column is its *lowest-level* target, so the replaced
    target basis vector delta(new source) again only involves levels above it.
    """
    n = lc.n()
    order = tuple(sorted(range(n), key=lambda j: (-lc.levels[j], -lc.degrees[j], j)))
    pos = {j: k for k, j in enumerate(order)}
    lv = [lc.levels[j] for j in order]
    dg = [lc.degrees[j] for j in order]
    scols = []
    for j in order:
        m = 0
        for i in gf2.bits(lc.cols[j]):
            m |= 1 << pos[i]
        scols.append(m)

    low_owner: Dict[int, int] = {}  # pivot row -> column
    R = list(scols)
    V = list(gf2.identity_cols(n))
    for j in range(n):
        while R[j]:
            low = R[j].bit_length() - 1
            k = low_owner.get(low)
            if k is None:
                low_owner[low] = j
                break
            R[j] ^= R[k]
            V[j] ^= V[k]

    psi = [0] * n
    can_cols = [0] * n
    bars: List[Bar] = []
    paired = set()
    for j in range(n):
        if R[j]:
            i = R[j].bit_length() - 1
            paired.add(i)
            paired.add(j)
            psi[j] = V[j]
            psi[i] = R[j]
            can_cols[j] = 1 << i
            if lv[i] != lv[j]:
                bars.append(Bar(dg[j], lv[j], lv[i]))
    for j in range(n):
        if j not in paired:
            psi[j] = V[j]
            bars.append(Bar(dg[j], lv[j], INF))

    cert = GabrielCertificate(
        source=lc,
        order=order,
        canonical=LeveledComplex(tuple(lv), tuple(dg), tuple(can_cols)),
        psi=tuple(psi),
        barcode=Barcode.make(bars),
    )
    cert.verify()
    return cert


def barcode_of(cx: TwistedComplex, p: GraphPoint) -> Barcode:
    lc, _ = LeveledComplex.from_stalk(cx, p)
    return gabriel_decompose(lc).barcode


# ----------------------------------------------------------------------
# cone models: lift a barcode to W-shaped generators at a basepoint
# ----------------------------------------------------------------------


def cone_model(graph: MetricGraph, basepoint: GraphPoint, barcode: Barcode) -> TwistedComplex:
    """The twisted complex of distance cones realizing a barcode at a point.

    Bar [a, b) in degree d becomes (a + d(., x), deg d) -> (b + d(., x), deg d+1);
    a bar [a, inf) contributes a single generator.  The stalk at x of the result
    has exactly the given barcode.
    """
    gens: List[Generator] = []
    cols: List[int] = []
    for bar in barcode.bars:
        j = len(gens)
        gens.append(Generator(distance_cone(graph, basepoint, bar.birth), bar.degree))
        if bar.death == INF:
            cols.append(0)
        else:
            gens.append(Generator(distance_cone(graph, basepoint, bar.death), bar.degree + 1))
            cols.append(1 << (j + 1))
            cols.append(0)
    return TwistedComplex(graph, tuple(gens), tuple(cols))


# ----------------------------------------------------------------------
# symmetric bottleneck distance
# ----------------------------------------------------------------------


def _bar_cost(x: Bar, y: Bar) -> Val:
    if x.death == INF or y.death == INF:
        if x.death != y.death:
            return INF
        return abs(x.birth - y.birth)
    return max(abs(x.birth - y.birth), abs(x.death - y.death))


def _half_length(x: Bar) -> Val:
    if x.death == INF:
        return INF
    return (x.death - x.birth) / 2


def _matchable(xs: Sequence[Bar], ys: Sequence[Bar], eps: Val) -> bool:
    """Perfect matching with deletions at half-length cost <= eps."""
    nx, ny = len(xs), len(ys)
    adj: List[List[int]] = [[] for _ in range(nx)]
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            if _bar_cost(x, y) <= eps:
                adj[i].append(j)
    del_x = [_half_length(x) <= eps for x in xs]
    del_y = [_half_length(y) <= eps for y in ys]
    # bars that cannot be deleted must be matched, injectively, both sides;
    # a matching saturating the undeletables on each side exists iff one
    # saturating both exists (Mendelsohn-Dulmage), so check the two sides.
    def saturates(need: List[int], adj_rows: List[List[int]], ncols: int) -> bool:
        match = [-1] * ncols
        def try_assign(r: int, seen: List[bool]) -> bool:
            for c in adj_rows[r]:
                if not seen[c]:
                    seen[c] = True
                    if match[c] == -1 or try_assign(match[c], seen):
                        match[c] = r
                        return True
            return False
        for r in need:
            if not try_assign(r, [False] * ncols):
                return False
        return True

    need_x = [i for i in range(nx) if not del_x[i]]
    need_y = [j for j in range(ny) if not del_y[j]]
    radj: List[List[int]] = [[] for _ in range(ny)]
    for i in range(nx):
        for j in adj[i]:
            radj[j].append(i)
    return saturates(need_x, adj, ny) and saturates(need_y, radj, nx)


def bottleneck(b1: Barcode, b2: Barcode) -> Val:
    """Classical bottleneck distance (per degree, then max)."""
    out: Val = Fraction(0)
    for d in sorted(set(b1.degrees()) | set(b2.degrees())):
        xs, ys = b1.in_degree(d), b2.in_degree(d)
        if sum(1 for x in xs if x.death == INF) != sum(1 for y in ys if y.death == INF):
            return INF
        cands = {Fraction(0)}
        for x in xs:
            h = _half_length(x)
            if h != INF:
                cands.add(h)
            for y in ys:
                c = _bar_cost(x, y)
                if c != INF:
                    cands.add(c)
        for y in ys:
            h = _half_length(y)
            if h != INF:
                cands.add(h)
        feas = [c for c in sorted(cands) if _matchable(xs, ys, c)]
        if not feas:
            return INF
        if feas[0] > out:
            out = feas[0]
    return out


# ----------------------------------------------------------------------
# asymmetric interleaving distance on barcodes
# ----------------------------------------------------------------------


def _pair_windows(I: Bar, J: Bar) -> Optional[Tuple[Val, Val, Val, Val]]:
    """Shift windows making the two-way relay through the pair the identity.

    The forward map may lower a generator level by at most the forward shift,
    so matching I = [p, q) to J = [r, s) needs a >= p - r (births) and
    a >= q - s (deaths), and symmetrically for the return shift b.  A finite
    bar can never relay an infinite one: the infinite bar's generator must
    land on a cycle, and a finite bar's birth generator is not one.

    Returns (a_min, a_sup, b_min, b_sup): usable iff a_min <= a < a_sup and
    b_min <= b < b_sup.  None if never usable.
    """
    p, q = I.birth, I.death
    r, s = J.birth, J.death
    if (q == INF) != (s == INF):
        return None
    a_min = max(Fraction(0), p - r) if q == INF else max(Fraction(0), p - r, q - s)
    b_min = max(Fraction(0), r - p) if q == INF else max(Fraction(0), r - p, s - q)
    return a_min, INF, b_min, INF


def _feasible(deg_data, a: Fraction, b: Fraction) -> bool:
    tot = a + b
    for bars1, bars2, windows in deg_data:
        live1 = [i for i, x in enumerate(bars1) if x.length() > tot]
        live2 = [j for j, y in enumerate(bars2) if y.length() > tot]
        if not live1 and not live2:
            continue
        adj: List[List[int]] = [[] for _ in range(len(bars1))]
        radj: List[List[int]] = [[] for _ in range(len(bars2))]
        for (i, j), (a0, a1, b0, b1) in windows.items():
            if a0 <= a and a < a1 and b0 <= b and b < b1:
                adj[i].append(j)
                radj[j].append(i)

        def saturates(need: List[int], rows: List[List[int]], ncols: int) -> bool:
            match = [-1] * ncols
            def try_assign(rr: int, seen: List[bool]) -> bool:
                for c in rows[rr]:
                    if not seen[c]:
                        seen[c] = True
                        if match[c] == -1 or try_assign(match[c], seen):
                            match[c] = rr
                            return True
                return False
            for rr in need:
                if not try_assign(rr, [False] * ncols):
                    return False
            return True

        if not saturates(live1, adj, len(bars2)):
            return False
        if not saturates(live2, radj, len(bars1)):
            return False
    return True


def interleaving_distance_barcodes(b1: Barcode, b2: Barcode) -> Val:
    """min a+b over shift pairs with a full one-way matching in both directions.

    Feasibility is upward closed in (a, b); the minimum therefore sits on the
    staircase of minimal corners, whose coordinates come from the finitely many
    window thresholds and bar lengths, scanned exactly below.
    """
    for d in sorted(set(b1.degrees()) | set(b2.degrees())):
        n_inf1 = sum(1 for x in b1.in_degree(d) if x.death == INF)
        n_inf2 = sum(1 for y in b2.in_degree(d) if y.death == INF)
        if n_inf1 != n_inf2:
            return INF

    deg_data = []
    a_cands = {Fraction(0)}
    b_cands = {Fraction(0)}
    sums = {Fraction(0)}
    for d in sorted(set(b1.degrees()) | set(b2.degrees())):
        bars1, bars2 = b1.in_degree(d), b2.in_degree(d)
        windows: Dict[Tuple[int, int], Tuple[Val, Val, Val, Val]] = {}
        for i, x in enumerate(bars1):
            for j, y in enumerate(bars2):
                w = _pair_windows(x, y)
                if w is not None:
                    windows[(i, j)] = w
                    a_cands.add(Fraction(w[0]))
                    b_cands.add(Fraction(w[2]))
        for x in bars1 + bars2:
            ln = x.length()
            if ln != INF:
                sums.add(ln)
        deg_data.append((bars1, bars2, windows))

    A = sorted(a_cands)
    B = sorted(b_cands)
    best: Val = INF

    # staircase over A x B: the minimal feasible b index is non-increasing in a
    jb = len(B) - 1
    for a in A:
        while jb >= 0 and _feasible(deg_data, a, B[jb]):
            jb -= 1
        if jb + 1 < len(B):
            tot = a + B[jb + 1]
            if tot < best:
                best = tot
    # diagonal segments a + b = length threshold
    for s in sorted(sums):
        if s >= best:
            break
        cands_on_seg = sorted(
            {a for a in A if 0 <= a <= s} | {s - b for b in B if 0 <= s - b}
        )
        for a in cands_on_seg:
            if _feasible(deg_data, a, s - a):
                if s < best:
                    best = s
                break
    return best
