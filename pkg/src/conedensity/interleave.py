"""Interleaving certificates between twisted complexes, and the shift distance.

An (a, b)-interleaving between complexes F and G is a pair of chain maps
u: F -> T_a G and v: G -> T_b F whose two composites are homotopic to the
canonical shift maps tau_{a+b}.  The distance gamma(F, G) is the infimum of
a+b over interleavings; it is asymmetric in the two shifts (a lives on the
F->G leg, b on the return leg) but symmetric as a function of (F, G).

Everything returned here is a *certificate*: the four matrices (u, v, and the
two homotopies) that make the relations hold, replayable by `verify()` with no
trust in the search that found them.  Searching is the only non-linear step:
the relations are bilinear in (u, v), so we enumerate u over a homotopy-class
transversal of H^0 Hom(F, T_a G) (each class either works for some (v, h, h)
or none of it does, since boundary freedom is absorbed by the homotopies) and
solve one GF(2) linear system per representative.  The enumeration is capped;
hitting the cap is reported as "undecided", never silently treated as a no.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from . import gf2
from .barcode import (CertificateError, barcode_of,
                      interleaving_distance_barcodes)
from .conv import NonLipschitzError, inf_convolution, is_lipschitz
from .graph import GraphPoint
from .rat import INF, NEG_INF, Val
from .twisted import (ChainMap, Generator, HomComplex, TwistedComplex,
                      is_null_homotopic, shift_map, tau_map, translate_map,
                      zero_map)

DEFAULT_CAP = 1 << 20


# ----------------------------------------------------------------------
# certificates
# ----------------------------------------------------------------------


def _diff_map(x: TwistedComplex) -> ChainMap:
    return ChainMap(x, x, x.diff, shift=1)


def _boundary_of(h: ChainMap) -> ChainMap:
    """d∘h + h∘d, one shift above h."""
    return _diff_map(h.dst).compose(h).add(h.compose(_diff_map(h.src)))


@dataclass(frozen=True)
class Certificate:
    """A replayable (a, b)-interleaving between u.src and v.src."""

    a: Fraction
    b: Fraction
    u: ChainMap          # F -> T_a G
    v: ChainMap          # G -> T_b F
    h_src: ChainMap      # F -> T_{a+b} F, shift -1
    h_dst: ChainMap      # G -> T_{a+b} G, shift -1

    @property
    def source(self) -> TwistedComplex:
        return self.u.src

    @property
    def target(self) -> TwistedComplex:
        return self.v.src

    def total(self) -> Fraction:
        return self.a + self.b

    def verify(self) -> None:
        F, G = self.u.src, self.v.src
        if self.a < 0 or self.b < 0:
            raise CertificateError("negative shift")
        if self.u.dst != G.translate(self.a):
            raise CertificateError("u has the wrong target")
        if self.v.dst != F.translate(self.b):
            raise CertificateError("v has the wrong target")
        self.u.validate()
        self.v.validate()
        s = self.total()
        if self.h_src.shift != -1 or self.h_dst.shift != -1:
            raise CertificateError("homotopies must have shift -1")
        if self.h_src.src != F or self.h_src.dst != F.translate(s):
            raise CertificateError("h_src has the wrong type")
        if self.h_dst.src != G or self.h_dst.dst != G.translate(s):
            raise CertificateError("h_dst has the wrong type")
        self.h_src.validate(require_chain=False)
        self.h_dst.validate(require_chain=False)
        comp_f = translate_map(self.v, self.a).compose(self.u)
        want_f = tau_map(F, s).add(_boundary_of(self.h_src))
        if comp_f.cols != want_f.cols:
            raise CertificateError("source relation fails")
        comp_g = translate_map(self.u, self.b).compose(self.v)
        want_g = tau_map(G, s).add(_boundary_of(self.h_dst))
        if comp_g.cols != want_g.cols:
            raise CertificateError("target relation fails")

    def flipped(self) -> "Certificate":
        return Certificate(self.b, self.a, self.v, self.u, self.h_dst, self.h_src)


def identity_certificate(F: TwistedComplex) -> Certificate:
    ident = ChainMap(F, F.translate(Fraction(0)), tuple(1 << j for j in range(F.n())))
    h = zero_map(F, F.translate(Fraction(0)), shift=-1)
    return Certificate(Fraction(0), Fraction(0), ident, ident, h, h)


def certificate_from_inverse_pair(a, b, u: ChainMap, v: ChainMap) -> Certificate:
    """Certificate whose composite relations hold strictly (zero homotopies)."""
    a, b = Fraction(a), Fraction(b)
    F, G = u.src, v.src
    s = a + b
    cert = Certificate(a, b, u, v,
                       zero_map(F, F.translate(s), shift=-1),
                       zero_map(G, G.translate(s), shift=-1))
    cert.verify()
    return cert


def compose_certificates(c1: Certificate, c2: Certificate) -> Certificate:
    """Certificate F ~ H from F ~ G and G ~ H; shifts add.

    The composite homotopies are the translated sums
      h_F = lift(c1.h_src) + T(v1) ∘ c2.h_dst ∘ u1
      h_H = lift(c2.h_dst') + T(u2) ∘ c1.h_dst ∘ v2
    which is the GF(2) shadow of pasting the two interleaving squares.
    """
    F, G = c1.u.src, c1.v.src
    G2, H = c2.u.src, c2.v.src
    if G != G2:
        raise CertificateError("certificates do not share the middle complex")
    a, b = c1.a + c2.a, c1.b + c2.b
    s = a + b
    u = translate_map(c2.u, c1.a).compose(c1.u)                 # F -> T_a H
    v = translate_map(c1.v, c2.b).compose(c2.v)                 # H -> T_b F
    # h for F: lift c1.h_src into T_s, plus v1 (translated) ∘ h_dst(c2) ∘ u1
    lift_f = ChainMap(F, F.translate(s), c1.h_src.cols, shift=-1)
    via_g = translate_map(c1.v, c1.a + c2.a + c2.b).compose(
        ChainMap(c1.u.dst, G.translate(c1.a + c2.a + c2.b), c2.h_dst.cols, shift=-1)
    ).compose(c1.u)
    h_src = lift_f.add(via_g)
    # mirror for H
    lift_h = ChainMap(H, H.translate(s), c2.h_dst.cols, shift=-1)
    via_g2 = translate_map(c2.u, c2.b + c1.b + c1.a).compose(
        ChainMap(c2.v.dst, G.translate(c2.b + c1.b + c1.a), c1.h_dst.cols, shift=-1)
    ).compose(c2.v)
    h_dst = lift_h.add(via_g2)
    cert = Certificate(a, b, u, v, h_src, h_dst)
    cert.verify()
    return cert


def sum_certificates(certs: Sequence[Certificate]) -> Certificate:
    """Block-diagonal certificate between the direct sums, at the max shifts."""
    from .twisted import direct_sum

    if not certs:
        raise CertificateError("nothing to sum")
    a = max(c.a for c in certs)
    b = max(c.b for c in certs)
    s = a + b
    F = certs[0].u.src
    G = certs[0].v.src
    for c in certs[1:]:
        F = direct_sum(F, c.u.src)
        G = direct_sum(G, c.v.src)
    u_cols: List[int] = []
    v_cols: List[int] = []
    hf_cols: List[int] = []
    hg_cols: List[int] = []
    offF = offG = 0
    for c in certs:
        nf, ng = c.u.src.n(), c.v.src.n()
        u_cols.extend(col << offG for col in c.u.cols)
        v_cols.extend(col << offF for col in c.v.cols)
        hf_cols.extend(col << offF for col in c.h_src.cols)
        hg_cols.extend(col << offG for col in c.h_dst.cols)
        offF += nf
        offG += ng
    cert = Certificate(
        a, b,
        ChainMap(F, G.translate(a), tuple(u_cols)),
        ChainMap(G, F.translate(b), tuple(v_cols)),
        ChainMap(F, F.translate(s), tuple(hf_cols), shift=-1),
        ChainMap(G, G.translate(s), tuple(hg_cols), shift=-1),
    )
    cert.verify()
    return cert


def translate_certificate(cert: Certificate, c) -> Certificate:
    """The same certificate between the two complexes pushed up by ``c``.

    Every matrix is reused verbatim; raising all levels by the same amount
    changes no entry-legality comparison.
    """
    c = Fraction(c)
    if c == 0:
        return cert
    if c < 0:
        raise CertificateError("can only translate certificates upward")
    out = Certificate(
        cert.a, cert.b,
        translate_map(cert.u, c), translate_map(cert.v, c),
        translate_map(cert.h_src, c), translate_map(cert.h_dst, c),
    )
    out.verify()
    return out


def shift_certificate(cert: Certificate, k: int) -> Certificate:
    """The same certificate between the homologically shifted complexes.

    All four matrices survive verbatim: shifting moves every degree by the
    same amount, so neither entry legality nor any composite changes.
    """
    out = Certificate(
        cert.a, cert.b,
        shift_map(cert.u, k), shift_map(cert.v, k),
        shift_map(cert.h_src, k), shift_map(cert.h_dst, k),
    )
    out.verify()
    return out


def complete_certificate(a, b, u: ChainMap, v: ChainMap) -> Certificate:
    """Fill in the homotopies for a fixed map pair, or fail loudly.

    With u and v pinned the two composite relations decouple into
    independent null-homotopy problems, one linear solve each.
    """
    a, b = Fraction(a), Fraction(b)
    if a < 0 or b < 0:
        raise CertificateError("shifts must be nonnegative")
    F, G = u.src, v.src
    s = a + b
    if u.dst != G.translate(a):
        raise CertificateError("u has the wrong target")
    if v.dst != F.translate(b):
        raise CertificateError("v has the wrong target")
    u.validate()
    v.validate()
    defect_f = translate_map(v, a).compose(u).add(tau_map(F, s))
    h_src = (zero_map(F, F.translate(s), shift=-1) if defect_f.is_zero()
             else is_null_homotopic(defect_f))
    if h_src is None:
        raise CertificateError("source composite is not homotopic to the shift map")
    defect_g = translate_map(u, b).compose(v).add(tau_map(G, s))
    h_dst = (zero_map(G, G.translate(s), shift=-1) if defect_g.is_zero()
             else is_null_homotopic(defect_g))
    if h_dst is None:
        raise CertificateError("target composite is not homotopic to the shift map")
    cert = Certificate(a, b, u, v, h_src, h_dst)
    cert.verify()
    return cert


def wrapped_translate(C: TwistedComplex, c, slope=1) -> Tuple[TwistedComplex, ChainMap]:
    """Translate by c, smoothing every generator over a radius-c window first.

    Each generator function is inf-convolved over radius ``c`` at the given
    slope and then raised by ``c``.  Generators already in the slope class
    are fixed by the smoothing, so there the result is exactly
    ``C.translate(c)``; anything outside the class is rejected, because the
    smoothed complex would not receive a canonical comparison map.  Returns
    the new complex together with that comparison map.
    """
    c = Fraction(c)
    if c < 0:
        raise CertificateError("translation must be nonnegative")
    for g in C.gens:
        if not is_lipschitz(g.fn, slope):
            raise NonLipschitzError(
                "wrapped translation needs every generator in the slope class")
    gens = tuple(Generator(inf_convolution(g.fn, c, slope).add_const(c), g.degree)
                 for g in C.gens)
    out = TwistedComplex(C.graph, gens, C.diff)
    out.validate()
    return out, ChainMap(C, out, tuple(1 << j for j in range(C.n())))


# ----------------------------------------------------------------------
# the bilinear certificate search at a fixed (a, b)
# ----------------------------------------------------------------------


@dataclass
class SearchOutcome:
    status: str  # "interleaved" | "refuted" | "undecided"
    certificate: Optional[Certificate] = None
    classes_tried: int = 0

    def decided(self) -> bool:
        return self.status != "undecided"


def _free_dim(hom: HomComplex) -> int:
    d0 = hom.d_cols(0)
    dm1 = hom.d_cols(-1)
    z = hom.dim(0) - gf2.rank(d0)
    bnd = gf2.rank(dm1)
    return z - bnd


class _ProbeSolver:
    """Shared elimination state for one (a, b) probe.

    The relations are bilinear in (u, v); with u fixed they ask for a chain
    map v whose two composites agree with tau modulo boundaries.  Everything
    u-independent is eliminated once: v ranges over a cycle basis, and the
    homotopy blocks are replaced by residues modulo the boundary spans, so
    each enumerated class costs one small solve over cycle coefficients.
    """

    def __init__(self, F: TwistedComplex, G: TwistedComplex, a: Fraction,
                 b: Fraction, hom_v: HomComplex, hom_f: HomComplex,
                 hom_g: HomComplex):
        self.F, self.G, self.a, self.b = F, G, a, b
        self.hom_v, self.hom_f, self.hom_g = hom_v, hom_f, hom_g
        self.vbasis = hom_v.basis.get(0, [])
        nv = len(self.vbasis)
        self.cycles = gf2.nullspace(hom_v.d_cols(0)) if nv else []
        self.span_f = gf2.Span(hom_f.d_cols(-1))
        self.span_g = gf2.Span(hom_g.d_cols(-1))
        self.tau_f = hom_f.pack(tau_map(F, a + b))
        self.tau_g = hom_g.pack(tau_map(G, a + b))
        self.res_tau_f = self.span_f.residue(self.tau_f)
        self.res_tau_g = self.span_g.residue(self.tau_g)
        self.rtab_f = [self.span_f.residue(1 << t) for t in range(hom_f.dim(0))]
        self.rtab_g = [self.span_g.residue(1 << t) for t in range(hom_g.dim(0))]
        self.idx_f0 = hom_f.index.get(0, {})
        self.idx_g0 = hom_g.index.get(0, {})
        # v entries grouped by their source generator j
        self.by_src: Dict[int, List[Tuple[int, int]]] = {}
        for t, (i, j) in enumerate(self.vbasis):
            self.by_src.setdefault(j, []).append((t, i))
        self.r2 = hom_f.dim(0)

    def solve(self, u: ChainMap) -> Optional[Certificate]:
        nv = len(self.vbasis)
        # residues of the composite action of each elementary v entry
        col_f = [0] * nv
        col_g = [0] * nv
        for k, ucol in enumerate(u.cols):
            for j in gf2.bits(ucol):
                for (t, i) in self.by_src.get(j, ()):
                    # T_a(v_t)∘u gains entry (i <- k)
                    col_f[t] ^= self.rtab_f[self.idx_f0[(i, k)]]
        for t, (i, j) in enumerate(self.vbasis):
            acc = 0
            for m in gf2.bits(u.cols[i]):
                # T_b(u)∘v_t gains entry (m <- j)
                acc ^= self.rtab_g[self.idx_g0[(m, j)]]
            col_g[t] = acc
        cols = []
        for z in self.cycles:
            cf = cg = 0
            for t in gf2.bits(z):
                cf ^= col_f[t]
                cg ^= col_g[t]
            cols.append(cf | (cg << self.r2))
        target = self.res_tau_f | (self.res_tau_g << self.r2)
        x = gf2.solve(cols, target)
        if x is None:
            return None
        vvec = 0
        for c in gf2.bits(x):
            vvec ^= self.cycles[c]
        v = self.hom_v.unpack(vvec, 0)
        # recover the homotopies (guaranteed solvable: residues matched)
        comp_f = translate_map(v, self.a).compose(u)
        hf = gf2.solve(self.hom_f.d_cols(-1), self.hom_f.pack(comp_f) ^ self.tau_f)
        comp_g = translate_map(u, self.b).compose(v)
        hg = gf2.solve(self.hom_g.d_cols(-1), self.hom_g.pack(comp_g) ^ self.tau_g)
        if hf is None or hg is None:
            raise CertificateError("homotopy recovery failed after a residue match")
        cert = Certificate(self.a, self.b, u, v,
                           self.hom_f.unpack(hf, -1), self.hom_g.unpack(hg, -1))
        cert.verify()
        return cert


SupMatrix = List[List[Val]]


def _sup_matrix(src: TwistedComplex, dst: TwistedComplex) -> SupMatrix:
    """mat[j][i] = sup(src_j - dst_i): the least c making entry (i <- j) legal
    into the c-translate of dst."""
    return [[src.gens[j].fn.sup_difference(dst.gens[i].fn)
             for i in range(dst.n())] for j in range(src.n())]


@dataclass(frozen=True)
class PairThresholds:
    """All pairwise sup-differences for one pair of complexes.

    Probing many shift cells rebuilds the four hom complexes over and over;
    with these matrices in hand each rebuild is a threshold test per entry
    instead of a piecewise-linear comparison.
    """

    fg: SupMatrix
    gf: SupMatrix
    ff: SupMatrix
    gg: SupMatrix

    @staticmethod
    def build(F: TwistedComplex, G: TwistedComplex) -> "PairThresholds":
        return PairThresholds(_sup_matrix(F, G), _sup_matrix(G, F),
                              _sup_matrix(F, F), _sup_matrix(G, G))

    def swapped(self) -> "PairThresholds":
        return PairThresholds(self.gf, self.fg, self.gg, self.ff)


def _within(mat: SupMatrix, c: Fraction):
    return lambda i, j: mat[j][i] <= c


def check_interleaving(F: TwistedComplex, G: TwistedComplex, a, b,
                       cap: int = DEFAULT_CAP,
                       seeds_u: Sequence[ChainMap] = (),
                       seeds_v: Sequence[ChainMap] = (),
                       thresholds: Optional[PairThresholds] = None,
                       _no_swap: bool = False) -> SearchOutcome:
    """Search for an (a, b)-interleaving; exhaustive up to the class cap."""
    a, b = Fraction(a), Fraction(b)
    if a < 0 or b < 0:
        raise CertificateError("shifts must be nonnegative")
    s = a + b
    th = thresholds if thresholds is not None else PairThresholds.build(F, G)
    Ta_G = G.translate(a)
    Tb_F = F.translate(b)
    hom_u = HomComplex.build(F, Ta_G, (-1, 0, 1), allowed=_within(th.fg, a))
    hom_v = HomComplex.build(G, Tb_F, (-1, 0, 1), allowed=_within(th.gf, b))
    hom_f = HomComplex.build(F, F.translate(s), (-1, 0), allowed=_within(th.ff, s))
    hom_g = HomComplex.build(G, G.translate(s), (-1, 0), allowed=_within(th.gg, s))

    if not _no_swap:
        # enumerate on the thinner side
        if _free_dim(hom_v) < _free_dim(hom_u):
            out = check_interleaving(G, F, b, a, cap=cap, seeds_u=seeds_v,
                                     seeds_v=seeds_u, thresholds=th.swapped(),
                                     _no_swap=True)
            if out.certificate is not None:
                out.certificate = out.certificate.flipped()
            return out

    solver = _ProbeSolver(F, G, a, b, hom_v, hom_f, hom_g)
    tried = 0
    for seed in seeds_u:
        if seed.src != F or seed.dst != Ta_G or seed.shift != 0:
            continue
        try:
            seed.validate()
        except Exception:
            continue
        tried += 1
        cert = solver.solve(seed)
        if cert is not None:
            return SearchOutcome("interleaved", cert, tried)

    fd = _free_dim(hom_u)
    if fd > 60 or (1 << max(fd, 0)) > cap:
        return SearchOutcome("undecided", None, tried)
    from .twisted import homotopy_classes

    try:
        for u in homotopy_classes(hom_u, 0, cap=cap):
            tried += 1
            cert = solver.solve(u)
            if cert is not None:
                return SearchOutcome("interleaved", cert, tried)
    except OverflowError:
        return SearchOutcome("undecided", None, tried)
    return SearchOutcome("refuted", None, tried)


# ----------------------------------------------------------------------
# the distance walk
# ----------------------------------------------------------------------


def _clip(x: Val) -> Optional[Fraction]:
    """Threshold value of a sup-difference: never-allowed pairs give None."""
    if x == INF:
        return None
    if x == NEG_INF or x <= 0:
        return Fraction(0)
    return Fraction(x)


def shift_candidates(F: TwistedComplex, G: TwistedComplex,
                     thresholds: Optional[PairThresholds] = None,
                     ) -> Tuple[List[Fraction], List[Fraction], List[Fraction]]:
    """Threshold grids (A, B, S) where some hom basis changes.

    A: shifts where a map entry F_j -> T_a G_i becomes allowed; B: the same for
    G -> T_b F; S: internal thresholds of F and of G (homotopy and tau entries
    depend only on a+b).
    """
    th = thresholds if thresholds is not None else PairThresholds.build(F, G)
    A = {Fraction(0)}
    B = {Fraction(0)}
    S = {Fraction(0)}
    for row in th.fg:
        A.update(c for c in map(_clip, row) if c is not None)
    for row in th.gf:
        B.update(c for c in map(_clip, row) if c is not None)
    for mat in (th.ff, th.gg):
        for row in mat:
            S.update(c for c in map(_clip, row) if c is not None)
    return sorted(A), sorted(B), sorted(S)


def critical_shifts(F: TwistedComplex, G: TwistedComplex) -> List[Fraction]:
    """Merged sorted grid of every shift at which any hom basis can change."""
    A, B, S = shift_candidates(F, G)
    return sorted(set(A) | set(B) | set(S))


def search_cells(F: TwistedComplex, G: TwistedComplex,
                 cells: Sequence[Tuple[Fraction, Fraction]],
                 u_cols: Optional[Tuple[int, ...]] = None,
                 v_cols: Optional[Tuple[int, ...]] = None,
                 cap: int = DEFAULT_CAP,
                 thresholds: Optional[PairThresholds] = None,
                 ) -> Tuple[Optional[Certificate], Tuple[Tuple[Fraction, Fraction, str], ...]]:
    """Probe shift cells in order, seeding each with the same fixed matrices.

    All but the last cell run seeds-only (enumeration cap 1): a candidate map
    that fails at a tight cell usually succeeds a rung up, so the expensive
    class enumeration is deferred to the final, most generous cell.  Returns
    the first certificate found and the (a, b, status) log.
    """
    th = thresholds if thresholds is not None else PairThresholds.build(F, G)
    attempts: List[Tuple[Fraction, Fraction, str]] = []
    last = len(cells) - 1
    for k, (aa, bb) in enumerate(cells):
        seeds_u = (ChainMap(F, G.translate(aa), u_cols),) if u_cols is not None else ()
        seeds_v = (ChainMap(G, F.translate(bb), v_cols),) if v_cols is not None else ()
        out = check_interleaving(F, G, aa, bb, cap=cap if k == last else 1,
                                 seeds_u=seeds_u, seeds_v=seeds_v, thresholds=th)
        attempts.append((aa, bb, out.status))
        if out.status == "interleaved":
            return out.certificate, tuple(attempts)
    return None, tuple(attempts)


@dataclass
class DistanceReport:
    lower: Val
    upper: Val
    exact: bool
    certificate: Optional[Certificate] = None
    evaluations: List[Tuple[Fraction, Fraction, str]] = field(default_factory=list)
    undecided: int = 0

    @property
    def value(self) -> Val:
        if not self.exact:
            raise CertificateError("distance not decided exactly; use lower/upper")
        return self.upper


def interleaving_distance(F: TwistedComplex, G: TwistedComplex,
                          cap: int = DEFAULT_CAP,
                          upper_hints: Sequence[Certificate] = (),
                          stalk_points: Sequence[GraphPoint] = (),
                          probe_budget: Optional[int] = None) -> DistanceReport:
    """gamma(F, G) = inf a+b, searched over the threshold staircase.

    Feasibility is upward closed (compose any interleaving with tau), so the
    minimum sits on staircase corners or on diagonal segments a+b = internal
    threshold; both families are scanned with the capped searcher.  If every
    call is decided the result is exact; otherwise lower/upper bounds are
    reported, seeded by verified upper hints and stalk barcode lower bounds.
    A probe budget limits the number of searcher calls, trading exactness
    for time; the bounds stay valid.
    """
    report = DistanceReport(lower=Fraction(0), upper=INF, exact=False)
    best_cert: Optional[Certificate] = None
    undecided_sums: List[Fraction] = []
    cache: Dict[Tuple[Fraction, Fraction], str] = {}
    refuted: List[Tuple[Fraction, Fraction]] = []  # Pareto-maximal refutations
    budget_left = probe_budget
    starved = False

    for cert in upper_hints:
        if cert.u.src != F or cert.v.src != G:
            continue
        cert.verify()
        if cert.total() < report.upper:
            report.upper = cert.total()
            best_cert = cert

    for p in stalk_points:
        lb = interleaving_distance_barcodes(barcode_of(F, p), barcode_of(G, p))
        if lb > report.lower:
            report.lower = lb
    if report.lower == INF:
        # a stalk already separates the complexes at every finite shift
        report.upper = INF
        report.exact = True
        return report

    th = PairThresholds.build(F, G)
    A, B, S = shift_candidates(F, G, thresholds=th)
    top_a = A[-1] + S[-1]
    top_b = B[-1] + S[-1]

    def note_refuted(a: Fraction, b: Fraction) -> None:
        keep = [(ra, rb) for (ra, rb) in refuted if not (ra <= a and rb <= b)]
        for (ra, rb) in keep:
            if a <= ra and b <= rb:
                return  # already dominated
        keep.append((a, b))
        refuted[:] = keep

    def probe(a: Fraction, b: Fraction) -> str:
        nonlocal best_cert, budget_left, starved
        got = cache.get((a, b))
        if got is not None:
            return got
        if report.upper != INF and a + b >= report.upper:
            return "skipped"
        if any(a <= ra and b <= rb for (ra, rb) in refuted):
            cache[(a, b)] = "refuted"  # downward closure of infeasibility
            return "refuted"
        if budget_left is not None:
            if budget_left <= 0:
                starved = True
                return "starved"
            budget_left -= 1
        out = check_interleaving(F, G, a, b, cap=cap, thresholds=th)
        report.evaluations.append((a, b, out.status))
        cache[(a, b)] = out.status
        if out.status == "interleaved" and out.certificate.total() < report.upper:
            report.upper = out.certificate.total()
            best_cert = out.certificate
        elif out.status == "refuted":
            note_refuted(a, b)
        elif out.status == "undecided":
            undecided_sums.append(a + b)
        return out.status

    # staircase over A x B: descend b while not decisively refuted
    jb = len(B) - 1
    for a in A:
        while jb >= 0 and probe(a, B[jb]) != "refuted":
            jb -= 1
        if jb < 0:
            break

    # nothing feasible on the grid: one decisive probe beyond every threshold
    if report.upper == INF and probe(top_a, top_b) == "refuted":
        report.certificate = None
        report.lower = INF
        report.upper = INF
        report.exact = not undecided_sums
        report.undecided = len(undecided_sums)
        return report

    # diagonal segments a + b = s, ascending
    for s in S:
        if report.upper != INF and s >= report.upper:
            break
        seg = sorted({x for x in A if x <= s} | {s - y for y in B if y <= s})
        for a in seg:
            if probe(a, s - a) == "interleaved":
                break

    report.certificate = best_cert
    report.undecided = len(undecided_sums)
    if report.upper != INF:
        if report.lower == report.upper:
            report.exact = True
        elif not starved and all(s >= report.upper for s in undecided_sums):
            report.exact = True
            report.lower = report.upper
    return report


def distance_exact(F: TwistedComplex, G: TwistedComplex, cap: int = DEFAULT_CAP) -> DistanceReport:
    rep = interleaving_distance(F, G, cap=cap)
    return rep


def distance_bounds(F: TwistedComplex, G: TwistedComplex, cap: int = DEFAULT_CAP,
                    upper_hints: Sequence[Certificate] = (),
                    stalk_points: Sequence[GraphPoint] = (),
                    probe_budget: Optional[int] = None) -> DistanceReport:
    return interleaving_distance(F, G, cap=cap, upper_hints=upper_hints,
                                 stalk_points=stalk_points,
                                 probe_budget=probe_budget)


def stalk_lower_bound(F: TwistedComplex, G: TwistedComplex,
                      points: Sequence[GraphPoint]) -> Val:
    out: Val = Fraction(0)
    for p in points:
        d = interleaving_distance_barcodes(barcode_of(F, p), barcode_of(G, p))
        if d > out:
            out = d
    return out
