"""Twisted complexes of epigraph generators over GF(2).

A generator is a tame function with an integer (cohomological) degree; it
stands for the corresponding epigraph sheaf placed in that degree.  A one-way
morphism exists from generator f to generator g exactly when f <= g pointwise,
and the hom space is then one-dimensional, so matrices over the generators are
plain GF(2) matrices whose entries are subject to the <=-constraint.

A twisted complex is a finite family of generators with a degree-1 differential
whose entries obey the constraint and which squares to zero.  Chain maps,
homotopies, shifts, translations and mapping cones are all matrix-level
operations here; `hom_complex` packages the allowed entry pairs between two
complexes into an explicit GF(2) cochain complex so that "is this map
null-homotopic" and "enumerate chain maps up to homotopy" become finite linear
algebra.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from . import gf2
from .graph import GraphPoint, MetricGraph
from .rat import INF, Val
from .tame import TameFunction

TWISTED_FORMAT_VERSION = "1"


class ComplexError(ValueError):
    pass


@dataclass(frozen=True)
class Generator:
    fn: TameFunction
    degree: int


@dataclass(frozen=True)
class TwistedComplex:
    graph: MetricGraph
    gens: Tuple[Generator, ...]
    diff: Tuple[int, ...]  # diff[j] = bitmask of targets of generator j

    def __post_init__(self):
        if len(self.diff) != len(self.gens):
            raise ComplexError("differential shape mismatch")

    # -- structure ------------------------------------------------------

    def n(self) -> int:
        return len(self.gens)

    def degrees(self) -> List[int]:
        return [g.degree for g in self.gens]

    def entry_allowed(self, i: int, j: int) -> bool:
        """May the differential send generator j into generator i?"""
        gi, gj = self.gens[i], self.gens[j]
        return gi.degree == gj.degree + 1 and gj.fn.pointwise_leq(gi.fn)

    def validate(self) -> None:
        for j, col in enumerate(self.diff):
            for i in gf2.bits(col):
                if i >= self.n():
                    raise ComplexError(f"column {j} hits unknown generator {i}")
                if not self.entry_allowed(i, j):
                    raise ComplexError(f"illegal differential entry {i} <- {j}")
        for j in range(self.n()):
            if gf2.apply_cols(list(self.diff), self.diff[j]) != 0:
                raise ComplexError(f"differential does not square to zero at column {j}")
        for g in self.gens:
            if g.fn.graph != self.graph:
                raise ComplexError("generator lives on the wrong graph")

    # -- functors -------------------------------------------------------

    def shift(self, k: int = 1) -> "TwistedComplex":
        """Homological shift [k]: degrees drop by k, differential unchanged."""
        gens = tuple(Generator(g.fn, g.degree - k) for g in self.gens)
        return TwistedComplex(self.graph, gens, self.diff)

    def translate(self, c) -> "TwistedComplex":
        """Push every generator up by c (c may be negative)."""
        gens = tuple(Generator(g.fn.add_const(c), g.degree) for g in self.gens)
        return TwistedComplex(self.graph, gens, self.diff)

    def tensor_indicator(self, U) -> "TwistedComplex":
        """Restrict every generator to a closed subset.

        Differential entries survive: f <= g pointwise implies the same on U
        (off U both sides are +inf, and the hom space stays one-dimensional).
        """
        gens = tuple(Generator(g.fn.tensor_indicator(U), g.degree) for g in self.gens)
        return TwistedComplex(self.graph, gens, self.diff)

    def stalk_at(self, p: GraphPoint) -> Tuple[List[int], List[Val], List[int], List[int]]:
        """Quotient onto the generators finite at p.

        Returns (kept original indices, levels = fn(p), degrees, columns in the
        kept indexing).  Dropping the +inf generators is legitimate: nothing
        finite at p maps out of them (a <= constraint into a finite function
        fails from +inf), so they form a subcomplex and this is the quotient.
        """
        kept = [j for j, g in enumerate(self.gens) if g.fn.value_at(p) != INF]
        pos = {j: k for k, j in enumerate(kept)}
        levels = [self.gens[j].fn.value_at(p) for j in kept]
        degs = [self.gens[j].degree for j in kept]
        cols = []
        for j in kept:
            m = 0
            for i in gf2.bits(self.diff[j]):
                if i in pos:
                    m |= 1 << pos[i]
            cols.append(m)
        return kept, levels, degs, cols


def direct_sum(a: TwistedComplex, b: TwistedComplex) -> TwistedComplex:
    if a.graph != b.graph:
        raise ComplexError("direct sum across different graphs")
    off = a.n()
    gens = a.gens + b.gens
    diff = list(a.diff) + [col << off for col in b.diff]
    return TwistedComplex(a.graph, gens, tuple(diff))


# ----------------------------------------------------------------------
# maps between complexes
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class ChainMap:
    """A degree-`shift` matrix of allowed entries from src to dst.

    cols[j] = bitmask over dst generators.  shift 0 with the chain condition
    is an honest map of complexes; shift -1 is homotopy data.
    """

    src: TwistedComplex
    dst: TwistedComplex
    cols: Tuple[int, ...]
    shift: int = 0

    def __post_init__(self):
        if len(self.cols) != self.src.n():
            raise ComplexError("map shape mismatch")

    def entry_allowed(self, i: int, j: int) -> bool:
        gi, gj = self.dst.gens[i], self.src.gens[j]
        return gi.degree == gj.degree + self.shift and gj.fn.pointwise_leq(gi.fn)

    def validate(self, require_chain: bool = True) -> None:
        for j, col in enumerate(self.cols):
            for i in gf2.bits(col):
                if not self.entry_allowed(i, j):
                    raise ComplexError(f"illegal map entry {i} <- {j}")
        if require_chain and self.shift == 0 and not self.is_chain_map():
            raise ComplexError("not a chain map")

    def is_chain_map(self) -> bool:
        lhs = gf2.mat_mul(list(self.dst.diff), list(self.cols))
        rhs = gf2.mat_mul(list(self.cols), list(self.src.diff))
        return lhs == rhs

    def compose(self, first: "ChainMap") -> "ChainMap":
        """self ∘ first (first applied first)."""
        if first.dst is not self.src and first.dst != self.src:
            raise ComplexError("composition type mismatch")
        cols = tuple(gf2.apply_cols(list(self.cols), c) for c in first.cols)
        return ChainMap(first.src, self.dst, cols, self.shift + first.shift)

    def add(self, other: "ChainMap") -> "ChainMap":
        if other.src != self.src or other.dst != self.dst or other.shift != self.shift:
            raise ComplexError("sum type mismatch")
        return ChainMap(self.src, self.dst, tuple(a ^ b for a, b in zip(self.cols, other.cols)), self.shift)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.cols)


def zero_map(src: TwistedComplex, dst: TwistedComplex, shift: int = 0) -> ChainMap:
    return ChainMap(src, dst, tuple(0 for _ in range(src.n())), shift)


def identity_map(c: TwistedComplex) -> ChainMap:
    return ChainMap(c, c, tuple(1 << j for j in range(c.n())))


def tau_map(c: TwistedComplex, a) -> ChainMap:
    """The canonical map F -> T_a F (a >= 0): identity on every generator."""
    a = Fraction(a)
    if a < 0:
        raise ComplexError("tau needs a nonnegative shift")
    return ChainMap(c, c.translate(a), tuple(1 << j for j in range(c.n())))


def translate_map(phi: ChainMap, a) -> ChainMap:
    """Apply the translation functor to a map: T_a(phi) : T_a src -> T_a dst."""
    return ChainMap(phi.src.translate(a), phi.dst.translate(a), phi.cols, phi.shift)


def shift_map(phi: ChainMap, k: int = 1) -> ChainMap:
    return ChainMap(phi.src.shift(k), phi.dst.shift(k), phi.cols, phi.shift)


def mapping_cone(phi: ChainMap) -> TwistedComplex:
    """Cone(phi: F -> G) = F[1] ⊕ G with differential [[d_F, 0], [phi, d_G]]."""
    if phi.shift != 0:
        raise ComplexError("cone of a non-chain map")
    F, G = phi.src, phi.dst
    fs = F.shift(1)
    off = F.n()
    gens = fs.gens + G.gens
    diff: List[int] = []
    for j in range(F.n()):
        diff.append(fs.diff[j] | (phi.cols[j] << off))
    for j in range(G.n()):
        diff.append(G.diff[j] << off)
    return TwistedComplex(F.graph, gens, tuple(diff))


def cone_inclusion(phi: ChainMap, cone: TwistedComplex) -> ChainMap:
    """G -> Cone(phi)."""
    off = phi.src.n()
    return ChainMap(phi.dst, cone, tuple(1 << (off + j) for j in range(phi.dst.n())))


def cone_projection(phi: ChainMap, cone: TwistedComplex) -> ChainMap:
    """Cone(phi) -> F[1]."""
    fs = phi.src.shift(1)
    cols = [1 << j for j in range(phi.src.n())] + [0] * phi.dst.n()
    return ChainMap(cone, fs, tuple(cols))


# ----------------------------------------------------------------------
# hom complexes
# ----------------------------------------------------------------------


@dataclass
class HomComplex:
    """The mapping complex between two twisted complexes.

    basis[k] lists the allowed entry pairs (i, j) of degree k (dst degree minus
    src degree); D sends degree k to k+1 by pre/post-composition with the two
    differentials.  Chain maps F->G are the 0-cycles; null-homotopic ones are
    the 0-boundaries.
    """

    src: TwistedComplex
    dst: TwistedComplex
    basis: Dict[int, List[Tuple[int, int]]]
    index: Dict[int, Dict[Tuple[int, int], int]]

    @staticmethod
    def build(src: TwistedComplex, dst: TwistedComplex, degrees: Iterable[int],
              allowed: Optional[Callable[[int, int], bool]] = None) -> "HomComplex":
        """Collect the allowed entries in the requested degrees.

        `allowed(i, j)` replaces the function comparison when given (degree
        filtering still applies); callers holding precomputed sup-difference
        thresholds use it to avoid re-walking the piecewise-linear data.
        """
        degs = sorted(set(degrees))
        basis: Dict[int, List[Tuple[int, int]]] = {k: [] for k in degs}
        leq_cache: Dict[Tuple[int, int], bool] = {}

        def leq(j: int, i: int) -> bool:
            key = (j, i)
            got = leq_cache.get(key)
            if got is None:
                got = (allowed(i, j) if allowed is not None
                       else src.gens[j].fn.pointwise_leq(dst.gens[i].fn))
                leq_cache[key] = got
            return got

        for i, gi in enumerate(dst.gens):
            for j, gj in enumerate(src.gens):
                k = gi.degree - gj.degree
                if k in basis and leq(j, i):
                    basis[k].append((i, j))
        index = {k: {p: t for t, p in enumerate(v)} for k, v in basis.items()}
        return HomComplex(src, dst, basis, index)

    def dim(self, k: int) -> int:
        return len(self.basis.get(k, ()))

    def pack(self, phi: ChainMap) -> int:
        k = phi.shift
        vec = 0
        for j, col in enumerate(phi.cols):
            for i in gf2.bits(col):
                t = self.index[k].get((i, j))
                if t is None:
                    raise ComplexError(f"map entry {i} <- {j} outside the hom basis")
                vec |= 1 << t
        return vec

    def unpack(self, vec: int, k: int) -> ChainMap:
        cols = [0] * self.src.n()
        for t in gf2.bits(vec):
            i, j = self.basis[k][t]
            cols[j] |= 1 << i
        return ChainMap(self.src, self.dst, tuple(cols), k)

    def d_cols(self, k: int) -> List[int]:
        """Columns of D: Hom^k -> Hom^{k+1}, D(phi) = d_dst∘phi + phi∘d_src."""
        if (k, "cols") in getattr(self, "_dcache", {}):
            return self._dcache[(k, "cols")]
        out: List[int] = []
        up = self.index.get(k + 1, {})
        for (i, j) in self.basis.get(k, ()):
            v = 0
            for i2 in gf2.bits(self.dst.diff[i]):
                t = up.get((i2, j))
                if t is not None:
                    v |= 1 << t
            # phi∘d_src: entries (i, j2) for every j2 with d_src sending j2 -> j
            for j2 in range(self.src.n()):
                if (self.src.diff[j2] >> j) & 1:
                    t = up.get((i, j2))
                    if t is not None:
                        v |= 1 << t
            out.append(v)
        if not hasattr(self, "_dcache"):
            self._dcache = {}
        self._dcache[(k, "cols")] = out
        return out


def is_null_homotopic(phi: ChainMap, hom: Optional[HomComplex] = None) -> Optional[ChainMap]:
    """A homotopy h with phi = d∘h + h∘d, or None.

    The returned map has shift -1 relative to phi.
    """
    k = phi.shift
    if hom is None:
        hom = HomComplex.build(phi.src, phi.dst, (k - 1, k))
    target = hom.pack(phi)
    x = gf2.solve(hom.d_cols(k - 1), target)
    if x is None:
        return None
    return hom.unpack(x, k - 1)


def homotopy_classes(hom: HomComplex, k: int = 0, cap: int = 1 << 20):
    """Iterate one chain map per homotopy class in degree k (Z^k mod B^k).

    Yields ChainMaps; raises OverflowError when the class count exceeds cap.
    """
    cycles = gf2.nullspace(hom.d_cols(k)) if hom.dim(k) else []
    # the all-zero column case: nullspace of an empty matrix is empty
    boundaries = gf2.Span(hom.d_cols(k - 1))
    reps: List[int] = []
    comp = gf2.Span()
    for fmask in boundaries.pivots.values():
        comp.add(fmask)
    free: List[int] = []
    for z in cycles:
        if comp.add(z):
            free.append(z)
    if len(free) > 60 or (1 << len(free)) > cap:
        raise OverflowError(f"2^{len(free)} homotopy classes exceeds cap {cap}")
    for mask in range(1 << len(free)):
        vec = 0
        for b in gf2.bits(mask):
            vec ^= free[b]
        yield hom.unpack(vec, k)
