"""Acceptance suite: one test per shipping criterion, independently seeded.

Run `pytest tests/test_acceptance.py -v -s` to see one PASS/FAIL line per
criterion.  Each test is self-contained; randomized instances are drawn from
seeded generators so reruns see the same data.
"""

from __future__ import annotations

import functools
import random
import time
from fractions import Fraction as F

from conedensity import (
    ChainMap, Generator, GraphPoint, LeveledComplex, TwistedComplex,
    barcode_of, certificate_from_inverse_pair, certified_budget, cone_distance,
    cone_model, constant, densify, distance_bounds, distance_exact,
    gabriel_decompose, interleaving_distance_barcodes, skyscraper,
    stalk_lower_bound, sum_certificates, transport_cone, transport_tower,
)
from conedensity import docio
from conedensity.conv import inf_convolution, lipschitz_envelope
from conedensity.tame import TameFunction, distance_cone as cone_fn

from conftest import (
    POINT, cycle_graph, path_graph, random_barcode, random_cone_complex,
    random_point_complex, random_point_on, rational,
)

V = GraphPoint.V


def criterion(num: int, label: str):
    def deco(fn):
        @functools.wraps(fn)
        def run():
            try:
                fn()
            except BaseException:
                print(f"criterion {num:02d} FAIL: {label}")
                raise
            print(f"criterion {num:02d} PASS: {label}")
        return run
    return deco


# ---------------------------------------------------------------------------
# shared builders


def _identity_cols(n: int):
    return tuple(1 << k for k in range(n))


def _raise_levels(cx: TwistedComplex, deltas) -> TwistedComplex:
    gens = tuple(Generator(g.fn.add_const(d), g.degree)
                 for g, d in zip(cx.gens, deltas))
    out = TwistedComplex(cx.graph, gens, cx.diff)
    out.validate()
    return out


def _planted_pair(rng: random.Random, cx: TwistedComplex, a, b):
    """A sibling of cx together with a strict (a, b)-certificate onto it.

    Every generator level moves by some delta in [-a, b]; identity columns
    are then legal in both directions and the composites equal translation
    on the nose, so the certificate needs no homotopies.
    """
    deltas = [max(-a, min(b, rational(rng, 0, 1) * (a + b) - a))
              for _ in range(cx.n())]
    out = _raise_levels(cx, deltas)
    u = ChainMap(cx, out.translate(a), _identity_cols(cx.n()))
    v = ChainMap(out, cx.translate(b), _identity_cols(cx.n()))
    cert = certificate_from_inverse_pair(a, b, u, v)
    cert.verify()
    return out, cert


def _random_glue(rng: random.Random, g, src: TwistedComplex, slack):
    """A legal chain map out of src: a translation inclusion or a zero map."""
    if rng.random() < 0.5:
        dst = src.translate(rational(rng, 0, 2))
        return ChainMap(src, dst, _identity_cols(src.n()))
    dst = random_cone_complex(rng, g, max_gens=3, slack=slack)
    return ChainMap(src, dst, (0,) * src.n())


# ---------------------------------------------------------------------------
# criteria


@criterion(1, "point-base exact distance matches the barcode distance")
def test_c01_point_base_distance_is_barcode_distance():
    rng = random.Random(101)
    t0 = time.monotonic()
    done = draws = 0
    while done < 100:
        draws += 1
        assert draws <= 220, "too many undecided instances"
        A = random_point_complex(rng, 12)
        B = random_point_complex(rng, 12)
        rep = distance_exact(A, B, cap=1 << 12)
        if not rep.exact:
            continue  # solver hit its cap; draw a fresh instance
        la, _ = LeveledComplex.from_stalk(A, V("pt"))
        lb, _ = LeveledComplex.from_stalk(B, V("pt"))
        want = interleaving_distance_barcodes(gabriel_decompose(la).barcode,
                                              gabriel_decompose(lb).barcode)
        assert rep.value == want
        done += 1
    elapsed = time.monotonic() - t0
    assert elapsed < 60, f"took {elapsed:.1f}s"


@criterion(2, "cone transport over a replaced source replays at <= 4*eps")
def test_c02_source_replacement_transport():
    rng = random.Random(202)
    graphs = [path_graph(2), path_graph(3), cycle_graph(4)]
    for _ in range(200):
        g = rng.choice(graphs)
        eps = rng.choice((F(1, 2), F(1, 4)))
        src = random_cone_complex(rng, g, max_gens=3, slack=2 * eps)
        _, cert = _planted_pair(rng, src, F(0), eps)
        phi = _random_glue(rng, g, src, slack=2 * eps)
        phi.validate()
        rec = transport_cone(phi, source_cert=cert, cap=1 << 10)
        assert rec.certificate.total() <= 4 * eps
        rec.certificate.verify()
        measured = distance_bounds(rec.certificate.source,
                                   rec.certificate.target, cap=1 << 10,
                                   upper_hints=(rec.certificate,),
                                   probe_budget=4)
        assert measured.upper <= rec.certificate.total()
        assert measured.lower <= measured.upper


@criterion(3, "double replacement and one-layer towers replay at <= 8*eps")
def test_c03_double_replacement_and_towers():
    rng = random.Random(303)
    graphs = [path_graph(2), path_graph(3), cycle_graph(4)]
    for _ in range(100):
        g = rng.choice(graphs)
        eps = rng.choice((F(1, 2), F(1, 4)))
        src = random_cone_complex(rng, g, max_gens=3, slack=2 * eps)
        _, scert = _planted_pair(rng, src, F(0), eps)
        phi = _random_glue(rng, g, src, slack=2 * eps)
        if rng.random() < 0.5:
            _, tcert = _planted_pair(rng, phi.dst, eps, F(0))
        else:
            _, tcert = _planted_pair(rng, phi.dst, F(0), eps)
        rec = transport_cone(phi, source_cert=scert, target_cert=tcert,
                             cap=1 << 10)
        assert rec.certificate.total() <= 8 * eps
        rec.certificate.verify()
        tower = transport_tower(tcert, [(phi, scert)], cap=1 << 10)
        assert tower.certificate.total() <= 8 * eps
        tower.certificate.verify()


@criterion(4, "blockwise certificates on direct sums replay at <= 2*eps")
def test_c04_blockwise_sums():
    rng = random.Random(404)
    graphs = [path_graph(2), path_graph(3), cycle_graph(4)]
    for _ in range(100):
        g = rng.choice(graphs)
        eps = rng.choice((F(1, 2), F(1, 4)))
        certs = []
        for _ in range(rng.randint(2, 4)):
            block = random_cone_complex(rng, g, max_gens=3, slack=2 * eps)
            a = rational(rng, 0, 1) * eps
            b = rational(rng, 0, 1) * eps
            certs.append(_planted_pair(rng, block, a, b)[1])
        total = sum_certificates(certs)
        assert total.total() <= 2 * eps
        total.verify()


@criterion(5, "barcode -> cone tower -> barcode is the identity multiset")
def test_c05_barcode_cone_round_trip():
    rng = random.Random(505)
    graphs = [path_graph(2), cycle_graph(4)]
    for _ in range(200):
        g = rng.choice(graphs)
        bc = random_barcode(rng, 10)
        x = random_point_on(rng, g)
        model = cone_model(g, x, bc)
        assert barcode_of(model, x) == bc


@criterion(6, "max-stalk barcode distance bounds the exact distance below")
def test_c06_stalk_lower_bound():
    rng = random.Random(606)
    graphs = [path_graph(2), path_graph(3), cycle_graph(4)]
    done = draws = 0
    while done < 100:
        draws += 1
        assert draws <= 200, "too many undecided instances"
        g = rng.choice(graphs)
        A = random_cone_complex(rng, g, max_gens=4)
        B = random_cone_complex(rng, g, max_gens=4)
        points = [V(v) for v in g.vertices]
        points += [random_point_on(rng, g) for _ in range(2)]
        lb = stalk_lower_bound(A, B, points)
        rep = distance_exact(A, B, cap=1 << 11)
        if not rep.exact:
            continue
        assert lb <= rep.value
        done += 1
    # On a one-point base the single stalk carries everything: equality.
    done = draws = 0
    while done < 30:
        draws += 1
        assert draws <= 90, "too many undecided instances"
        A = random_point_complex(rng, 8)
        B = random_point_complex(rng, 8)
        rep = distance_exact(A, B, cap=1 << 12)
        if not rep.exact:
            continue
        assert stalk_lower_bound(A, B, [V("pt")]) == rep.value
        done += 1


def _corpus():
    p2, p3, c6 = path_graph(2), path_graph(3), cycle_graph(6)

    def mk(g, spec, diff=None):
        gens = tuple(Generator(fn, d) for fn, d in spec)
        cx = TwistedComplex(g, gens, diff or (0,) * len(gens))
        cx.validate()
        return cx

    roof = constant(p2, 1).min_with(cone_fn(p2, V("v0"), 0)) \
                          .min_with(cone_fn(p2, V("v2"), 0))
    min2 = cone_fn(p2, V("v0"), 0).min_with(cone_fn(p2, V("v2"), F(1, 2)))
    min3 = cone_fn(p3, V("v0"), 0).min_with(cone_fn(p3, V("v1"), F(1, 4))) \
                                  .min_with(cone_fn(p3, V("v3"), F(1, 2)))
    return [
        ("p2 constant 0", mk(p2, [(constant(p2, 0), 0)])),
        ("p2 constant -1/2", mk(p2, [(constant(p2, F(-1, 2)), 0)])),
        ("p2 roof", mk(p2, [(roof, 0)])),
        ("p2 min of two cones", mk(p2, [(min2, 0)])),
        ("p2 two generators", mk(p2, [(constant(p2, 0), 0), (min2, 1)])),
        ("p2 killed constant", mk(p2, [(constant(p2, 0), 0),
                                       (constant(p2, 2), 1)], diff=(2, 0))),
        ("p3 constant 1", mk(p3, [(constant(p3, 1), 0)])),
        ("p3 min of three cones", mk(p3, [(min3, 0)])),
        ("p2 cone pair", mk(p2, [(cone_fn(p2, V("v0"), 0), 0),
                                 (cone_fn(p2, V("v1"), 2), 1)], diff=(2, 0))),
        ("c6 constant 0", mk(c6, [(constant(c6, 0), 0)])),
        ("c6 min of adjacent cones",
         mk(c6, [(cone_fn(c6, V("v2"), 0).min_with(cone_fn(c6, V("v3"), 0)), 0)])),
    ]


@criterion(7, "corpus densifies in 2 layers within 10*8*eps, under 5 minutes")
def test_c07_density_corpus():
    t0 = time.monotonic()
    for eps in (F(1, 4), F(1, 8)):
        bound = 10 * 8 * eps
        assert certified_budget(eps) == bound
        for name, cx in _corpus():
            rep = densify(cx, eps, cap=1 << 10)
            assert rep.layer_count == 2, name
            assert rep.certified <= bound, name
            assert rep.measured.upper <= bound, name
            rep.replay()
    elapsed = time.monotonic() - t0
    assert elapsed < 300, f"took {elapsed:.1f}s"


@criterion(8, "single-cone distances: closed form exactly, near pairs < 2*eps")
def test_c08_cone_geometry():
    rng = random.Random(808)
    graphs = [path_graph(2), cycle_graph(4), cycle_graph(6)]

    def cone_cx(g, x, a):
        return TwistedComplex(g, (Generator(cone_fn(g, x, a), 0),), (0,))

    for _ in range(50):
        g = rng.choice(graphs)
        x, y = random_point_on(rng, g), random_point_on(rng, g)
        a, b = rational(rng, 0, 4), rational(rng, 0, 4)
        rep = distance_exact(cone_cx(g, x, a), cone_cx(g, y, b), cap=1 << 11)
        assert rep.exact
        assert rep.value == cone_distance(g, x, a, y, b)

    for _ in range(50):
        g = rng.choice(graphs)
        eps = rng.choice((F(1, 2), F(1, 4)))
        x = random_point_on(rng, g)
        # nudge the apex along an edge by strictly less than eps
        shift = F(rng.randint(0, 3), 8) * eps
        if x.kind == "v":
            e = rng.choice([i for i, (u, w, _) in enumerate(g.edges)
                            if u == x.vertex or w == x.vertex])
            u, w, L = g.edges[e]
            off = shift if u == x.vertex else L - shift
            y = g.point(e, off) if shift > 0 else x
        else:
            L = g.edge_length(x.edge)
            off = x.offset + shift
            y = g.point(x.edge, off) if off < L else g.point(x.edge, x.offset)
        assert g.distance(x, y) < eps
        a = rational(rng, 0, 4)
        b = a + rng.choice((-1, 1)) * F(rng.randint(0, 3), 8) * eps
        assert abs(a - b) < eps
        rep = distance_exact(cone_cx(g, x, a), cone_cx(g, y, b), cap=1 << 11)
        assert rep.exact
        assert rep.value < 2 * eps


def _random_tame(rng: random.Random, g, jump_p=0.3) -> TameFunction:
    pieces = []
    for e in range(len(g.edges)):
        L = g.edge_length(e)
        ks = sorted(rng.sample(range(1, 8), rng.randint(0, 2)))
        bounds = [F(0)] + [L * k / 8 for k in ks] + [L]
        vals = [F(rng.randint(-8, 8), 4) for _ in bounds]
        pieces.append([(bounds[j], bounds[j + 1], vals[j], vals[j + 1])
                       for j in range(len(bounds) - 1)])
    f = TameFunction.from_pieces(g, pieces)
    if rng.random() < jump_p:
        pt = random_point_on(rng, g)
        f = f.min_with(skyscraper(g, pt, f.value_at(pt) - rational(rng, 1, 4)))
    return f


@criterion(9, "ball-minimum semigroup law and envelope idempotence, exactly")
def test_c09_envelope_algebra():
    rng = random.Random(909)
    graphs = [path_graph(1), path_graph(2)]
    for _ in range(100):
        g = rng.choice(graphs)
        f = _random_tame(rng, g)
        s1, s2 = rational(rng, 1, 8), rational(rng, 1, 8)
        lhs = inf_convolution(inf_convolution(f, s1), s2)
        assert lhs == inf_convolution(f, s1 + s2)
        env = lipschitz_envelope(f)
        assert lipschitz_envelope(env) == env


@criterion(10, "reports are byte-identical across thread counts")
def test_c10_thread_determinism():
    p2 = path_graph(2)
    min2 = cone_fn(p2, V("v0"), 0).min_with(cone_fn(p2, V("v2"), F(1, 2)))
    fixtures = [
        TwistedComplex(p2, (Generator(min2, 0),), (0,)),
        TwistedComplex(p2, (Generator(constant(p2, 0), 0),
                            Generator(constant(p2, 2), 1)), (2, 0)),
    ]
    command = ["conedensity", "densify", "--epsilon", "1/4"]
    for cx in fixtures:
        docs = []
        for threads in (1, 3):
            rep = densify(cx, F(1, 4), cap=1 << 10, threads=threads)
            docs.append(docio.dumps(docio.density_report_doc(rep, command)))
        assert docs[0] == docs[1]
        assert docio.replay_document(docio.loads(docs[0]))
