import random
from fractions import Fraction as F

import pytest

from conedensity import (
    CertificateError, ChainMap, ConeTransportError, Generator, GraphPoint,
    TwistedComplex, certificate_from_inverse_pair, distance_cone,
    identity_certificate, mapping_cone, transport_cone, transport_tower,
)

from conftest import cycle_graph, path_graph

V = GraphPoint.V


def single_cone(g, x, level, degree=0):
    return TwistedComplex(
        g, (Generator(distance_cone(g, x, base=level), degree),), (0,))


def nudge_certificate(cx, delta):
    """Planted certificate between cx and its uniform raise by delta >= 0."""
    out = cx.translate(delta)
    ident = tuple(1 << j for j in range(cx.n()))
    u = ChainMap(cx, out.translate(F(0)), ident)
    v = ChainMap(out, cx.translate(delta), ident)
    return out, certificate_from_inverse_pair(F(0), delta, u, v)


def test_no_replacement_is_identity():
    g = path_graph(1)
    X = single_cone(g, V("v0"), F(0))
    W = single_cone(g, V("v1"), F(1), degree=0)
    phi = ChainMap(X, W, (1,))
    phi.validate()
    rec = transport_cone(phi)
    assert rec.certificate.total() == 0
    assert rec.map_new == phi


def test_source_replacement_bounded_by_four_gaps():
    g = cycle_graph(4)
    eps = F(1, 4)
    X = single_cone(g, V("v1"), F(0))
    W = single_cone(g, V("v1"), F(2), degree=0)
    phi = ChainMap(X, W, (1,))
    phi.validate()
    X2, cert_x = nudge_certificate(X, eps)
    rec = transport_cone(phi, source_cert=cert_x)
    rec.certificate.verify()
    assert rec.certificate.total() <= 4 * cert_x.total()
    assert rec.certificate.source == mapping_cone(phi)
    assert rec.map_new.src == X2


def test_double_replacement_bounded_by_eight_gaps():
    g = cycle_graph(4)
    eps = F(1, 4)
    X = single_cone(g, V("v1"), F(0))
    W = single_cone(g, V("v3"), F(3), degree=0)
    phi = ChainMap(X, W, (1,))
    phi.validate()
    _, cert_x = nudge_certificate(X, eps)
    _, cert_w = nudge_certificate(W, eps)
    rec = transport_cone(phi, source_cert=cert_x, target_cert=cert_w)
    rec.certificate.verify()
    gap = max(cert_x.total(), cert_w.total())
    assert rec.certificate.total() <= 8 * gap


def test_tower_single_layer_bound():
    g = cycle_graph(4)
    eps = F(1, 4)
    base = single_cone(g, V("v0"), F(1), degree=0)
    piece = single_cone(g, V("v2"), F(-1))
    phi = ChainMap(piece, base, (1,))
    phi.validate()
    _, cert_piece = nudge_certificate(piece, 2 * eps)
    base_cert = identity_certificate(base)
    rec = transport_tower(base_cert, [(phi, cert_piece)])
    rec.certificate.verify()
    assert rec.certificate.total() <= 8 * (2 * eps)
    assert rec.certificate.source == mapping_cone(phi)


def test_tower_rejects_mismatched_stage():
    g = path_graph(1)
    base = single_cone(g, V("v0"), F(0))
    other = single_cone(g, V("v1"), F(0))
    piece = single_cone(g, V("v0"), F(-1))
    phi = ChainMap(piece, other, (1,))
    with pytest.raises(CertificateError):
        transport_tower(identity_certificate(base), [(phi, None)])


def test_transport_attempts_are_recorded():
    g = path_graph(2)
    X = single_cone(g, V("v0"), F(0))
    W = single_cone(g, V("v0"), F(1), degree=0)
    phi = ChainMap(X, W, (1,))
    _, cert_x = nudge_certificate(X, F(1, 2))
    rec = transport_cone(phi, source_cert=cert_x)
    assert rec.source_step is not None
    assert rec.source_step.attempts
    assert rec.source_step.attempts[-1][2] == "interleaved"
