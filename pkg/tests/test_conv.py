from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conedensity import (
    EdgeProfile, EmptySheafError, GraphPoint, TameFunction,
    constant, distance_cone, inf_convolution, is_lipschitz,
    lipschitz_envelope, skyscraper,
)
from conedensity.rat import INF

from conftest import cycle_graph, path_graph
from test_tame import continuous_fn, decisive_mesh

V = GraphPoint.V


def tent(graph, peak_value):
    """0 at the ends of a 2-edge path, `peak_value` at the middle vertex."""
    f = TameFunction(graph, (F(0), F(peak_value), F(0)),
                     (EdgeProfile((), ((F(0), F(peak_value)),)),
                      EdgeProfile((), ((F(peak_value), F(0)),))))
    f.validate()
    return f


def test_envelope_of_skyscraper_is_a_cone():
    g = path_graph(2)
    sky = skyscraper(g, V("v1"), height=F(1, 2))
    env = lipschitz_envelope(sky)
    cone = distance_cone(g, V("v1"), base=F(1, 2))
    assert env.sup_difference(cone) == 0
    assert cone.sup_difference(env) == 0


def test_envelope_fixes_lipschitz_functions():
    g = cycle_graph(4)
    f = distance_cone(g, g.point(2, F(1, 3)), base=F(-1))
    assert lipschitz_envelope(f) == f


def test_envelope_flattens_a_steep_tent():
    g = path_graph(2)
    env = lipschitz_envelope(tent(g, 3))
    assert is_lipschitz(env, 1)
    assert env.pointwise_leq(tent(g, 3))
    # best minorant at the peak comes from the zero ends: 0 + d = 1
    assert env.value_at(V("v1")) == F(1)


def test_envelope_raises_on_empty():
    g = path_graph(1)
    all_inf = TameFunction(g, (INF, INF), (EdgeProfile((), (None,)),))
    with pytest.raises(EmptySheafError):
        lipschitz_envelope(all_inf)


def test_is_lipschitz_detects_slope():
    g = path_graph(1)
    assert is_lipschitz(distance_cone(g, V("v0")), 1)
    assert not is_lipschitz(distance_cone(g, V("v0"), slope=2), 1)
    assert is_lipschitz(distance_cone(g, V("v0"), slope=2), 2)
    assert not is_lipschitz(skyscraper(g, V("v0")), 1)


# ----------------------------------------------------------------------
# inf-convolution: ball-min contract and exact semigroup law
# ----------------------------------------------------------------------


def test_cones_are_fixed_points():
    g = cycle_graph(6)
    f = distance_cone(g, V("v2"), base=F(1))
    assert inf_convolution(f, F(1, 2)) == f
    assert inf_convolution(f, INF) == f


def test_inf_convolution_matches_ball_minimum_on_a_mesh():
    g = path_graph(2)
    f = tent(g, 2)  # slope 2, so the radius-s ball genuinely lowers it
    s = F(1, 2)
    out = inf_convolution(f, s)
    mesh = [V(v) for v in g.vertices]
    mesh += [g.point(e, F(num, 8)) for e in (0, 1) for num in range(1, 8)]
    for x in mesh:
        brute = min(f.value_at(y) + g.distance(x, y)
                    for y in mesh if g.distance(x, y) <= s)
        assert out.value_at(x) == brute
    assert out.value_at(V("v1")) == F(3, 2)


def test_radius_zero_is_identity():
    g = path_graph(1)
    f = tent(path_graph(2), 1)
    assert inf_convolution(f, 0) is f or inf_convolution(f, 0) == f


def test_infinite_radius_gives_the_envelope():
    g = path_graph(2)
    for f in (tent(g, 3), skyscraper(g, V("v0"), height=F(1))):
        assert inf_convolution(f, INF) == lipschitz_envelope(f)


def test_skyscraper_convolution_opens_a_cone_of_radius_s():
    g = path_graph(2)
    sky = skyscraper(g, V("v1"))
    out = inf_convolution(sky, F(1, 2))
    assert out.value_at(V("v1")) == 0
    assert out.value_at(g.point(0, F(3, 4))) == F(1, 4)
    assert out.value_at(V("v0")) == INF  # outside the ball: still +inf


@settings(max_examples=60, deadline=None)
@given(continuous_fn(), st.integers(0, 4).map(lambda k: F(k, 4)),
       st.integers(0, 4).map(lambda k: F(k, 4)))
def test_inf_convolution_semigroup_exact(f, s1, s2):
    lhs = inf_convolution(inf_convolution(f, s1), s2)
    rhs = inf_convolution(f, s1 + s2)
    assert lhs == rhs  # exact breakpoint data, not just pointwise agreement


@settings(max_examples=40, deadline=None)
@given(continuous_fn())
def test_envelope_idempotent_exact(f):
    once = lipschitz_envelope(f)
    assert lipschitz_envelope(once) == once
    assert is_lipschitz(once, 1)
    assert once.pointwise_leq(f)


@settings(max_examples=30, deadline=None)
@given(continuous_fn())
def test_envelope_dominates_every_touching_cone_minorant(f):
    # the envelope is the min of the cones planted on the graph of f, so it
    # is <= each one of them; and it agrees with f wherever f is 1-Lipschitz
    env = lipschitz_envelope(f)
    for p in decisive_mesh(f, f):
        val = f.value_at(p)
        if val == INF:
            continue
        assert env.pointwise_leq(distance_cone(f.graph, p, base=val))
    assert env.sup_difference(f) <= 0
