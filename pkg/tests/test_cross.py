import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crosslab.cross import (Cross, ProductMask, connected_components, cross_mask, cross_membership,
                            envelope_mask, envelope_volume_fraction, fiber_matches_definition,
                            product_of, sublevel_components)
from crosslab.errors import ResolutionError
from crosslab.extremal import solve_relative_extremal
from crosslab.geometry import Disc, Grid, Rectangle, rasterize

UNIT = Disc(0, 1.0)
CORE = Disc(0, 0.25, closed=True)
CROSS = Cross(UNIT, CORE, UNIT, CORE)


def field(omega, a, n=32, fitted=True):
    g = Grid.square(1.05, n)
    specs = {"omega_spec": omega, "a_spec": a} if fitted else {}
    return solve_relative_extremal(rasterize(omega, g), rasterize(a, g), **specs)


def test_membership():
    assert cross_membership(CROSS, 0.1, 0.5)
    assert not cross_membership(CROSS, 0.5, 0.5)
    assert cross_membership(CROSS, 0.1, 0.1)
    assert cross_membership(CROSS, 0.9, 0.2j)
    assert not cross_membership(CROSS, 1.2, 0.1)


def test_product_mask_roundtrip():
    gz, gw = Grid.square(1, 8), Grid.square(1, 9)
    rng = np.random.default_rng(0)
    dense = rng.random((gz.size, gw.size)) < 0.3
    m = ProductMask.from_dense(gz, gw, dense)
    assert np.array_equal(m.to_dense(), dense)
    assert m.count() == dense.sum()
    iz, jw = rng.integers(gz.size, size=50), rng.integers(gw.size, size=50)
    assert np.array_equal(m.contains_index(iz, jw), dense[iz, jw])
    other = ProductMask.from_dense(gz, gw, rng.random(dense.shape) < 0.5)
    assert np.array_equal((m & other).to_dense(), dense & other.to_dense())
    assert np.array_equal((m - other).to_dense(), dense & ~other.to_dense())
    assert (m & other).issubset(m | other)


def test_trivial_envelope_is_product():
    f = field(UNIT, Disc(0, 1.0, closed=True))
    env = envelope_mask(f, f)
    assert env == product_of(f.domain_mask, f.domain_mask)
    assert envelope_volume_fraction(env, f.domain_mask, f.domain_mask) == 1.0
    assert connected_components(env).count == 1


def test_annulus_envelope_against_closed_form():
    f = field(UNIT, CORE, 128)
    env = envelope_mask(f, f)
    pts = f.grid.points().ravel()
    dom = f.domain_mask.flags.ravel()
    plus = np.maximum(np.log(4 * np.abs(pts)), 0)
    agree = total = 0
    for j in np.flatnonzero(dom):
        expected = (plus + plus[j] < np.log(4)) & dom
        agree += np.sum((env.row(j) == expected) & dom)
        total += dom.sum()
    assert agree / total >= 0.99


def test_cross_inside_envelope_and_a_times_b():
    f = field(UNIT, CORE, 40)
    env = envelope_mask(f, f)
    x = cross_mask(CROSS, f.grid, f.grid)
    assert x.issubset(env)
    assert product_of(f.a_mask, f.a_mask).issubset(env)


def test_fibers_match_definition():
    fa = field(UNIT, CORE, 24)
    fb = field(Rectangle(-1 - 0.5j, 1 + 0.5j), Disc(0.3, 0.2, closed=True), 24)
    env = envelope_mask(fa, fb)
    assert all(fiber_matches_definition(env, fa, fb, j) for j in range(env.n_w))


@settings(max_examples=10, deadline=None)
@given(st.floats(0.1, 0.5), st.floats(0.1, 0.5))
def test_envelope_monotone_in_a(r1, r2):
    small, big = sorted([r1, r2])
    fs = field(UNIT, Disc(0, small, closed=True), 16, fitted=False)
    fb = field(UNIT, Disc(0, big, closed=True), 16, fitted=False)
    assert envelope_mask(fs, fs).issubset(envelope_mask(fb, fb))


def test_components_of_blocks():
    g = Grid.square(1, 8)
    dense = np.zeros((g.size, g.size), bool)
    lo = np.zeros(g.shape, bool)
    lo[:3, :3] = True
    hi = np.zeros(g.shape, bool)
    hi[5:, 5:] = True
    dense[np.ix_(lo.ravel(), lo.ravel())] = True
    dense[np.ix_(hi.ravel(), hi.ravel())] = True
    comps = connected_components(ProductMask.from_dense(g, g, dense))
    assert comps.count == 2
    assert sorted(comps.sizes.tolist()) == [81, 81]
    assert set(np.unique(comps.labels).tolist()) == {0, 1, 2}
    full = ProductMask.from_dense(g, g, np.ones((g.size, g.size), bool))
    assert connected_components(full).count == 1


def test_components_join_only_along_one_factor():
    # (z0, w0) and (z1, w1) touch diagonally in the product grid but not along an axis
    g = Grid.square(1, 8)
    dense = np.zeros((g.size, g.size), bool)
    dense[0, 0] = dense[1, 1] = True
    assert connected_components(ProductMask.from_dense(g, g, dense)).count == 2


def test_components_of_empty_mask():
    g = Grid.square(1, 8)
    with pytest.raises(ResolutionError):
        connected_components(ProductMask.from_dense(g, g, np.zeros((g.size, g.size), bool)))


def test_annulus_envelope_is_connected():
    f = field(UNIT, CORE, 32)
    assert connected_components(envelope_mask(f, f)).count == 1


def test_sublevel_components():
    f = field(UNIT, CORE, 64)
    half = sublevel_components(f, 0.5, f.a_mask)
    assert half.n_components == 1 and half.passed
    level = f.defined() & (f.values < 0.5)
    r = np.abs(f.grid.points())
    assert np.all(r[level] < 0.5 + 2 * f.grid.spacing)
    assert sublevel_components(f, 0.99, f.a_mask).passed
    two = Disc(-0.5, 0.15, closed=True), Disc(0.5, 0.15, closed=True)
    g = f.grid
    a = rasterize(two[0], g) | rasterize(two[1], g)
    f2 = solve_relative_extremal(rasterize(UNIT, g), a)
    rep = sublevel_components(f2, 0.1, a)
    assert rep.n_components == 2 and rep.passed
    with pytest.raises(ValueError):
        sublevel_components(f, 1.0, f.a_mask)
