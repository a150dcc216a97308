import numpy as np
import pytest

from crosslab.cross import ProductMask
from crosslab.geometry import Grid
from crosslab.singularity import (SingularSet, branch_locus, branch_locus_report, discriminant_poly,
                                  envelope_trace, fiber_w, fiber_z, is_isolated_point)

DIAG = SingularSet.from_poly([[0, -1], [1, 0]])       # z - w
SQRT = SingularSet.from_poly([[0, 0, 1], [-1, 0, 0]])  # w**2 - z


def test_fibers():
    assert np.allclose(fiber_w(DIAG, 0.3).roots, [0.3])
    assert np.allclose(fiber_w(SQRT, 1.0).roots, [-1, 1])
    assert np.allclose(fiber_z(DIAG, 0.3).roots, [0.3])
    assert np.allclose(fiber_z(SQRT, 2.0).roots, [4])
    assert fiber_w(SingularSet.from_poly([[0, 0], [0, 1], [-1, 0]]), 0).degenerate  # (w - z) z
    assert np.allclose(fiber_z(SingularSet.from_graphs([[0, 0, 1]]), 4).roots, [-2, 2])


def test_roots_are_sorted():
    m = SingularSet.from_graphs([[0.5j], [-0.5], [0.5]])
    r = fiber_w(m, 0.1).roots
    assert r.tolist() == [-0.5, 0.5j, 0.5]


def test_graph_fibers_are_exact():
    graphs = [[1, 2, 0.5], [0, -1j], [0.3]]
    m = SingularSet.from_graphs(graphs)
    for z in (0.1, -0.7 + 0.2j, 1.3j):
        expected = sorted((np.polyval(g[::-1], z) for g in graphs), key=lambda c: (c.real, c.imag))
        assert np.max(np.abs(fiber_w(m, z).roots - expected)) <= 1e-12


def test_swap_symmetry():
    rng = np.random.default_rng(4)
    m = SingularSet.from_poly(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    for w in (0.2, -1 + 0.5j):
        assert np.allclose(fiber_z(m, w).roots, fiber_w(m.swapped(), w).roots)


def test_invalid_sets():
    with pytest.raises(ValueError):
        SingularSet.from_poly([[0, 0], [0, 0]])
    with pytest.raises(ValueError):
        SingularSet.from_graphs([[1, 2], [1, 2]])


def test_dict_roundtrip():
    for m in (SQRT, SingularSet.from_graphs([[0, 1j]])):
        back = SingularSet.from_dict(m.to_dict())
        assert np.array_equal(back.coeffs, m.coeffs)


def test_branch_locus_examples():
    assert np.allclose(branch_locus(SQRT), [0], atol=1e-9)
    assert branch_locus(SingularSet.from_poly([[0, 1], [0, 0], [0, 0], [-1, 0]])).size == 0
    assert branch_locus(SingularSet.from_poly([[2, -3, 1]])).size == 0
    res, zero = discriminant_poly(SingularSet.from_poly([[2, -3, 1]]))
    assert not zero and np.allclose(res[1:], 0) and abs(res[0]) > 0


def test_branch_locus_includes_leading_coefficient_zeros():
    m = SingularSet.from_poly([[-1, 0, 0], [0, 0, 1]])  # z w**2 - 1
    assert np.allclose(branch_locus(m), [0], atol=1e-9)


def test_non_square_free():
    rep = branch_locus_report(SingularSet.from_poly([[0, 0, 0], [1, -2, 1]]))  # z (w - 1)**2
    assert np.allclose(rep.points, [0], atol=1e-9)
    assert sorted(k for _, k in rep.factors) == [1, 2]
    assert branch_locus(SingularSet.from_poly([[1, -2, 1]])).size == 0


@pytest.mark.parametrize("seed", range(5))
def test_random_monic_locus(seed):
    rng = np.random.default_rng(seed)
    d_w = int(rng.integers(2, 5))
    c = rng.normal(size=(3, d_w + 1)) + 1j * rng.normal(size=(3, d_w + 1))
    c[:, d_w] = 0
    c[0, d_w] = 1
    m = SingularSet.from_poly(c)
    locus = branch_locus(m)
    for z in locus[np.abs(locus) <= 3]:
        roots = fiber_w(m, z).roots
        assert fiber_w(m, z).min_separation() <= 1e-6 * max(1, np.abs(roots).max())
    for z in rng.normal(size=20) + 1j * rng.normal(size=20):
        if np.min(np.abs(locus - z)) > 1e-2:
            assert fiber_w(m, z).min_separation() > 1e-6


def _full(n):
    g = Grid.square(1.05, n)
    inside = np.abs(g.points().ravel()) < 1
    return ProductMask.from_dense(g, g, np.outer(inside, inside)), g


def test_trace_hugs_diagonal():
    env, g = _full(24)
    tr = envelope_trace(DIAG, env)
    assert tr.issubset(env) and tr.any()
    z = g.points().ravel()
    dist = np.abs(z[:, None] - z[None, :])
    dense = tr.to_dense()
    diag = 2 * np.hypot(g.hx, g.hy)
    assert np.all(dist[dense] <= 2 * diag)
    on = env.to_dense() & (dist == 0)
    assert np.all(dense[on])


def test_trace_empty_and_graph():
    env, g = _full(16)
    assert not envelope_trace(SingularSet.from_poly([[-5, 1]]), env).any()
    square = SingularSet.from_graphs([[0, 0, 1]])
    tr = envelope_trace(square, env).to_dense()
    z = g.points().ravel()
    gap = np.abs(z[:, None] ** 2 - z[None, :])
    assert np.all(gap[tr] <= 0.5)
    assert tr.any()


def test_isolated_points():
    cross_pair = [SingularSet.from_graphs([[0, 1]]), SingularSet.from_graphs([[0, -1]])]
    assert is_isolated_point(cross_pair, (0, 0), (0.1, 0.1))
    assert not is_isolated_point(SingularSet.from_poly([[0, 0, 1], [0, 0, 0], [1, 0, 0]]), (0, 0),
                                 (0.1, 0.1))
    assert not is_isolated_point(DIAG, (0, 0), (0.1, 0.1))
    far = is_isolated_point(SingularSet.from_poly([[-1, 1]]), (0, 0), (0.5, 0.5))
    assert not far and far.empty
