from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crosslab.cross import Cross, envelope_mask
from crosslab.errors import QuadratureError, RankDeficientError, SamplingError
from crosslab.extension import (GroundTruth, SampleSet, SamplingStrategy, cauchy_reconstruct,
                                fit_rational, local_cross, local_overlap_consistency, poly_eval,
                                sample_cross, uniqueness_residual, verify_extension)
from crosslab.extremal import solve_relative_extremal
from crosslab.geometry import Disc, Grid, PointSet, rasterize
from crosslab.singularity import SingularSet, envelope_trace

UNIT = Disc(0, 1.0)
CORE = Disc(0, 0.25, closed=True)
CROSS = Cross(UNIT, CORE, UNIT, CORE)
DIAG = SingularSet.from_poly([[0, -1], [1, 0]])
INV = GroundTruth([[1]], DIAG, 1)


@pytest.fixture(scope="module")
def envelope():
    g = Grid.square(1.05, 40)
    f = solve_relative_extremal(rasterize(UNIT, g), rasterize(CORE, g), omega_spec=UNIT, a_spec=CORE)
    env = envelope_mask(f, f)
    return env, envelope_trace(DIAG, env)


@pytest.fixture(scope="module")
def samples():
    return sample_cross(INV, CROSS, DIAG)


def test_samples_respect_cross_and_clearance(samples):
    assert len(samples) == 800
    assert np.all(CROSS.contains(samples.z, samples.w))
    clearance = 0.05 * CROSS.diameter()
    assert np.all(np.abs(samples.z - samples.w) >= clearance * DIAG.scale)
    assert np.all(np.isfinite(samples.values))
    assert set(np.unique(samples.branch).tolist()) == {0, 1}
    ag = samples.branch == 0
    assert np.all(np.abs(samples.z[ag]) <= 0.25) and np.all(np.abs(samples.w[~ag]) <= 0.25)


def test_sampling_is_deterministic(samples):
    again = sample_cross(INV, CROSS, DIAG)
    assert np.array_equal(again.z, samples.z) and np.array_equal(again.w, samples.w)
    other = sample_cross(INV, CROSS, DIAG, SamplingStrategy(seed=1))
    assert not np.array_equal(other.z, samples.z)


def test_infeasible_clearance():
    with pytest.raises(SamplingError):
        sample_cross(INV, CROSS, DIAG, SamplingStrategy(clearance=10.0))
    with pytest.raises(SamplingError):
        sample_cross(INV, CROSS, DIAG, SamplingStrategy(clearance=1.5, max_batches=2))


def test_degenerate_slices_are_skipped():
    m = SingularSet.from_poly([[0, 0], [-0.5, 1]])  # z (w - 0.5)
    f = GroundTruth([[1]], m, 1)
    a = PointSet((0j, 0.1))
    s = sample_cross(f, Cross(UNIT, a, UNIT, CORE), m, SamplingStrategy(n_ag=50, n_db=50, clearance=0.01))
    assert np.all(s.z[s.branch == 0] == 0.1)


def test_recovers_simple_pole(samples):
    fit = fit_rational(samples, DIAG, 1, (0, 0))
    assert abs(fit.coeffs[0, 0] - 1) <= 1e-8


def test_recovers_double_pole():
    f = GroundTruth([[0, 1], [1, 0]], DIAG, 2)  # (z + w) / (z - w)**2
    s = sample_cross(f, CROSS, DIAG)
    fit = fit_rational(s, DIAG, 2, (1, 1))
    assert np.max(np.abs(fit.coeffs - [[0, 1], [1, 0]])) <= 1e-8


def test_exact_recovery_with_extra_pole_power():
    rng = np.random.default_rng(2)
    num = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    f = GroundTruth(num, DIAG, 1)
    fit = fit_rational(sample_cross(f, CROSS, DIAG), DIAG, 2, (2, 2))
    expected = np.zeros((3, 3), complex)  # num * (z - w)
    expected[1:, :2] += num
    expected[:2, 1:] -= num
    assert np.max(np.abs(fit.coeffs - expected)) <= 1e-8


def test_zero_data_gives_zero(samples):
    zero = SampleSet(samples.z, samples.w, np.zeros(len(samples), complex), samples.branch)
    assert np.max(np.abs(fit_rational(zero, DIAG, 1, (2, 2)).coeffs)) <= 1e-10


@settings(max_examples=10, deadline=None)
@given(st.complex_numbers(max_magnitude=10), st.complex_numbers(max_magnitude=10))
def test_fit_is_linear(alpha, beta):
    s = sample_cross(INV, CROSS, DIAG, SamplingStrategy(n_ag=60, n_db=60))
    g = s.z * s.w + 2
    def fit(v):
        return fit_rational(SampleSet(s.z, s.w, v, s.branch), DIAG, 1, (2, 2)).coeffs
    lhs = fit(alpha * s.values + beta * g)
    rhs = alpha * fit(s.values) + beta * fit(g)
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * (1 + abs(alpha) + abs(beta))


def test_fit_preconditions(samples):
    with pytest.raises(ValueError):
        fit_rational(samples, DIAG, 1, (30, 30))
    with pytest.raises(ValueError):
        fit_rational(samples, DIAG, -1, (1, 1))


def test_rank_deficiency_is_an_error():
    s = sample_cross(INV, Cross(UNIT, PointSet((0.1, -0.1)), UNIT, PointSet((0.5, 0.6))), DIAG,
                     SamplingStrategy(n_ag=100, n_db=100, clearance=0.01))
    with pytest.raises(RankDeficientError, match="insufficient"):
        fit_rational(s, DIAG, 1, (2, 2))


def test_verify_extension(samples, envelope):
    env, trace = envelope
    fit = fit_rational(samples, DIAG, 1, (2, 2))
    rep = verify_extension(fit, INV, env, trace, 500, 0)
    assert rep.max_rel_error <= 1e-6 and rep.n_test_points == 500
    assert rep.max_rel_error <= fit.conditioning * 1e-12
    bad = verify_extension(fit, INV.shifted(1), env, trace, 500, 0)
    assert bad.max_rel_error > 0.5


def test_verify_polynomial_target(envelope):
    env, _ = envelope
    poly = SingularSet.from_poly([[1]])
    f = GroundTruth([[0, 0], [0, 1]], poly, 0)  # z w
    fit = fit_rational(sample_cross(f, CROSS, poly), poly, 0, (1, 1))
    rep = verify_extension(fit, f, env, envelope_trace(poly, env), 200, 1)
    assert rep.max_rel_error <= 1e-9


def test_single_branch_fits_agree(samples, envelope):
    env, trace = envelope
    both = fit_rational(samples, DIAG, 1, (2, 2))
    for branch in (0, 1):
        one = fit_rational(samples.subset(samples.branch == branch), DIAG, 1, (2, 2))
        assert local_overlap_consistency(one, both, env, 300, 0, trace) <= 1e-6


def test_verify_needs_points(samples, envelope):
    env, _ = envelope
    fit = fit_rational(samples, DIAG, 1, (0, 0))
    with pytest.raises(SamplingError):
        verify_extension(fit, INV, env, env, 200, 0)
    with pytest.raises(ValueError):
        verify_extension(fit, INV, env, env, 10, 0)


def test_uniqueness_residual():
    assert uniqueness_residual(CROSS, DIAG, 1, (2, 2)) <= 1e-10
    assert uniqueness_residual(CROSS, DIAG, 1, (0, 0)) <= 1e-14
    two = Cross(UNIT, PointSet((0.1, -0.1)), UNIT, CORE)
    assert uniqueness_residual(two, DIAG, 1, (2, 2)) == np.inf
    three = Cross(UNIT, PointSet((0.1, -0.1, 0.1j)), UNIT, CORE)
    assert uniqueness_residual(three, DIAG, 1, (2, 2)) <= 1e-10


def test_cauchy_examples():
    assert cauchy_reconstruct(lambda z, w: z * w, (0.1, 0.2), (0.3, 0.3)) == pytest.approx(0.02, abs=1e-10)
    assert cauchy_reconstruct(lambda z, w: 1 / (z - w), (0, 0.8), (0.2, 0.2)) == pytest.approx(-1.25, abs=1e-8)
    assert abs(cauchy_reconstruct(lambda z, w: np.sin(z) * np.exp(w), (0, 0), (0.5, 0.5))) <= 1e-9


def test_cauchy_polynomial_exactness():
    rng = np.random.default_rng(5)
    c = rng.normal(size=(17, 17)) + 1j * rng.normal(size=(17, 17))
    got = cauchy_reconstruct(lambda z, w: poly_eval(c, z, w), (0.2, -0.1j), (0.4, 0.3), 64)
    assert abs(got - poly_eval(c, 0.2, -0.1j)) <= 1e-9 * np.abs(c).sum()


def test_cauchy_detects_nonconvergence():
    with pytest.raises(QuadratureError):
        cauchy_reconstruct(lambda z, w: 1 / (z - w), (0, 0.25), (0.2, 0.2), 32)
    with pytest.raises(ValueError):
        cauchy_reconstruct(lambda z, w: z, (0, 0), (0.1, 0.1), 16)


def test_overlap_consistency():
    g = Grid.square(1.05, 32)
    fits, envs = [], []
    for i, base in enumerate([(-0.15, 0.15), (0.15, -0.15)]):
        cross = local_cross(Disc(0, 0.95), Disc(0, 0.95), base, 0.08)
        fits.append(fit_rational(sample_cross(INV, cross, DIAG, SamplingStrategy(seed=i)), DIAG, 1, (2, 2)))
        fa = solve_relative_extremal(rasterize(cross.d_spec, g), rasterize(cross.a_spec, g))
        fb = solve_relative_extremal(rasterize(cross.g_spec, g), rasterize(cross.b_spec, g))
        envs.append(envelope_mask(fa, fb))
    overlap = envs[0] & envs[1]
    assert local_overlap_consistency(fits[0], fits[1], overlap) <= 1e-6
    assert local_overlap_consistency(fits[0], fits[0], overlap) == 0
    plus_one = replace(fits[1], coeffs=fits[1].coeffs + np.pad(DIAG.coeffs, ((0, 1), (0, 1))))
    assert local_overlap_consistency(fits[0], plus_one, overlap) > 0.2


def test_overlap_requires_same_denominator(samples, envelope):
    env, _ = envelope
    a = fit_rational(samples, DIAG, 1, (1, 1))
    b = fit_rational(samples, DIAG, 2, (2, 2))
    with pytest.raises(ValueError):
        local_overlap_consistency(a, b, env)
