"""Extension of separately holomorphic data from a cross, at rational scale.

Ground truths are rational functions ``N0 / P**m0`` whose poles sit on the
singular set.  They are sampled on ``(A x G) ∪ (D x B)`` away from ``M``,
refitted as ``N / P**m`` by weighted linear least squares, and the fit is
then compared with the ground truth on the envelope minus the trace of ``M``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import qmc

from .cross import Cross, ProductMask
from .errors import QuadratureError, RankDeficientError, SamplingError
from .geometry import Shape
from .singularity import DEGENERATE_TOL, SingularSet

log = logging.getLogger(__name__)

COND_LIMIT = 1e12
WEIGHT_FLOOR = 1e-6
CLEARANCE_FRACTION = 0.05


def poly_eval(coeffs: np.ndarray, z, w) -> np.ndarray:
    """``sum coeffs[a, b] z**a w**b``, broadcasting ``z`` against ``w``."""
    z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
    zp = z[..., None] ** np.arange(coeffs.shape[0])
    wp = w[..., None] ** np.arange(coeffs.shape[1])
    return np.einsum("...a,ab,...b->...", zp, coeffs, wp)


@dataclass(frozen=True, eq=False)
class GroundTruth:
    numerator: np.ndarray = field(repr=False)
    singular: SingularSet
    pole_order: int = 1

    def __post_init__(self):
        object.__setattr__(self, "numerator", np.atleast_2d(np.asarray(self.numerator, dtype=complex)))
        if self.pole_order < 0:
            raise ValueError("pole order must be >= 0")

    def __call__(self, z, w) -> np.ndarray:
        return poly_eval(self.numerator, z, w) / self.singular(z, w) ** self.pole_order

    def shifted(self, offset: complex) -> "GroundTruth":
        """The ground truth plus a constant, written over the same denominator."""
        p_m = np.ones((1, 1), dtype=complex)
        for _ in range(self.pole_order):
            p_m = _polymul(p_m, np.asarray(self.singular.coeffs))
        num = _polyadd(self.numerator, offset * p_m)
        return GroundTruth(num, self.singular, self.pole_order)


def _polymul(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    out = np.zeros((p.shape[0] + q.shape[0] - 1, p.shape[1] + q.shape[1] - 1), dtype=complex)
    for (a, b), c in np.ndenumerate(p):
        out[a:a + q.shape[0], b:b + q.shape[1]] += c * q
    return out


def _polyadd(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    out = np.zeros((max(p.shape[0], q.shape[0]), max(p.shape[1], q.shape[1])), dtype=complex)
    out[: p.shape[0], : p.shape[1]] += p
    out[: q.shape[0], : q.shape[1]] += q
    return out


@dataclass(frozen=True)
class SamplingStrategy:
    n_ag: int = 400
    n_db: int = 400
    clearance: float | None = None
    seed: int = 0
    batch: int = 4096
    max_batches: int = 64


@dataclass(frozen=True, eq=False)
class SampleSet:
    z: np.ndarray = field(repr=False)
    w: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    branch: np.ndarray = field(repr=False)  # 0: A x G, 1: D x B

    def __len__(self) -> int:
        return int(self.z.size)

    def subset(self, keep: np.ndarray) -> "SampleSet":
        return SampleSet(self.z[keep], self.w[keep], self.values[keep], self.branch[keep])


def _degenerate_z(m: SingularSet, z: np.ndarray) -> np.ndarray:
    """``True`` where ``P(z, .)`` vanishes identically."""
    cw = m.w_coeffs(z)
    scale = m.scale * np.maximum(1.0, np.abs(z)) ** m.d_z
    return np.all(np.abs(cw) <= DEGENERATE_TOL * scale[:, None], axis=1)


def _degenerate_w(m: SingularSet, w: np.ndarray) -> np.ndarray:
    return _degenerate_z(m.swapped(), w)


def _draw(z_set: Shape, w_set: Shape, m: SingularSet, n: int, threshold: float,
          seed: np.random.SeedSequence, strategy: SamplingStrategy) -> tuple[np.ndarray, np.ndarray]:
    """Quasi-random points of ``z_set x w_set`` with ``|P| >= threshold`` and regular fibers."""
    if n == 0:
        return np.zeros(0, dtype=complex), np.zeros(0, dtype=complex)
    engine = qmc.Halton(d=4, scramble=True, seed=np.random.default_rng(seed))
    zs, ws = [], []
    have = 0
    for _ in range(strategy.max_batches):
        u = engine.random(strategy.batch)
        z = z_set.draw(u[:, :2])
        w = w_set.draw(u[:, 2:])
        ok = z_set.contains(z) & w_set.contains(w)
        ok &= ~_degenerate_z(m, z) & ~_degenerate_w(m, w)
        ok &= np.abs(m(z, w)) >= threshold
        zs.append(z[ok])
        ws.append(w[ok])
        have += int(ok.sum())
        if have >= n:
            break
    if have < n:
        raise SamplingError(f"only {have} of {n} admissible sample points found")
    return np.concatenate(zs)[:n], np.concatenate(ws)[:n]


def default_clearance(cross: Cross) -> float:
    return CLEARANCE_FRACTION * cross.diameter()


def sample_cross(f: Callable, cross: Cross, m: SingularSet,
                 strategy: SamplingStrategy = SamplingStrategy()) -> SampleSet:
    """Samples of ``f`` on ``(A x G) ∪ (D x B)`` with ``|P| >= clearance * scale(P)``.

    Slices through ``z`` with ``M_z = G`` (and ``w`` with ``M^w = D``) are skipped.
    """
    clearance = strategy.clearance if strategy.clearance is not None else default_clearance(cross)
    if clearance > cross.diameter():
        raise SamplingError("clearance exceeds the diameter of D x G")
    threshold = clearance * m.scale
    s_ag, s_db = np.random.SeedSequence(strategy.seed).spawn(2)
    z1, w1 = _draw(cross.a_spec, cross.g_spec, m, strategy.n_ag, threshold, s_ag, strategy)
    z2, w2 = _draw(cross.d_spec, cross.b_spec, m, strategy.n_db, threshold, s_db, strategy)
    z = np.concatenate([z1, z2])
    w = np.concatenate([w1, w2])
    values = np.asarray(f(z, w), dtype=complex)
    if not np.all(np.isfinite(values)):
        raise SamplingError("ground truth is not finite at some sample points")
    branch = np.concatenate([np.zeros(z1.size, dtype=np.int8), np.ones(z2.size, dtype=np.int8)])
    return SampleSet(z, w, values, branch)


@dataclass(frozen=True, eq=False)
class RationalApproximant:
    coeffs: np.ndarray = field(repr=False)
    singular: SingularSet
    m: int
    conditioning: float

    @property
    def deg(self) -> tuple[int, int]:
        return (self.coeffs.shape[0] - 1, self.coeffs.shape[1] - 1)

    def numerator(self, z, w) -> np.ndarray:
        return poly_eval(self.coeffs, z, w)

    def __call__(self, z, w) -> np.ndarray:
        return self.numerator(z, w) / self.singular(z, w) ** self.m


def fit_rational(samples: SampleSet, p: SingularSet, m: int, deg: tuple[int, int],
                 floor: float = WEIGHT_FLOOR) -> RationalApproximant:
    """Least-squares numerator ``N`` of degree ``deg`` with ``N / P**m`` matching the samples.

    Residuals ``N - f P**m`` are weighted by ``1 / max(|P|**m, floor)``, i.e.
    the fit is close to minimizing the error of ``N / P**m`` itself.
    """
    dz, dw = deg
    if m < 0 or dz < 0 or dw < 0:
        raise ValueError("degrees and pole order must be non-negative")
    n_coef = (dz + 1) * (dw + 1)
    if len(samples) < 2 * n_coef:
        raise ValueError(f"need at least {2 * n_coef} samples for degrees {deg}")
    z, w = samples.z, samples.w
    pm = p(z, w) ** m
    weight = 1.0 / np.maximum(np.abs(pm), floor)
    design = ((z[:, None] ** np.arange(dz + 1))[:, :, None]
              * (w[:, None] ** np.arange(dw + 1))[:, None, :]).reshape(len(samples), n_coef)
    design *= weight[:, None]
    rhs = samples.values * pm * weight
    norms = np.linalg.norm(design, axis=0)
    norms[norms == 0] = 1.0
    scaled = design / norms
    sv = np.linalg.svd(scaled, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
    if not cond <= COND_LIMIT:
        raise RankDeficientError("sampling insufficient for degrees", conditioning=cond)
    sol, *_ = np.linalg.lstsq(scaled, rhs, rcond=None)
    coeffs = (sol / norms).reshape(dz + 1, dw + 1)
    return RationalApproximant(coeffs, p, int(m), cond)


@dataclass(frozen=True)
class ErrorReport:
    max_rel_error: float
    mean_rel_error: float
    n_test_points: int
    region: str


def _grid_clearance(env: ProductMask) -> float:
    def diam(g):
        return abs(g.upper - g.lower)
    return CLEARANCE_FRACTION * float(np.hypot(diam(env.grid_z), diam(env.grid_w)))


def draw_cells(region: ProductMask, exclude: ProductMask | None, m: SingularSet, n: int,
               seed: int, clearance: float, batch: int = 8192,
               max_batches: int = 200) -> tuple[np.ndarray, np.ndarray]:
    """Uniformly drawn nodes of ``region`` minus ``exclude`` with ``|P| >= clearance * scale``."""
    rng = np.random.default_rng(seed)
    zs = region.grid_z.points().ravel()
    ws = region.grid_w.points().ravel()
    threshold = clearance * m.scale
    got_z, got_w = [], []
    have = 0
    for _ in range(max_batches):
        iz = rng.integers(region.n_z, size=batch)
        jw = rng.integers(region.n_w, size=batch)
        ok = region.contains_index(iz, jw)
        if exclude is not None:
            ok &= ~exclude.contains_index(iz, jw)
        z, w = zs[iz[ok]], ws[jw[ok]]
        keep = np.abs(m(z, w)) >= threshold
        got_z.append(z[keep])
        got_w.append(w[keep])
        have += int(keep.sum())
        if have >= n:
            break
    return np.concatenate(got_z)[:n], np.concatenate(got_w)[:n]


def verify_extension(approx: RationalApproximant, f: Callable, env: ProductMask,
                     trace: ProductMask, n_test: int = 500, seed: int = 0,
                     clearance: float | None = None) -> ErrorReport:
    """Relative error ``|approx - f| / (1 + |f|)`` on the envelope minus the trace of ``M``."""
    if n_test < 100:
        raise ValueError("need at least 100 test points")
    if not env.any():
        raise SamplingError("empty envelope")
    clearance = _grid_clearance(env) if clearance is None else clearance
    z, w = draw_cells(env, trace, approx.singular, n_test, seed, clearance)
    if z.size < n_test / 2:
        raise SamplingError(f"only {z.size} of {n_test} test points found")
    ref = f(z, w)
    err = np.abs(approx(z, w) - ref) / (1.0 + np.abs(ref))
    return ErrorReport(float(err.max()), float(err.mean()), int(z.size), "envelope minus trace")


def uniqueness_residual(cross: Cross, m: SingularSet, p_power: int, deg: tuple[int, int],
                        strategy: SamplingStrategy = SamplingStrategy()) -> float:
    """Largest coefficient of the fit to zero data on ``(A x B) \\ M``.

    Returns ``inf`` when the design is rank-deficient, i.e. when ``A x B``
    sampling does not pin down the rational class.
    """
    clearance = strategy.clearance if strategy.clearance is not None else default_clearance(cross)
    seq = np.random.SeedSequence(strategy.seed).spawn(3)[2]
    z, w = _draw(cross.a_spec, cross.b_spec, m, strategy.n_ag + strategy.n_db,
                 clearance * m.scale, seq, strategy)
    zero = SampleSet(z, w, np.zeros(z.size, dtype=complex), np.zeros(z.size, dtype=np.int8))
    try:
        fit = fit_rational(zero, m, p_power, deg)
    except RankDeficientError as exc:
        log.info("uniqueness check rank-deficient (condition %.3e)", exc.conditioning)
        return float("inf")
    return float(np.max(np.abs(fit.coeffs)))


def cauchy_reconstruct(f_eval: Callable, center: tuple[complex, complex],
                       radii: tuple[float, float], n_quad: int = 64) -> complex:
    """Value at ``center`` from the double Cauchy integral over the torus.

    Trapezoidal rule on ``n_quad x n_quad`` nodes; the result is checked
    against the rule with twice as many nodes per circle.
    """
    if n_quad < 32:
        raise ValueError("n_quad must be >= 32")
    a, b = complex(center[0]), complex(center[1])
    delta, eps = radii

    def rule(n: int) -> complex:
        t = 2 * np.pi * np.arange(n) / n
        z = a + delta * np.exp(1j * t)
        w = b + eps * np.exp(1j * t)
        vals = np.asarray(f_eval(z[:, None], w[None, :]), dtype=complex)
        return complex(vals.mean())

    coarse, fine = rule(n_quad), rule(2 * n_quad)
    if abs(coarse - fine) > 1e-6:
        raise QuadratureError(f"quadrature not converged: |I_n - I_2n| = {abs(coarse - fine):.3e}")
    return coarse


def local_cross(d_k: Shape, g_k: Shape, base: tuple[complex, complex], rho: float) -> Cross:
    """``(Δ_a(ρ) x G_k) ∪ (D_k x Δ_b(ρ))`` around the base point ``(a, b)``."""
    from .geometry import Disc

    a, b = base
    return Cross(d_k, Disc(a, rho, closed=True), g_k, Disc(b, rho, closed=True))


def local_overlap_consistency(fit1: RationalApproximant, fit2: RationalApproximant,
                              overlap: ProductMask, n_test: int = 500, seed: int = 0,
                              trace: ProductMask | None = None,
                              clearance: float | None = None) -> float:
    """Largest relative discrepancy ``|fit1 - fit2| / (1 + |fit2|)`` on the overlap."""
    if fit1.m != fit2.m or not np.array_equal(fit1.singular.coeffs, fit2.singular.coeffs):
        raise ValueError("fits must share the denominator P**m")
    if trace is None:
        from .singularity import envelope_trace
        trace = envelope_trace(fit1.singular, overlap)
    clearance = _grid_clearance(overlap) if clearance is None else clearance
    z, w = draw_cells(overlap, trace, fit1.singular, n_test, seed, clearance)
    if z.size == 0:
        raise SamplingError("empty usable overlap")
    v1, v2 = fit1(z, w), fit2(z, w)
    return float(np.max(np.abs(v1 - v2) / (1.0 + np.abs(v2))))
