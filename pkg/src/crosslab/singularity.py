"""Algebraic singular sets ``M = {P(z, w) = 0}`` and their fibers.

``P`` is stored as a coefficient matrix ``C`` with ``C[a, b]`` the coefficient
of ``z**a * w**b``.  A set given as a list of graphs ``w = phi_j(z)`` keeps
the graphs alongside ``P = prod_j (w - phi_j(z))`` so fibers over ``z`` are
returned exactly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cross import ProductMask
from .errors import RootFindingError

log = logging.getLogger(__name__)

DEGENERATE_TOL = 1e-12
RESIDUAL_TOL = 1e-8
TIE = 1e-9
CLUSTER = 1e-5


def _cplx(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


def _trim(c: np.ndarray) -> np.ndarray:
    c = np.atleast_2d(np.asarray(c, dtype=complex))
    nz = np.argwhere(c != 0)
    if nz.size == 0:
        return np.zeros((1, 1), dtype=complex)
    return c[: nz[:, 0].max() + 1, : nz[:, 1].max() + 1].copy()


def sort_roots(roots) -> np.ndarray:
    roots = np.asarray(roots, dtype=complex).ravel()
    order = sorted(range(roots.size), key=lambda i: (round(roots[i].real / TIE), roots[i].imag))
    return roots[order]


@dataclass(frozen=True, eq=False)
class SingularSet:
    coeffs: np.ndarray = field(repr=False)
    graphs: tuple | None = None

    def __post_init__(self):
        c = _trim(self.coeffs)
        if not np.any(c):
            raise ValueError("P must not vanish identically")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        if self.graphs is not None:
            gs = tuple(np.trim_zeros(np.asarray(g, dtype=complex), "b") for g in self.graphs)
            gs = tuple(g if g.size else np.zeros(1, dtype=complex) for g in gs)
            for i in range(len(gs)):
                for j in range(i):
                    n = max(gs[i].size, gs[j].size)
                    if np.array_equal(np.pad(gs[i], (0, n - gs[i].size)),
                                      np.pad(gs[j], (0, n - gs[j].size))):
                        raise ValueError("graphs must be pairwise distinct")
            object.__setattr__(self, "graphs", gs)

    @classmethod
    def from_poly(cls, coeffs) -> "SingularSet":
        return cls(np.asarray(coeffs, dtype=complex))

    @classmethod
    def from_graphs(cls, graphs: Sequence[Sequence[complex]]) -> "SingularSet":
        """``graphs[j]`` holds ascending z-coefficients of ``phi_j``."""
        poly = np.ones((1, 1), dtype=complex)
        for g in graphs:
            g = np.asarray(g, dtype=complex)
            factor = np.zeros((g.size, 2), dtype=complex)
            factor[0, 1] = 1.0
            factor[:, 0] = -g
            poly = _polymul2(poly, factor)
        return cls(poly, tuple(np.asarray(g, dtype=complex) for g in graphs))

    @classmethod
    def from_dict(cls, d: dict) -> "SingularSet":
        if "graphs" in d:
            return cls.from_graphs([[_cplx(c) for c in g] for g in d["graphs"]])
        return cls.from_poly([[_cplx(c) for c in row] for row in d["poly"]])

    def to_dict(self) -> dict:
        enc = lambda c: [float(c.real), float(c.imag)]  # noqa: E731
        if self.graphs is not None:
            return {"graphs": [[enc(c) for c in g] for g in self.graphs]}
        return {"poly": [[enc(c) for c in row] for row in self.coeffs]}

    @property
    def d_z(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def d_w(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def swapped(self) -> "SingularSet":
        return SingularSet(self.coeffs.T)

    def w_coeffs(self, z) -> np.ndarray:
        """Coefficients of ``P(z, .)`` in ascending powers of ``w``; shape ``z.shape + (d_w+1,)``."""
        z = np.asarray(z, dtype=complex)
        powers = z[..., None] ** np.arange(self.d_z + 1)
        return powers @ self.coeffs

    def __call__(self, z, w) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        z, w = np.broadcast_arrays(z, w)
        cw = self.w_coeffs(z)
        return np.sum(cw * w[..., None] ** np.arange(self.d_w + 1), axis=-1)

    def grad(self, z, w) -> tuple[np.ndarray, np.ndarray]:
        cz = self.coeffs[1:] * np.arange(1, self.d_z + 1)[:, None]
        cw = self.coeffs[:, 1:] * np.arange(1, self.d_w + 1)[None, :]
        pz = SingularSet(cz)(z, w) if cz.size and np.any(cz) else np.zeros(np.broadcast(z, w).shape)
        pw = SingularSet(cw)(z, w) if cw.size and np.any(cw) else np.zeros(np.broadcast(z, w).shape)
        return pz, pw


def _polymul2(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    out = np.zeros((p.shape[0] + q.shape[0] - 1, p.shape[1] + q.shape[1] - 1), dtype=complex)
    for (a, b), c in np.ndenumerate(p):
        if c != 0:
            out[a:a + q.shape[0], b:b + q.shape[1]] += c * q
    return out


@dataclass(frozen=True, eq=False)
class FiberResult:
    roots: np.ndarray
    degenerate: bool = False

    def distinct(self, tol: float = 1e-6) -> list[tuple[complex, int]]:
        out: list[list] = []
        for r in self.roots:
            for item in out:
                if abs(item[0] - r) <= tol:
                    item[1] += 1
                    break
            else:
                out.append([complex(r), 1])
        return [(r, k) for r, k in out]

    def min_separation(self) -> float:
        r = self.roots
        if r.size < 2:
            return np.inf
        d = np.abs(r[:, None] - r[None, :])
        d[np.diag_indices(r.size)] = np.inf
        return float(d.min())


def _poly_roots(c: np.ndarray, scale: float) -> FiberResult:
    """Roots of ``sum c[b] x**b`` (ascending), with polishing and a residual check."""
    mag = np.abs(c)
    if np.all(mag <= DEGENERATE_TOL * scale):
        return FiberResult(np.zeros(0, dtype=complex), True)
    top = int(np.flatnonzero(mag > DEGENERATE_TOL * scale).max())
    c = c[: top + 1]
    if top == 0:
        return FiberResult(np.zeros(0, dtype=complex), False)
    roots = np.roots(c[::-1])
    dc = c[1:] * np.arange(1, top + 1)
    for _ in range(3):
        val = np.polyval(c[::-1], roots)
        der = np.polyval(dc[::-1], roots)
        ok = np.abs(der) > 1e-8 * scale
        step = np.where(ok, val / np.where(ok, der, 1.0), 0.0)
        cand = roots - step
        better = np.abs(np.polyval(c[::-1], cand)) < np.abs(val)
        roots = np.where(better, cand, roots)
    res = np.abs(np.polyval(c[::-1], roots))
    bound = RESIDUAL_TOL * np.maximum(
        np.abs(c)[None, :] @ (np.abs(roots)[None, :] ** np.arange(top + 1)[:, None]), scale).ravel()
    if np.any(res > bound):
        raise RootFindingError("root polishing did not converge", residuals=res)
    return FiberResult(sort_roots(roots), False)


def fiber_w(m: SingularSet, z: complex) -> FiberResult:
    """``M_z``: all roots of ``w -> P(z, w)`` with multiplicity, sorted by (re, im)."""
    z = complex(z)
    if m.graphs is not None:
        vals = [np.polynomial.polynomial.polyval(z, g) for g in m.graphs]
        return FiberResult(sort_roots(vals), False)
    scale = m.scale * max(1.0, abs(z)) ** m.d_z
    return _poly_roots(m.w_coeffs(z), scale)


def fiber_z(m: SingularSet, w: complex) -> FiberResult:
    """``M^w``: all roots of ``z -> P(z, w)``."""
    w = complex(w)
    if m.graphs is not None:
        roots = []
        degenerate = False
        for g in m.graphs:
            c = g.astype(complex).copy()
            c[0] -= w
            res = _poly_roots(c, max(1.0, float(np.max(np.abs(g)))))
            degenerate |= res.degenerate
            roots.extend(res.roots)
        return FiberResult(sort_roots(roots), degenerate)
    return fiber_w(m.swapped(), w)


def _sylvester(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Sylvester matrix of polynomials given by descending coefficients."""
    n, k = f.size - 1, g.size - 1
    s = np.zeros((n + k, n + k), dtype=complex)
    for i in range(k):
        s[i, i:i + n + 1] = f
    for i in range(n):
        s[k + i, i:i + k + 1] = g
    return s


def discriminant_poly(m: SingularSet) -> tuple[np.ndarray, bool]:
    """Ascending z-coefficients of ``Res_w(P, dP/dw)`` and whether it vanishes identically.

    The resultant is sampled at roots of unity and interpolated with an FFT;
    the degree bound ``d_z * (2 d_w - 1)`` makes the interpolation exact.
    """
    dw, dz = m.d_w, m.d_z
    if dw < 1:
        raise ValueError("P must depend on w")
    n = dz * (2 * dw - 1) + 1
    nodes = np.exp(2j * np.pi * np.arange(n) / n)
    cw = m.w_coeffs(nodes)
    dets = np.empty(n, dtype=complex)
    bound = 0.0
    for i in range(n):
        f = cw[i][::-1]
        g = (cw[i][1:] * np.arange(1, dw + 1))[::-1]
        s = _sylvester(f, g)
        dets[i] = np.linalg.det(s)
        bound = max(bound, float(np.prod(np.linalg.norm(s, axis=1))))
    # samples at exp(2 pi i j/n): the forward FFT returns n times the coefficients
    coeffs = np.fft.fft(dets) / n
    zero = bool(np.max(np.abs(dets)) <= 1e-10 * max(bound, 1e-300))
    return coeffs, zero


@dataclass(frozen=True, eq=False)
class BranchLocus:
    points: np.ndarray
    square_free: SingularSet
    factors: list = field(default_factory=list)


def _derivative(c: np.ndarray, kz: int, kw: int) -> np.ndarray:
    out = np.asarray(c, dtype=complex)
    for _ in range(kz):
        out = out[1:] * np.arange(1, out.shape[0])[:, None] if out.shape[0] > 1 else np.zeros((1, out.shape[1]))
    for _ in range(kw):
        out = out[:, 1:] * np.arange(1, out.shape[1])[None, :] if out.shape[1] > 1 else np.zeros((out.shape[0], 1))
    return out


def _evaluate(c: np.ndarray, z: complex, w: complex) -> complex:
    return complex((z ** np.arange(c.shape[0])) @ c @ (w ** np.arange(c.shape[1])))


def _polish_branch_point(m: SingularSet, z0: complex, steps: int = 8) -> complex:
    """Newton on ``P = dP/dw = 0`` from ``z0`` and the closest root pair of its fiber."""
    fib = fiber_w(m, z0).roots if m.graphs is None else np.zeros(0)
    if fib.size < 2:
        return z0
    d = np.abs(fib[:, None] - fib[None, :]) + np.diag(np.full(fib.size, np.inf))
    i, j = np.unravel_index(np.argmin(d), d.shape)
    z, w = z0, 0.5 * (fib[i] + fib[j])
    c = m.coeffs
    pz, pw = _derivative(c, 1, 0), _derivative(c, 0, 1)
    pwz, pww = _derivative(c, 1, 1), _derivative(c, 0, 2)

    def size(z, w):
        return abs(_evaluate(c, z, w)) + abs(_evaluate(pw, z, w))

    best = (size(z, w), z)
    for _ in range(steps):
        f = np.array([_evaluate(c, z, w), _evaluate(pw, z, w)])
        jac = np.array([[_evaluate(pz, z, w), _evaluate(pw, z, w)],
                        [_evaluate(pwz, z, w), _evaluate(pww, z, w)]])
        try:
            dz, dw = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            break
        z, w = z + dz, w + dw
        r = size(z, w)
        if not np.isfinite(r):
            break
        if r < best[0]:
            best = (r, z)
    # only accept a polished point that stays close to the resultant root
    return best[1] if abs(best[1] - z0) <= 1e-4 * max(1.0, abs(z0)) else z0


def _locus_points(m: SingularSet) -> tuple[np.ndarray, bool]:
    coeffs, zero = discriminant_poly(m)
    if zero:
        return np.zeros(0, dtype=complex), True
    mag = np.abs(coeffs)
    keep = np.flatnonzero(mag > 1e-11 * mag.max())
    c = coeffs[: keep.max() + 1]
    if c.size <= 1:
        return np.zeros(0, dtype=complex), False
    roots = np.roots(c[::-1])
    dc = c[1:] * np.arange(1, c.size)
    for _ in range(4):
        der = np.polyval(dc[::-1], roots)
        ok = np.abs(der) > 0
        step = np.where(ok, np.polyval(c[::-1], roots) / np.where(ok, der, 1.0), 0.0)
        cand = roots - step
        better = np.abs(np.polyval(c[::-1], cand)) <= np.abs(np.polyval(c[::-1], roots))
        roots = np.where(better, cand, roots)
    # a k-fold root of the resultant comes back split by about eps**(1/k); merge by the mean
    clusters: list[list[complex]] = []
    for r in sort_roots(roots):
        for cl in clusters:
            if abs(r - cl[0]) <= CLUSTER * max(1.0, abs(cl[0])):
                cl.append(r)
                break
        else:
            clusters.append([r])
    roots = np.array([_polish_branch_point(m, complex(np.mean(cl))) for cl in clusters], dtype=complex)
    lead = np.trim_zeros(np.asarray(m.coeffs, dtype=complex)[:, m.d_w], "b")
    if lead.size > 1:
        roots = np.concatenate([np.roots(lead[::-1]), roots])
    out: list[complex] = []
    for r in roots:
        if not any(abs(r - q) <= max(TIE, CLUSTER * max(1.0, abs(q))) for q in out):
            out.append(complex(r))
    return sort_roots(np.array(out, dtype=complex)), False


def _square_free(m: SingularSet) -> tuple[SingularSet, list]:
    import sympy

    z, w = sympy.symbols("z w")

    def exact(c: complex):
        return (sympy.Rational(c.real).limit_denominator(10 ** 12)
                + sympy.I * sympy.Rational(c.imag).limit_denominator(10 ** 12))

    expr = sum(exact(c) * z ** a * w ** b for (a, b), c in np.ndenumerate(m.coeffs) if c != 0)
    _, parts = sympy.sqf_list(sympy.expand(expr), z, w, extension=sympy.I)
    factors = []
    product = sympy.Integer(1)
    for fac, mult in parts:
        poly = sympy.Poly(fac, z, w)
        mat = np.zeros((poly.degree(z) + 1, poly.degree(w) + 1), dtype=complex)
        for (a, b), c in poly.terms():
            mat[a, b] = complex(c)
        factors.append((SingularSet(mat), int(mult)))
        product *= fac
    poly = sympy.Poly(sympy.expand(product), z, w)
    mat = np.zeros((poly.degree(z) + 1, poly.degree(w) + 1), dtype=complex)
    for (a, b), c in poly.terms():
        mat[a, b] = complex(c)
    return SingularSet(mat), factors


def branch_locus_report(m: SingularSet) -> BranchLocus:
    points, zero = _locus_points(m)
    if not zero:
        return BranchLocus(points, m, [(m, 1)])
    sf, factors = _square_free(m)
    log.info("P is not square-free; multiplicities %s", [k for _, k in factors])
    if sf.d_w < 1:
        return BranchLocus(np.zeros(0, dtype=complex), sf, factors)
    points, _ = _locus_points(sf)
    return BranchLocus(points, sf, factors)


def branch_locus(m: SingularSet) -> np.ndarray:
    """z-projection of ``{P = dP/dw = 0}`` plus zeros of the leading w-coefficient."""
    return branch_locus_report(m).points


def lipschitz_bounds(m: SingularSet, rz: float, rw: float) -> tuple[float, float]:
    """Bounds for ``|dP/dz|`` and ``|dP/dw|`` on the polydisc ``|z| <= rz, |w| <= rw``."""
    mag = np.abs(m.coeffs)
    a = np.arange(m.d_z + 1)[:, None]
    b = np.arange(m.d_w + 1)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        lz = np.sum(np.where(a > 0, mag * a * rz ** np.maximum(a - 1, 0) * rw ** b, 0.0))
        lw = np.sum(np.where(b > 0, mag * b * rz ** a * rw ** np.maximum(b - 1, 0), 0.0))
    return float(lz), float(lw)


def envelope_trace(m: SingularSet, env: ProductMask, chunk: int = 256) -> ProductMask:
    """Product cells that may meet ``M``, restricted to ``env``.

    A cell is flagged when ``|P(center)|`` is within a Lipschitz bound times
    the cell's half-diagonals; the test can overflag by about one cell.
    """
    gz, gw = env.grid_z, env.grid_w
    hz = 0.5 * np.hypot(gz.hx, gz.hy)
    hw = 0.5 * np.hypot(gw.hx, gw.hy)
    zs = gz.points().ravel()
    ws = gw.points().ravel()
    lz, lw = lipschitz_bounds(m, float(np.abs(zs).max()) + hz, float(np.abs(ws).max()) + hw)
    tol = lz * hz + lw * hw
    cz = m.w_coeffs(zs)
    wpow = ws[:, None] ** np.arange(m.d_w + 1)
    bits = np.zeros_like(env.bits)
    for start in range(0, gw.size, chunk):
        block = np.abs(cz @ wpow[start:start + chunk].T) <= tol
        bits[start:start + chunk] = np.packbits(block.T, axis=1)
    return ProductMask(gz, gw, bits & env.bits)


@dataclass(frozen=True)
class Isolation:
    isolated: bool
    empty: bool

    def __bool__(self) -> bool:
        return self.isolated


def _common_roots(sets: Sequence[SingularSet], z: complex) -> np.ndarray | None:
    """Points of ``M_z`` common to every set; ``None`` when all fibers are whole lines."""
    base = None
    for s in sets:
        fib = fiber_w(s, z)
        if not fib.degenerate:
            base = fib.roots
            break
    if base is None:
        return None
    keep = np.ones(base.size, dtype=bool)
    for s in sets:
        val = np.abs(s(np.full(base.size, z), base))
        keep &= val <= 1e-6 * s.scale * max(1.0, abs(z)) ** s.d_z * np.maximum(1.0, np.abs(base)) ** s.d_w
    return base[keep]


def is_isolated_point(m: SingularSet | Sequence[SingularSet], center: tuple[complex, complex],
                      radii: tuple[float, float], n_rings: int = 12,
                      n_angles: int = 32) -> Isolation:
    """Whether ``(a, b)`` is the only point of ``M`` in the bidisc ``Δ_a(δ) x Δ_b(ε)``.

    ``m`` may be a list of sets, meaning their common zero set.  Fibers over a
    probe pattern of z-values around ``a`` must all miss ``Δ_b(ε)``; a bidisc
    containing no point of ``M`` at all reports ``empty=True``.
    """
    sets = [m] if isinstance(m, SingularSet) else list(m)
    a, b = complex(center[0]), complex(center[1])
    delta, eps = radii
    on = all(abs(s(a, b)) <= RESIDUAL_TOL * s.scale * max(1.0, abs(a), abs(b)) ** (s.d_z + s.d_w)
             for s in sets)

    def hits(z: complex) -> bool:
        roots = _common_roots(sets, z)
        if roots is None:
            return True
        return bool(np.any(np.abs(roots - b) < eps))

    centre_roots = _common_roots(sets, a)
    other_on_centre = centre_roots is None or bool(np.any(
        (np.abs(centre_roots - b) < eps) & (np.abs(centre_roots - b) > 1e-6)))
    rings = np.linspace(1.0 / n_rings, 1.0, n_rings) * delta * (1 - 1e-9)
    angles = 2 * np.pi * (np.arange(n_angles) + 0.5) / n_angles
    probe_hit = any(hits(a + r * np.exp(1j * t)) for r in rings for t in angles)
    isolated = on and not probe_hit and not other_on_centre
    empty = not on and not probe_hit and not (centre_roots is None or bool(
        np.any(np.abs(centre_roots - b) < eps)))
    return Isolation(isolated, empty)
