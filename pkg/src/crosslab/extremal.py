"""Relative extremal function of a condenser on a grid.

For ``A`` inside an open planar set ``Omega`` the relative extremal function
is the upper envelope of subharmonic ``u`` with ``u <= 1`` on ``Omega`` and
``u <= 0`` on ``A``.  On a grid this is the discrete obstacle problem: the
largest function that is discretely subharmonic under the 5-point stencil,
vanishes on ``A`` and does not exceed 1.  The value 1 is carried by ghost
nodes just outside ``Omega``, so in-domain values stay strictly below 1
wherever the component meets ``A``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceError, ExhaustionError, ResolutionError
from .geometry import Grid, Mask, Shape, exhaustion, rasterize

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolveParams:
    tol: float = 1e-7
    max_iter: int | None = None
    relaxation: float = 1.5
    method: str = "direct"

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not 1.0 <= self.relaxation < 2.0:
            raise ValueError("relaxation must lie in [1, 2)")
        if self.method not in ("direct", "sor"):
            raise ValueError("method must be 'direct' or 'sor'")

    def iteration_cap(self, grid: Grid) -> int:
        if self.max_iter is not None:
            return self.max_iter
        return 200 * max(grid.nx, grid.ny)


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Grid values in ``[0, 1]`` on ``domain_mask``; NaN elsewhere."""

    grid: Grid
    domain_mask: Mask
    values: np.ndarray = field(repr=False)
    a_mask: Mask | None = None
    iterations: int = 0
    residual: float = 0.0

    def at(self, z: complex) -> float:
        """Value at the grid node nearest to ``z`` (NaN outside the grid)."""
        idx = self.grid.nearest_index(complex(z))
        if idx is None:
            return float("nan")
        return float(self.values[idx])

    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def defined(self) -> np.ndarray:
        return self.domain_mask.flags


_SHIFTS = ((-1, 0), (1, 0), (0, -1), (0, 1))  # north, south, west, east in (iy, ix)


def _neighbours(arr: np.ndarray, fill) -> list[np.ndarray]:
    """North, south, west, east neighbours of every node, ``fill`` off-grid."""
    p = np.pad(arr, 1, constant_values=fill)
    return [p[:-2, 1:-1], p[2:, 1:-1], p[1:-1, :-2], p[1:-1, 2:]]


def _crossing(p: np.ndarray, q: np.ndarray, inside, iters: int = 48) -> np.ndarray:
    """Fraction of the segment p->q after which ``inside`` first turns false.

    Assumes ``inside(p)``; returns 1 where ``inside(q)`` holds as well.
    """
    lo = np.zeros(p.shape)
    hi = np.ones(p.shape)
    done = np.asarray(inside(q), dtype=bool)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        ok = np.asarray(inside(p + mid * (q - p)), dtype=bool)
        lo = np.where(ok, mid, lo)
        hi = np.where(ok, hi, mid)
    return np.where(done, 1.0, np.clip(0.5 * (lo + hi), 1e-6, 1.0))


def _stencil(grid: Grid, dom: np.ndarray, a: np.ndarray, unknown: np.ndarray,
             omega_spec: Shape | None, a_spec: Shape | None):
    """Neighbour weights and constant term of the update ``u_p = sum c u_q + b``.

    Without shapes this is the plain 5-point mean with ghost value 1 outside
    ``Omega`` and 0 on ``A``.  With shapes, arms that end on a fixed node are
    shortened to the actual boundary crossing (Shortley-Weller weights).
    """
    nb_dom = _neighbours(dom, False)
    nb_unknown = _neighbours(unknown, False)
    if omega_spec is None and a_spec is None:
        coef = [np.where(nu, 0.25, 0.0) for nu in nb_unknown]
        b = sum(np.where(~nd, 0.25, 0.0) for nd in nb_dom)
        return coef, np.where(unknown, b, 0.0)

    z = grid.points()
    steps = [complex(0, -grid.hy), complex(0, grid.hy), complex(-grid.hx, 0), complex(grid.hx, 0)]
    theta = []
    boundary_value = []
    for step, nd, nu in zip(steps, nb_dom, nb_unknown):
        th = np.ones(grid.shape)
        g = np.zeros(grid.shape)
        ext = unknown & ~nd
        on_a = unknown & nd & ~nu
        if ext.any():
            g[ext] = 1.0
            if omega_spec is not None:
                th[ext] = _crossing(z[ext], z[ext] + step, omega_spec.contains)
        if on_a.any() and a_spec is not None:
            th[on_a] = _crossing(z[on_a], z[on_a] + step,
                                 lambda w: ~np.asarray(a_spec.contains(w), dtype=bool))
        theta.append(th)
        boundary_value.append(g)

    coef = []
    b = np.zeros(grid.shape)
    weights = []
    for pair, h in (((0, 1), grid.hy), ((2, 3), grid.hx)):
        t1, t2 = theta[pair[0]] * h, theta[pair[1]] * h
        weights.append((2.0 / (t1 * (t1 + t2)), 2.0 / (t2 * (t1 + t2)), 2.0 / (t1 * t2)))
    diag = weights[0][2] + weights[1][2]
    raw = [weights[0][0], weights[0][1], weights[1][0], weights[1][1]]
    for w, nu, g in zip(raw, nb_unknown, boundary_value):
        c = w / diag
        coef.append(np.where(unknown & nu, c, 0.0))
        b += np.where(unknown & ~nu, c * g, 0.0)
    return coef, b


def _direct(unknown: np.ndarray, coef: list[np.ndarray], b: np.ndarray) -> np.ndarray:
    n = int(unknown.sum())
    index = np.full(unknown.shape, -1, dtype=np.int64)
    index[unknown] = np.arange(n)
    rows = [np.arange(n)]
    cols = [np.arange(n)]
    data = [np.ones(n)]
    for nb_index, c in zip(_neighbours(index, -1), coef):
        nbi = nb_index[unknown]
        cu = c[unknown]
        inner = nbi >= 0
        rows.append(np.flatnonzero(inner))
        cols.append(nbi[inner])
        data.append(-cu[inner])
    mat = sp.csc_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
                        shape=(n, n))
    out = np.zeros(unknown.shape)
    out[unknown] = spla.spsolve(mat, b[unknown])
    return out


def _sweep(u: np.ndarray, colors: list[np.ndarray], coef: list[np.ndarray],
           b: np.ndarray, omega: float) -> float:
    """One red-black projected SOR sweep in place on the padded array ``u``."""
    change = 0.0
    inner = u[1:-1, 1:-1]
    for m in colors:
        mean = (coef[0] * u[:-2, 1:-1] + coef[1] * u[2:, 1:-1]
                + coef[2] * u[1:-1, :-2] + coef[3] * u[1:-1, 2:] + b)
        old = inner[m]
        new = np.minimum((1.0 - omega) * old + omega * mean[m], 1.0)
        inner[m] = new
        if new.size:
            change = max(change, float(np.max(np.abs(new - old))))
    return change


def solve_relative_extremal(omega_mask: Mask, a_mask: Mask,
                            params: SolveParams | None = None, *,
                            omega_spec: Shape | None = None,
                            a_spec: Shape | None = None) -> ScalarField:
    """Discrete relative extremal function of ``A`` in ``Omega``.

    ``method="direct"`` solves the equivalent Dirichlet problem with a sparse
    factorization and then runs projected SOR sweeps from that state until
    the sup-norm change drops below ``tol``.  ``method="sor"`` starts the
    sweeps from the obstacle itself.  Either way the returned field is a
    fixed point of the projected iteration.

    Passing ``omega_spec``/``a_spec`` switches the boundary rows to the
    boundary-fitted stencil, which is second-order accurate on curved
    boundaries; interior rows are the plain 5-point mean in both cases.
    """
    params = params or SolveParams()
    grid = omega_mask.grid
    dom = omega_mask.flags
    a = a_mask.flags & dom
    if not a.any():
        raise ResolutionError("A is empty")
    unknown = dom & ~a
    coef, b = _stencil(grid, dom, a, unknown, omega_spec, a_spec)

    if params.method == "direct" and unknown.any():
        start = _direct(unknown, coef, b)
        iterations = 1
    else:
        start = np.where(unknown, 1.0, 0.0)
        iterations = 0

    u = np.pad(np.where(dom & ~a, start, np.where(a, 0.0, 1.0)), 1, constant_values=1.0)
    parity = np.add.outer(np.arange(grid.ny), np.arange(grid.nx)) % 2 == 0
    colors = [unknown & parity, unknown & ~parity]
    cap = params.iteration_cap(grid)
    change = np.inf
    while True:
        change = _sweep(u, colors, coef, b, params.relaxation)
        iterations += 1
        if change < params.tol:
            break
        if iterations >= cap:
            raise ConvergenceError(
                f"no convergence after {iterations} sweeps (last change {change:.3e})",
                residual=change)

    values = np.clip(u[1:-1, 1:-1], 0.0, 1.0)
    values[a] = 0.0
    values[~dom] = np.nan
    log.debug("extremal solve: %d iterations, last change %.3e", iterations, change)
    return ScalarField(grid, omega_mask, values, Mask(grid, a), iterations, float(change))


def regularize_usc(field: ScalarField) -> ScalarField:
    """Grid analogue of upper semicontinuous regularization.

    Isolated dips, nodes strictly below every in-domain node of their 3x3
    neighbourhood, are raised to the smallest neighbouring value until none
    remain; nodes of ``A`` stay at 0.  Fields without dips are returned
    unchanged, and the output is a fixed point of the operation.
    """
    dom = field.domain_mask.flags
    a = field.a_mask.flags if field.a_mask is not None else np.zeros_like(dom)
    v = np.where(dom, field.values, np.inf)
    movable = dom & ~a
    shifts = [(dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if (dy, dx) != (0, 0)]
    for _ in range(v.size):
        p = np.pad(v, 1, constant_values=np.inf)
        ny, nx = v.shape
        nbmin = np.min([p[1 + dy:1 + dy + ny, 1 + dx:1 + dx + nx] for dy, dx in shifts], axis=0)
        dips = movable & np.isfinite(nbmin) & (v < nbmin)
        if not dips.any():
            break
        v = np.where(dips, nbmin, v)
    values = np.where(dom, v, np.nan)
    values[a] = 0.0
    return ScalarField(field.grid, field.domain_mask, values, field.a_mask,
                       field.iterations, field.residual)


@dataclass(frozen=True, eq=False)
class OmegaLimit:
    field: ScalarField
    fields: list = field(repr=False)
    max_increase: np.ndarray = field(repr=False)
    worst_increase: float = 0.0


def omega_limit(omega_spec: Shape, a_spec: Shape, grid: Grid, k_max: int,
                params: SolveParams | None = None, fitted: bool = True) -> OmegaLimit:
    """Solve on the exhaustion ``Omega_1 ⊂ ... ⊂ Omega_kmax`` and check monotone decrease.

    ``max_increase`` records, per node, the largest step-to-step increase over
    the sequence (negative or zero for a properly decreasing sequence).
    """
    params = params or SolveParams()
    if k_max < 2:
        raise ValueError("k_max must be >= 2")
    a_full = rasterize(a_spec, grid)
    fields = []
    for k in range(1, k_max + 1):
        omega_k = exhaustion(omega_spec, k)
        mask_k = rasterize(omega_k, grid)
        a_k = a_full & mask_k
        if not a_k.flags.any():
            raise ExhaustionError(f"A does not meet the exhaustion at k={k}")
        fields.append(solve_relative_extremal(mask_k, a_k, params, omega_spec=omega_k if fitted else None,
                                              a_spec=a_spec if fitted else None))

    max_inc = np.full(grid.shape, -np.inf)
    for prev, cur in zip(fields, fields[1:]):
        both = prev.defined() & cur.defined()
        inc = np.where(both, cur.values - prev.values, -np.inf)
        max_inc = np.maximum(max_inc, inc)
    worst = float(np.max(max_inc)) if np.isfinite(max_inc).any() else 0.0
    if worst > 5 * params.tol:
        raise ExhaustionError(f"exhaustion inconsistency: increase {worst:.3e}")
    return OmegaLimit(fields[-1], fields, max_inc, worst)
