"""Walk-on-spheres estimate of the relative extremal function.

In the plane the regularized extremal function of the condenser ``(Omega, A)``
is the probability that Brownian motion started at ``z`` leaves ``Omega``
before it hits ``A``.  The walker jumps to a uniform point on the largest
circle around its position that stays inside ``Omega \\ A`` (radius from the
shapes' distance bounds) and is absorbed once it is within ``capture`` of
either boundary.

Trials are processed in fixed blocks; block ``j`` draws from a generator
seeded by ``(seed, j)``, so the estimate does not depend on how blocks are
scheduled across workers.
"""

from __future__ import annotations

from concurrent.futures import Executor
from dataclasses import dataclass

import numpy as np

from .errors import MonteCarloError
from .geometry import Shape

BLOCK = 1024


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_samples: int
    seed: int
    censored: int = 0


def _block(z0: complex, omega: Shape, a: Shape, n: int, seed: int, block: int,
           capture: float, max_steps: int) -> tuple[int, int, int]:
    rng = np.random.default_rng(np.random.SeedSequence([seed, block]))
    pos = np.full(n, z0, dtype=complex)
    active = np.ones(n, dtype=bool)
    exited = np.zeros(n, dtype=bool)
    for _ in range(max_steps):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        p = pos[idx]
        d_out = -omega.sdf(p)
        d_a = a.sdf(p)
        stop = (d_out < capture) | (d_a < capture)
        exited[idx[stop & (d_out <= d_a)]] = True
        active[idx[stop]] = False
        go = ~stop
        r = np.minimum(d_out[go], d_a[go])
        phase = rng.uniform(0.0, 2.0 * np.pi, size=int(go.sum()))
        pos[idx[go]] = p[go] + r * np.exp(1j * phase)
    return int(exited.sum()), int((~active).sum()), int(active.sum())


def mc_exit_probability(z: complex, omega_spec: Shape, a_spec: Shape, n: int, seed: int,
                        capture: float | None = None, max_steps: int = 10_000,
                        executor: Executor | None = None) -> McEstimate:
    """Fraction of walks from ``z`` absorbed at the outer boundary before ``A``."""
    z = complex(z)
    if n < 100:
        raise ValueError("need at least 100 walks")
    if not omega_spec.contains(np.array([z]))[0] or a_spec.contains(np.array([z]))[0]:
        raise MonteCarloError("start point must lie in Omega \\ A")
    if capture is None:
        capture = 1e-3 * omega_spec.diameter()

    sizes = [BLOCK] * (n // BLOCK) + ([n % BLOCK] if n % BLOCK else [])
    args = [(z, omega_spec, a_spec, m, seed, j, capture, max_steps) for j, m in enumerate(sizes)]
    if executor is None:
        results = [_block(*arg) for arg in args]
    else:
        results = list(executor.map(lambda arg: _block(*arg), args))
    exited = sum(r[0] for r in results)
    finished = sum(r[1] for r in results)
    censored = sum(r[2] for r in results)
    if censored > 0.01 * n:
        raise MonteCarloError(f"{censored} of {n} walks censored")
    p = exited / finished
    se = float(np.sqrt(p * (1.0 - p) / finished))
    return McEstimate(float(p), se, finished, int(seed), censored)
