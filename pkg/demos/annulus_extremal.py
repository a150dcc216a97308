"""Relative extremal function of a small closed disc inside the unit disc.

For A = {|z| <= 1/4} and Omega = {|z| < 1} the answer is known in closed
form, log(4|z|)/log 4 on the annulus and 0 on A.  We solve on a grid, compare
with that formula, then spot-check a few points with walk-on-spheres.

    python demos/annulus_extremal.py
"""

import numpy as np

from crosslab.extremal import SolveParams, solve_relative_extremal
from crosslab.geometry import Disc, Grid, rasterize
from crosslab.walk import mc_exit_probability

omega, a = Disc(0, 1.0), Disc(0, 0.25, closed=True)
grid = Grid.square(1.05, 256)

# Passing the shapes turns on the boundary-fitted stencil at the circles.
field = solve_relative_extremal(rasterize(omega, grid), rasterize(a, grid), SolveParams(tol=1e-10),
                                omega_spec=omega, a_spec=a)
print(f"solver: {field.iterations} sweeps, final change {field.residual:.1e}")

z = grid.points()
ring = field.defined() & (np.abs(z) > 0.25)
exact = np.log(4 * np.abs(z[ring])) / np.log(4)
print(f"max error against log(4|z|)/log 4: {np.max(np.abs(field.values[ring] - exact)):.2e}")

# The same value is the probability that Brownian motion from z leaves
# Omega before it hits A, which walk-on-spheres estimates directly.
# field.at reads the nearest node, so the walks start from that node too.
for p in (0.4, 0.6j, -0.5 - 0.5j):
    node = complex(z[grid.nearest_index(p)])
    est = mc_exit_probability(node, omega, a, n=20_000, seed=1)
    print(f"z = {node:.3f}  grid {field.at(node):.4f}  walks {est.mean:.4f} +- {est.std_error:.4f}")
