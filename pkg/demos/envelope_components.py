"""The envelope of a cross and how many pieces it has.

The envelope is the set of (z, w) with omega_A(z) + omega_B(w) < 1.  With
both factors the annulus example above it should be one connected piece in
C^2 that contains the whole cross.  We also plant a disconnected example to
show the component counter is not just returning 1.

    python demos/envelope_components.py
"""

import numpy as np

from crosslab.cross import (Cross, connected_components, cross_mask, envelope_mask,
                            envelope_volume_fraction)
from crosslab.extremal import ScalarField, solve_relative_extremal
from crosslab.geometry import Disc, Grid, Mask, rasterize

D = Disc(0, 1.0)
A = Disc(0, 0.25, closed=True)
grid = Grid.square(1.05, 64)

f = solve_relative_extremal(rasterize(D, grid), rasterize(A, grid), omega_spec=D, a_spec=A)
env = envelope_mask(f, f)
dom = rasterize(D, grid)

print(f"envelope occupies {envelope_volume_fraction(env, dom, dom):.3f} of D x G")
print(f"components: {connected_components(env).count}")
print(f"cross inside envelope: {cross_mask(Cross(D, A, D, A), grid, grid).issubset(env)}")

# Two vertical strips where the field is 0, separated by a band where it is
# 0.9.  Against a constant 0.5 factor only the strips survive.
g = Grid.square(1, 16)
full = Mask(g, np.ones(g.shape, bool))
values = np.full(g.shape, 0.9)
values[:, :4] = values[:, -4:] = 0.0
split = envelope_mask(ScalarField(g, full, values), ScalarField(g, full, np.full(g.shape, 0.5)))
print(f"planted example components: {connected_components(split).count}")
