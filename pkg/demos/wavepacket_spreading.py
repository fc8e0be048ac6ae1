"""Madelung fluid versus the wavefunction for a spreading Gaussian.

The quantum fluid equations (continuity plus a momentum equation carrying
the Bohm-de Broglie force) are an exact rewriting of the scalar
Schroedinger equation, so a free Gaussian evolved by both solvers must
produce the same density.  The demo integrates the two side by side and
prints the L-inf density gap and the width growth over time.
"""

import numpy as np

from spinkin.fluid import FluidState, step_fluid
from spinkin.grid import SpatialGrid1D
from spinkin.params import PlasmaParams
from spinkin.pauli import ExternalPotentials, init_state, step_pauli

params = PlasmaParams()
grid = SpatialGrid1D(128, 20.0)
pot = ExternalPotentials(grid)

width = 3.5
psi = init_state("gaussian", dict(x0=10.0, width=width), grid)
fluid = FluidState(grid, psi.density(), np.zeros(grid.n))

dt, steps, report_every = 0.002, 500, 100
print(f"{'t':>6} {'sigma_x fluid':>14} {'sigma_x exact':>14} {'Linf gap':>10}")
for i in range(1, steps + 1):
    psi = step_pauli(psi, pot, params, dt)
    fluid = step_fluid(fluid, None, params, dt)
    if i % report_every == 0:
        t = i * dt
        var = grid.integrate(fluid.n * (grid.x - 10.0) ** 2)
        # free Gaussian: sigma^2(t) = sigma^2 + (hbar t / 2 m sigma)^2
        sigma = width / np.sqrt(2)
        exact = np.sqrt(sigma**2 + (params.hbar * t
                                    / (2 * params.mass * sigma)) ** 2)
        gap = np.max(np.abs(fluid.n - psi.density()))
        print(f"{t:>6.2f} {np.sqrt(var):>14.6f} {exact:>14.6f} {gap:>10.2e}")
