"""Madelung quantum-fluid solver (scalar case) and spin-density transport.

The momentum equation carries the Bohm-de Broglie term; spatial derivatives
are spectral on the periodic grid and time stepping is classical RK4.  Spin
density transport advances by exact rotation about the instantaneous
effective field, conserving |s| to rounding.
"""

from dataclasses import dataclass

import numpy as np

from .grid import SpatialGrid1D
from .params import PlasmaParams
from .rotation import rodrigues_rotate

DENSITY_FLOOR_REL = 1e-10


class DensityFloorError(ValueError):
    """Raised when the density drops below the configured floor."""

    def __init__(self, x_where, n_min, floor):
        self.x_where = x_where
        super().__init__(
            f"density {n_min:.3e} below floor {floor:.3e} at x = {x_where:.4f}; "
            "step rejected")


@dataclass
class FluidState:
    """Density and velocity on the periodic grid."""

    grid: SpatialGrid1D
    n: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        self.n = np.asarray(self.n, dtype=float)
        self.u = np.asarray(self.u, dtype=float)
        if self.n.shape != (self.grid.n,) or self.u.shape != (self.grid.n,):
            raise ValueError("n and u must match the grid size")
        if self.n.min() < 0:
            raise ValueError("density must be nonnegative")

    def mass(self) -> float:
        return self.grid.integrate(self.n)


def bohm_force(grid: SpatialGrid1D, n, params: PlasmaParams):
    """(hbar^2 / 2 m^2) d/dx [ (d^2/dx^2 sqrt(n)) / sqrt(n) ]."""
    sqrt_n = np.sqrt(n)
    quantum_potential_over = grid.derivative(sqrt_n, order=2) / sqrt_n
    return (params.hbar**2 / (2 * params.mass**2)) * grid.derivative(quantum_potential_over)


def _check_floor(grid, n, floor_rel):
    floor = floor_rel * n.max()
    if n.min() <= floor:
        i = int(np.argmin(n))
        raise DensityFloorError(grid.x[i], n.min(), floor)


def fluid_rhs(state: FluidState, phi, params: PlasmaParams,
              n_floor_rel=DENSITY_FLOOR_REL):
    """Time derivatives (dn/dt, du/dt) of the quantum fluid equations.

    dn/dt = -d(nu)/dx
    du/dt = -u du/dx + (e/m) dphi/dx + Bohm force
    """
    grid = state.grid
    _check_floor(grid, state.n, n_floor_rel)
    phi = np.zeros(grid.n) if phi is None else np.asarray(phi, dtype=float)
    dn = -grid.derivative(state.n * state.u)
    du = (-state.u * grid.derivative(state.u)
          + (params.charge / params.mass) * grid.derivative(phi)
          + bohm_force(grid, state.n, params))
    return dn, du


def step_fluid(state: FluidState, phi, params: PlasmaParams, dt,
               n_floor_rel=DENSITY_FLOOR_REL) -> FluidState:
    """One RK4 step.  `phi` may be an array or a callable n -> phi for
    self-consistent (Poisson-coupled) runs; it is re-evaluated per stage."""
    phi_of = phi if callable(phi) else (lambda n: phi)

    def rhs(n, u):
        st = FluidState(state.grid, n, u)
        return fluid_rhs(st, phi_of(n), params, n_floor_rel)

    n0, u0 = state.n, state.u
    k1n, k1u = rhs(n0, u0)
    k2n, k2u = rhs(n0 + dt / 2 * k1n, u0 + dt / 2 * k1u)
    k3n, k3u = rhs(n0 + dt / 2 * k2n, u0 + dt / 2 * k2u)
    k4n, k4u = rhs(n0 + dt * k3n, u0 + dt * k3u)
    n1 = n0 + dt / 6 * (k1n + 2 * k2n + 2 * k3n + k4n)
    u1 = u0 + dt / 6 * (k1u + 2 * k2u + 2 * k3u + k4u)
    return FluidState(state.grid, n1, u1)


def effective_spin_field(grid: SpatialGrid1D, s_field, n, B, params: PlasmaParams):
    """Omega_eff = (2 mu_B / hbar) B - (1 / m n) d/dx (n d/dx s)."""
    exchange = grid.derivative(n[None, :] * grid.derivative(s_field))
    return (2 * params.mu_B / params.hbar) * B - exchange / (params.mass * n[None, :])


def spin_density_rhs(s_field, n, B, params: PlasmaParams, grid: SpatialGrid1D):
    """ds/dt = Omega_eff x s for the single-wavefunction spin density.

    Requires |s| = hbar/2 at every point (the pure-state normalization).
    """
    s_field = np.asarray(s_field, dtype=float)
    mag = np.linalg.norm(s_field, axis=0)
    if np.max(np.abs(mag / (params.hbar / 2) - 1)) > 1e-10:
        raise ValueError("spin density magnitude must equal hbar/2 everywhere")
    omega = effective_spin_field(grid, s_field, n, B, params)
    return np.cross(omega.T, s_field.T).T


def step_spin_density(s_field, n, B, params: PlasmaParams, grid: SpatialGrid1D, dt):
    """Advance s by exact rotation about the midpoint effective field."""
    omega1 = effective_spin_field(grid, s_field, n, B, params)
    half = _rotate_about(s_field, omega1, dt / 2)
    omega2 = effective_spin_field(grid, half, n, B, params)
    return _rotate_about(s_field, omega2, dt)


def _rotate_about(s_field, omega, dt):
    axis = omega.T
    angle = np.linalg.norm(axis, axis=-1) * dt
    return rodrigues_rotate(s_field.T, axis, angle).T
