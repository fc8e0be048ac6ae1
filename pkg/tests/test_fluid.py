import numpy as np
import pytest

from spinkin.fluid import (
    DensityFloorError,
    FluidState,
    fluid_rhs,
    spin_density_rhs,
    step_fluid,
    step_spin_density,
)
from spinkin.grid import SpatialGrid1D
from spinkin.params import PlasmaParams
from spinkin.pauli import ExternalPotentials, init_state, step_pauli

PARAMS = PlasmaParams(hbar=1.0)


class TestFluidRhs:
    def test_equilibrium_is_stationary(self):
        grid = SpatialGrid1D(64, 10.0)
        st = FluidState(grid, np.ones(grid.n), np.zeros(grid.n))
        dn, du = fluid_rhs(st, None, PARAMS)
        assert np.max(np.abs(dn)) == 0.0
        assert np.max(np.abs(du)) < 1e-14

    def test_linearized_bohm_restoring_force(self):
        # n = 1 + eps cos kx, u = 0: du/dt = (hbar^2 k^3 eps / 4 m^2) sin kx + O(eps^2)
        grid = SpatialGrid1D(128, 2 * np.pi)
        k, eps = 3.0, 1e-7
        st = FluidState(grid, 1 + eps * np.cos(k * grid.x), np.zeros(grid.n))
        _, du = fluid_rhs(st, None, PARAMS)
        expected = (PARAMS.hbar**2 * k**3 * eps / (4 * PARAMS.mass**2)) * np.sin(k * grid.x)
        # roundoff floor: third spectral derivative amplifies eps_mach by k_max^3
        assert np.max(np.abs(du - expected)) < 1e-10

    def test_rhs_matches_oracle_time_derivative(self):
        grid = SpatialGrid1D(128, 24.0)
        pot = ExternalPotentials(grid)
        psi = init_state("gaussian", dict(x0=12.0, width=3.0), grid)
        dt = 1e-3
        fwd = step_pauli(psi, pot, PARAMS, dt)
        dn_oracle = (fwd.density() - psi.density()) / dt
        st = FluidState(grid, psi.density(), np.zeros(grid.n))
        dn, _ = fluid_rhs(st, None, PARAMS)
        # u = 0 initially so dn/dt = 0; the oracle derivative is O(dt)
        assert np.max(np.abs(dn - dn_oracle)) < 1e-4


class TestStepFluid:
    def test_equilibrium_persists(self):
        grid = SpatialGrid1D(64, 10.0)
        st = FluidState(grid, np.ones(grid.n), np.zeros(grid.n))
        for _ in range(1000):
            st = step_fluid(st, None, PARAMS, 0.01)
        assert np.max(np.abs(st.n - 1.0)) < 1e-13
        assert np.max(np.abs(st.u)) < 1e-13

    def test_mass_conservation(self):
        grid = SpatialGrid1D(64, 10.0)
        st = FluidState(grid, 1 + 0.3 * np.cos(2 * np.pi * grid.x / grid.length),
                        0.1 * np.sin(2 * np.pi * grid.x / grid.length))
        m0 = st.mass()
        for _ in range(1000):
            st = step_fluid(st, None, PARAMS, 0.002)
        assert abs(st.mass() - m0) / m0 < 1e-12

    def test_linear_quantum_oscillation_frequency(self):
        # free quantum dispersion omega = hbar k^2 / 2m for a standing wave
        grid = SpatialGrid1D(64, 2 * np.pi)
        k, eps = 2.0, 1e-6
        omega = PARAMS.hbar * k**2 / (2 * PARAMS.mass)
        st = FluidState(grid, 1 + eps * np.cos(k * grid.x), np.zeros(grid.n))
        t_end = 2 * np.pi / omega
        steps = 2000
        for _ in range(steps):
            st = step_fluid(st, None, PARAMS, t_end / steps)
        # after one full period the perturbation recurs
        assert np.max(np.abs(st.n - (1 + eps * np.cos(k * grid.x)))) < 1e-3 * eps

    def test_free_gaussian_matches_wavefunction_oracle(self):
        grid = SpatialGrid1D(128, 20.0)
        pot = ExternalPotentials(grid)
        psi = init_state("gaussian", dict(x0=10.0, width=3.5), grid)
        st = FluidState(grid, psi.density(), np.zeros(grid.n))
        dt, steps = 0.002, 250
        for _ in range(steps):
            psi = step_pauli(psi, pot, PARAMS, dt)
            st = step_fluid(st, None, PARAMS, dt)
        assert np.max(np.abs(st.n - psi.density())) < 1e-3

    def test_classical_characteristics_small_hbar(self):
        params = PlasmaParams(hbar=1e-6)
        grid = SpatialGrid1D(256, 2 * np.pi)
        a, k = 0.2, 1.0
        st = FluidState(grid, np.ones(grid.n), a * np.sin(k * grid.x))
        t_end, steps = 1.0, 500
        for _ in range(steps):
            st = step_fluid(st, None, params, t_end / steps)
        # invert x = x0 + t a sin(k x0) by Newton iteration
        x0 = grid.x.copy()
        for _ in range(50):
            x0 -= (x0 + t_end * a * np.sin(k * x0) - grid.x) / (
                1 + t_end * a * k * np.cos(k * x0))
        u_exact = a * np.sin(k * x0)
        n_exact = 1.0 / (1 + t_end * a * k * np.cos(k * x0))
        assert np.max(np.abs(st.u - u_exact)) < 1e-6
        assert np.max(np.abs(st.n - n_exact)) < 1e-6

    def test_density_floor_rejection(self):
        grid = SpatialGrid1D(64, 10.0)
        n = 1e-12 + np.exp(-((grid.x - 5.0) ** 2))
        st = FluidState(grid, n / grid.integrate(n), np.zeros(grid.n))
        with pytest.raises(DensityFloorError) as err:
            step_fluid(st, None, PARAMS, 0.01, n_floor_rel=1e-3)
        assert hasattr(err.value, "x_where")


class TestSpinDensity:
    def test_uniform_precession_rate(self):
        grid = SpatialGrid1D(32, 10.0)
        B0 = 0.7
        B = np.zeros((3, grid.n))
        B[2] = B0
        n = np.ones(grid.n)
        s = np.zeros((3, grid.n))
        s[0] = PARAMS.hbar / 2
        ds = spin_density_rhs(s, n, B, PARAMS, grid)
        # ds/dt = (2 mu_B B0/hbar) z x s
        assert np.max(np.abs(ds[1] - 2 * PARAMS.mu_B * B0 / PARAMS.hbar * s[0])) < 1e-14
        assert np.max(np.abs(ds[0])) < 1e-14
        # exact rotation over a quarter period
        t_q = np.pi / 2 / (2 * PARAMS.mu_B * B0 / PARAMS.hbar)
        out = step_spin_density(s, n, B, PARAMS, grid, t_q)
        assert np.max(np.abs(out[1] - PARAMS.hbar / 2)) < 1e-12
        assert np.max(np.abs(out[0])) < 1e-12

    def test_zero_field_uniform_spin_static(self):
        grid = SpatialGrid1D(32, 10.0)
        s = np.zeros((3, grid.n))
        s[2] = PARAMS.hbar / 2
        ds = spin_density_rhs(s, np.ones(grid.n), np.zeros((3, grid.n)), PARAMS, grid)
        assert np.max(np.abs(ds)) == 0.0

    def test_orthogonality_preserves_magnitude(self):
        rng = np.random.default_rng(2)
        grid = SpatialGrid1D(64, 10.0)
        theta = 0.5 + 0.3 * np.sin(2 * np.pi * grid.x / grid.length)
        phi = 2 * np.pi * grid.x / grid.length
        s = PARAMS.hbar / 2 * np.array([np.sin(theta) * np.cos(phi),
                                        np.sin(theta) * np.sin(phi), np.cos(theta)])
        n = 1 + 0.3 * np.cos(2 * np.pi * grid.x / grid.length)
        B = rng.normal(size=(3, 1)) * np.ones((3, grid.n))
        ds = spin_density_rhs(s, n, B, PARAMS, grid)
        assert np.max(np.abs(np.sum(s * ds, axis=0))) < 1e-14

    def test_magnitude_invariance_long_run(self):
        grid = SpatialGrid1D(64, 10.0)
        theta = 0.5 + 0.3 * np.sin(2 * np.pi * grid.x / grid.length)
        phi = 2 * np.pi * grid.x / grid.length
        s = PARAMS.hbar / 2 * np.array([np.sin(theta) * np.cos(phi),
                                        np.sin(theta) * np.sin(phi), np.cos(theta)])
        n = 1 + 0.3 * np.cos(2 * np.pi * grid.x / grid.length)
        B = np.zeros((3, grid.n))
        B[2] = 0.4
        for _ in range(10_000):
            s = step_spin_density(s, n, B, PARAMS, grid, 0.002)
        mag = np.linalg.norm(s, axis=0)
        assert np.max(np.abs(mag - PARAMS.hbar / 2)) < 1e-10

    def test_magnitude_violation_rejected(self):
        grid = SpatialGrid1D(32, 10.0)
        s = np.zeros((3, grid.n))
        s[2] = 0.3  # not hbar/2
        with pytest.raises(ValueError):
            spin_density_rhs(s, np.ones(grid.n), np.zeros((3, grid.n)), PARAMS, grid)
