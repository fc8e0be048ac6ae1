"""Quadrature and differential operators on the unit (Bloch) sphere.

Product grid: Gauss-Legendre nodes in mu = cos(theta) crossed with uniform
azimuthal nodes.  Gives spectral accuracy for the low-degree harmonics that
physical spin distributions occupy, and avoids placing nodes at the poles
where the tangential gradient is singular.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

try:
    from scipy.special import sph_harm_y
except ImportError:  # scipy < 1.15
    from scipy.special import sph_harm

    def sph_harm_y(l, m, theta, phi):
        return sph_harm(m, l, phi, theta)


def barycentric_diff_matrix(nodes):
    """First-derivative collocation matrix for arbitrary distinct nodes."""
    x = np.asarray(nodes, dtype=float)
    n = x.size
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    # barycentric weights
    w = 1.0 / np.prod(diff, axis=1)
    d = (w[None, :] / w[:, None]) / diff
    np.fill_diagonal(d, 0.0)
    np.fill_diagonal(d, -np.sum(d, axis=1))
    return d


@dataclass(frozen=True)
class SphereQuadrature:
    """Gauss-Legendre x uniform-phi grid with exact low-degree quadrature."""

    n_theta: int = 16
    n_phi: int = 32

    def __post_init__(self):
        if self.n_theta < 2 or self.n_phi < 4:
            raise ValueError("need n_theta >= 2 and n_phi >= 4")

    @cached_property
    def _gl(self):
        return np.polynomial.legendre.leggauss(self.n_theta)

    @property
    def mu(self) -> np.ndarray:
        """cos(theta) nodes, ascending."""
        return self._gl[0]

    @property
    def w_mu(self) -> np.ndarray:
        return self._gl[1]

    @property
    def theta(self) -> np.ndarray:
        return np.arccos(self.mu)

    @property
    def phi(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_phi) / self.n_phi

    @cached_property
    def weights(self) -> np.ndarray:
        """(n_theta, n_phi) solid-angle weights, summing to 4*pi."""
        return np.outer(self.w_mu, np.full(self.n_phi, 2.0 * np.pi / self.n_phi))

    @cached_property
    def s_hat(self) -> np.ndarray:
        """(n_theta, n_phi, 3) unit vectors."""
        sin_t = np.sqrt(1.0 - self.mu**2)
        cos_p, sin_p = np.cos(self.phi), np.sin(self.phi)
        s = np.empty((self.n_theta, self.n_phi, 3))
        s[..., 0] = sin_t[:, None] * cos_p[None, :]
        s[..., 1] = sin_t[:, None] * sin_p[None, :]
        s[..., 2] = self.mu[:, None] * np.ones(self.n_phi)[None, :]
        return s

    @cached_property
    def _dmu(self) -> np.ndarray:
        return barycentric_diff_matrix(self.mu)

    def integrate(self, f):
        """Solid-angle integral of f sampled on the (n_theta, n_phi) grid."""
        f = np.asarray(f)
        return np.einsum("tp,...tp->...", self.weights, f)

    def dmu(self, f):
        """d/dmu along the theta axis (axis -2)."""
        return np.einsum("ts,...sp->...tp", self._dmu, np.asarray(f))

    def dphi(self, f):
        """Spectral d/dphi along the last axis."""
        f = np.asarray(f)
        fk = np.fft.fft(f, axis=-1)
        m = 1j * np.fft.fftfreq(self.n_phi, d=1.0 / self.n_phi)
        m = m.copy()
        m[self.n_phi // 2] = 0.0
        out = np.fft.ifft(fk * m, axis=-1)
        return out.real if np.isrealobj(f) else out

    def tangential_gradient(self, f):
        """Cartesian components of the tangential sphere gradient.

        grad_s f = theta_hat df/dtheta + phi_hat (1/sin theta) df/dphi,
        returned as an array of shape f.shape + (3,).  Evaluated via
        d/dtheta = -sin(theta) d/dmu, which keeps everything finite at the
        Gauss-Legendre nodes (none of which sit on the poles).
        """
        f = np.asarray(f)
        sin_t = np.sqrt(1.0 - self.mu**2)[:, None]
        cos_t = self.mu[:, None]
        cos_p = np.cos(self.phi)[None, :]
        sin_p = np.sin(self.phi)[None, :]
        df_dtheta = -sin_t * self.dmu(f)
        df_dphi_over_sin = self.dphi(f) / sin_t
        theta_hat = np.stack([cos_t * cos_p, cos_t * sin_p, -sin_t * np.ones_like(cos_p)], axis=-1)
        phi_hat = np.stack([-sin_p * np.ones_like(cos_t), cos_p * np.ones_like(cos_t), np.zeros((self.n_theta, self.n_phi))], axis=-1)
        return df_dtheta[..., None] * theta_hat + df_dphi_over_sin[..., None] * phi_hat

    def harmonic_matrix(self, lmax=None):
        """(n_nodes, n_coeff) matrix of Y_lm values at the grid nodes."""
        if lmax is None:
            lmax = self.n_theta - 1
        theta = np.repeat(self.theta, self.n_phi)
        phi = np.tile(self.phi, self.n_theta)
        cols = []
        for l in range(lmax + 1):
            for m in range(-l, l + 1):
                cols.append(sph_harm_y(l, m, theta, phi))
        return np.array(cols).T

    def rotation_interp_matrix(self, axis, angle, lmax=None):
        """Matrix resampling a band-limited f at nodes rotated by R^-1.

        Applying the matrix to flattened f realizes f(R^-1 s), i.e. the
        rigid rotation of the pattern by R about `axis`.  Exact for f of
        degree <= lmax (quadrature is exact to degree 2*n_theta - 1).
        """
        from .rotation import rodrigues_rotate

        if lmax is None:
            lmax = self.n_theta - 1
        nodes = self.s_hat.reshape(-1, 3)
        back = rodrigues_rotate(nodes, axis, -angle)
        theta = np.arccos(np.clip(back[:, 2], -1.0, 1.0))
        phi = np.arctan2(back[:, 1], back[:, 0])
        cols = []
        for l in range(lmax + 1):
            for m in range(-l, l + 1):
                cols.append(sph_harm_y(l, m, theta, phi))
        y_rot = np.array(cols).T
        y = self.harmonic_matrix(lmax)
        analysis = y.conj().T * self.weights.reshape(1, -1)
        return (y_rot @ analysis).real
