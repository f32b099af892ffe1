"""Incident plane wave, its reflection at the conducting plate, and the
phase-shifted combined field used in the right-hand side."""

from __future__ import annotations

import dataclasses

import numpy as np

_RTOL = 1e-12


def reflect(a) -> np.ndarray:
    """``(a1, a2, -a3)``."""
    a = np.array(a, dtype=float)
    a[..., 2] *= -1
    return a


@dataclasses.dataclass(frozen=True)
class PlaneWaveSource:
    """Incident plane wave ``H^i = p exp(i d.x)``, ``E^i = q exp(i d.x)``."""

    d: np.ndarray
    p: np.ndarray
    omega: float
    eps0: float = 1.0
    mu0: float = 1.0

    @property
    def k(self) -> float:
        return float(self.omega * np.sqrt(self.eps0 * self.mu0))

    @property
    def q(self) -> np.ndarray:
        return np.cross(self.p, self.d) / (self.omega * self.eps0)

    @property
    def alpha(self) -> np.ndarray:
        return self.d[:2].copy()

    @property
    def beta0(self) -> float:
        """Vertical wavenumber of the specular order, ``-d3``."""
        return float(-self.d[2])


def make_source(d, p, omega: float, eps0: float = 1.0, mu0: float = 1.0) -> PlaneWaveSource:
    """Validates and builds a plane-wave source.

    Raises:
        ValueError: for an upward (or grazing) wave vector, a violated
            dispersion relation ``d.d = omega^2 eps0 mu0``, or ``p.d != 0``.
    """
    d = np.asarray(d, dtype=float).reshape(3)
    p = np.asarray(p, dtype=float).reshape(3)
    if min(omega, eps0, mu0) <= 0:
        raise ValueError("omega, eps0 and mu0 must be positive")
    if not d[2] < 0:
        raise ValueError("wave vector must point downwards (d3 < 0)")
    k2 = omega**2 * eps0 * mu0
    if abs(d @ d - k2) > _RTOL * k2:
        raise ValueError(f"dispersion relation violated: d.d = {d @ d!r}, expected {k2!r}")
    scale = np.sqrt(k2) * max(np.linalg.norm(p), 1.0)
    if abs(p @ d) > _RTOL * scale:
        raise ValueError(f"polarization not orthogonal to wave vector: p.d = {p @ d!r}")
    d.setflags(write=False)
    p.setflags(write=False)
    return PlaneWaveSource(d, p, float(omega), float(eps0), float(mu0))


def source_from_angles(k: float, theta: float, phi: float, psi: float) -> PlaneWaveSource:
    """Source with ``|d| = k`` from polar angle ``theta`` (from ``-e3``), azimuth
    ``phi`` and polarisation angle ``psi`` within the plane orthogonal to ``d``."""
    d = k * np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), -np.cos(theta)])
    u = np.array([-np.sin(phi), np.cos(phi), 0.0])
    v = np.cross(d / k, u)
    p = np.cos(psi) * u + np.sin(psi) * v
    p -= (p @ d) / (k * k) * d
    return make_source(d, p, k)


@dataclasses.dataclass(frozen=True)
class CombinedIncidentField:
    """``H^ir = H^i + H^r`` with ``H^r = p~ exp(i d~.x)``."""

    source: PlaneWaveSource

    @property
    def tilde_d(self) -> np.ndarray:
        return reflect(self.source.d)

    @property
    def tilde_p(self) -> np.ndarray:
        return reflect(self.source.p)

    @property
    def tilde_q(self) -> np.ndarray:
        return reflect(self.source.q)

    def _phases(self, x):
        x = np.asarray(x, dtype=float)
        alpha3 = np.array([*self.source.alpha, 0.0])
        ph_i = np.exp(1j * (x @ (self.source.d - alpha3)))
        ph_r = np.exp(1j * (x @ (self.tilde_d - alpha3)))
        return ph_i[..., None], ph_r[..., None]

    def H(self, x) -> np.ndarray:
        """Physical ``H^ir(x)``; ``x`` has shape ``(..., 3)``."""
        x = np.asarray(x, dtype=float)
        return (
            self.source.p * np.exp(1j * (x @ self.source.d))[..., None]
            + self.tilde_p * np.exp(1j * (x @ self.tilde_d))[..., None]
        )

    def E(self, x) -> np.ndarray:
        """Physical ``E^ir(x) = q exp(i d.x) - q~ exp(i d~.x)``."""
        x = np.asarray(x, dtype=float)
        return (
            self.source.q * np.exp(1j * (x @ self.source.d))[..., None]
            - self.tilde_q * np.exp(1j * (x @ self.tilde_d))[..., None]
        )

    def H_alpha(self, x) -> np.ndarray:
        ph_i, ph_r = self._phases(x)
        return self.source.p * ph_i + self.tilde_p * ph_r

    def curl_alpha_H(self, x) -> np.ndarray:
        """``curl_alpha H^ir_alpha = exp(-i alpha.x) curl H^ir``."""
        ph_i, ph_r = self._phases(x)
        ci = 1j * np.cross(self.source.d, self.source.p)
        cr = 1j * np.cross(self.tilde_d, self.tilde_p)
        return ci * ph_i + cr * ph_r

    def curl_alpha_H_profile(self, z) -> np.ndarray:
        """``curl_alpha H^ir_alpha`` as a function of ``x3`` alone (it is laterally
        constant); shape ``(len(z), 3)``."""
        z = np.asarray(z, dtype=float)
        x = np.zeros(z.shape + (3,))
        x[..., 2] = z
        return self.curl_alpha_H(x)

    def H_alpha_profile(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        x = np.zeros(z.shape + (3,))
        x[..., 2] = z
        return self.H_alpha(x)


def eval_Hir_alpha(field: CombinedIncidentField, x) -> np.ndarray:
    return field.H_alpha(x)


def eval_curl_alpha_Hir(field: CombinedIncidentField, x) -> np.ndarray:
    return field.curl_alpha_H(x)
