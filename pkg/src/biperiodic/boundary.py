"""Mode-wise boundary operators on the artificial boundary ``x3 = h``.

All operators act on Fourier coefficients; the Dirichlet-to-Neumann map is
exact per mode.
"""

from __future__ import annotations

import numpy as np

from biperiodic.fourier import TraceCoefficients


class RayleighWoodError(ValueError):
    """Raised when an operator needs every ``beta_n`` to be non-zero."""


def apply_T_alpha(coeffs: TraceCoefficients) -> TraceCoefficients:
    """Exterior DtN operator: multiplies mode ``n`` by ``i beta_n``."""
    values = np.asarray(coeffs.values)
    beta = coeffs.lattice.beta.reshape((-1,) + (1,) * (values.ndim - 1))
    return TraceCoefficients(coeffs.lattice, 1j * beta * values)


def apply_R_alpha_cross(coeffs: TraceCoefficients) -> TraceCoefficients:
    """``R_alpha x F``; mode ``n`` maps to ``i r_n x F_n``."""
    r = coeffs.lattice.dtn_symbol
    return TraceCoefficients(coeffs.lattice, 1j * np.cross(r, coeffs.values))


def apply_R_alpha_dot(coeffs: TraceCoefficients) -> TraceCoefficients:
    """``R_alpha . F``; mode ``n`` maps to ``i r_n . F_n`` (no conjugation)."""
    r = coeffs.lattice.dtn_symbol
    return TraceCoefficients(coeffs.lattice, 1j * np.sum(r * coeffs.values, axis=1))


def apply_Q(coeffs: TraceCoefficients, *, threshold: float = 0.0) -> TraceCoefficients:
    """The H(curl) trace operator ``Q``.

    Mode ``n`` maps to ``-(1/(i beta_n)) (k^2 F_T - [(n+alpha).F] (n+alpha))``.

    Raises:
        RayleighWoodError: if some ``|beta_n| <= threshold``.
    """
    lat = coeffs.lattice
    if np.any(np.abs(lat.beta) <= threshold):
        bad = lat.modes[np.abs(lat.beta) <= threshold]
        raise RayleighWoodError(f"beta_n = 0 at modes {bad.tolist()}")
    F = np.asarray(coeffs.values, dtype=complex)
    kap = lat.kappa3
    FT = F.copy()
    FT[:, 2] = 0
    proj = np.sum(kap * F, axis=1)[:, None] * kap
    out = -(lat.wavenumber**2 * FT - proj) / (1j * lat.beta[:, None])
    return TraceCoefficients(lat, out)


def boundary_pairing(a: TraceCoefficients, b: TraceCoefficients) -> complex:
    """``<a, b>`` on ``Gamma_h``: ``4 pi^2 sum_n a_n . conj(b_n)``."""
    return complex(4 * np.pi**2 * np.sum(np.asarray(a.values) * np.conj(b.values)))


def e3_cross(values: np.ndarray) -> np.ndarray:
    """``e3 x v`` for an array of 3-vectors in the last axis."""
    out = np.zeros_like(values)
    out[..., 0] = -values[..., 1]
    out[..., 1] = values[..., 0]
    return out


def sobolev_norm(coeffs: TraceCoefficients, s: float) -> float:
    """Periodic ``H^s`` norm ``(sum (1 + |n|^2)^s |f_n|^2)^(1/2)``."""
    n2 = np.sum(coeffs.lattice.modes.astype(float) ** 2, axis=1)
    vals = np.abs(np.asarray(coeffs.values)) ** 2
    if vals.ndim > 1:
        vals = vals.reshape(vals.shape[0], -1).sum(axis=1)
    return float(np.sqrt(np.sum((1 + n2) ** s * vals)))


def T_alpha_bound(lattice) -> float:
    """Constant ``C`` with ``||T f||_{-1/2} <= C ||f||_{1/2}`` on the lattice."""
    n2 = np.sum(lattice.modes.astype(float) ** 2, axis=1)
    return float(np.max(np.abs(lattice.beta) / np.sqrt(1 + n2)))
