"""Independent reference solutions for laterally invariant profiles.

For ``inv_eps = a(x3)`` a plane wave excites a single transverse frequency
``kappa``.  After rotating ``kappa`` onto ``e1`` the second-order system
splits into two scalar two-point problems on ``(0, h)``:

* ``u = H_2``:  ``-(a u')' + (kappa^2 a - k^2) u = 0``, ``u'(0) = 0``;
* ``psi = a (H_1' - i kappa H_3)``:  ``-psi'' + (kappa^2 - k^2/a) psi = 0``,
  ``psi(0) = 0``, with ``H_1 = -psi'/k^2`` and ``H_3 = i kappa psi / k^2``.

Both close with the outgoing condition at ``x3 = h``, where the incoming
part is known: ``w' - i beta w = -2 i beta w_inc exp(-i beta h)``.

The numerical oracle uses a vertex-centred finite-volume scheme on a fine
grid with Richardson extrapolation; the piecewise-constant cross-check uses
closed-form layer transfer matrices.
"""

from __future__ import annotations

import dataclasses
from collections.abc import Callable

import numpy as np

from biperiodic.discretization import merge_close
from biperiodic.incident import PlaneWaveSource, reflect


@dataclasses.dataclass(frozen=True)
class LayeredProfile:
    """``inv_eps`` as a function of ``x3`` on ``(0, h)``, equal to 1 on the top ``collar``."""

    inv_eps_of_z: Callable[[np.ndarray], np.ndarray]
    h: float
    collar: float
    breakpoints: tuple = ()

    def __post_init__(self):
        if not (0 < self.collar <= self.h):
            raise ValueError("collar must be in (0, h]")
        z = np.linspace(self.h - self.collar, self.h, 17)
        if not np.allclose(self.inv_eps_of_z(z), 1.0, rtol=0, atol=1e-12):
            raise ValueError("profile must equal 1 on the collar")


def layered_from_material(m) -> LayeredProfile:
    """Restricts a laterally invariant :class:`MaterialProfile` to its ``x3`` dependence."""
    if not m.is_layered:
        raise ValueError("profile is not laterally invariant")
    return LayeredProfile(
        lambda z: np.real(m.inv_eps(0.0, 0.0, np.asarray(z, dtype=float))),
        m.h,
        m.collar,
        tuple(b for b in m.breakpoints if 0 < b < m.h),
    )


@dataclasses.dataclass(frozen=True)
class OracleResult:
    """Reference data for the single excited mode.

    Attributes:
        kappa: transverse wave vector ``(d1, d2)``.
        beta: vertical wavenumber ``-d3``.
        scattered: scattered field ``H^s`` at ``x3 = h`` (phase-shifted frame).
        total_top: total field at ``x3 = h``.
        upgoing: total upgoing amplitude ``p~ exp(i beta h) + H^s(h)``.
        incident_flux: ``beta |p|^2``.
        reflected_flux: ``beta |upgoing|^2``.
        plate_tangential: total tangential ``H`` at ``x3 = 0``.
    """

    kappa: np.ndarray
    beta: float
    scattered: np.ndarray
    total_top: np.ndarray
    upgoing: np.ndarray
    incident_flux: float
    reflected_flux: float
    plate_tangential: np.ndarray

    @property
    def balance(self) -> float:
        return self.reflected_flux / self.incident_flux

    def flux_table(self) -> list[dict]:
        return [
            {
                "mode": [0, 0],
                "beta": self.beta,
                "incident_flux": self.incident_flux,
                "reflected_flux": self.reflected_flux,
            }
        ]


def _rotation(kappa):
    """Orthonormal in-plane frame ``(e_par, e_perp)`` with ``e_par || kappa``."""
    kn = float(np.hypot(*kappa))
    if kn == 0:
        return np.array([1.0, 0.0]), np.array([0.0, 1.0]), 0.0
    e1 = np.asarray(kappa, dtype=float) / kn
    return e1, np.array([-e1[1], e1[0]]), kn


def _to_local(v, e_par, e_perp):
    return np.array([v[:2] @ e_par, v[:2] @ e_perp, v[2]])


def _to_global(v, e_par, e_perp):
    out = np.empty(3, dtype=complex)
    out[:2] = v[0] * e_par + v[1] * e_perp
    out[2] = v[2]
    return out


def _incoming_data(source: PlaneWaveSource, e_par, e_perp, kn):
    """Incoming amplitudes of ``u`` and ``psi`` in the rotated frame."""
    p = _to_local(source.p, e_par, e_perp)
    beta = source.beta0
    u_in = p[1]
    # psi = H1' - i kappa H3 for p exp(-i beta z)
    psi_in = -1j * beta * p[0] - 1j * kn * p[2]
    return u_in, psi_in, beta


def _grid(profile: LayeredProfile, n: int) -> np.ndarray:
    """Piecewise-uniform grid with about ``n`` intervals and nodes at all breakpoints."""
    pts = merge_close([0.0, profile.h, profile.h - profile.collar, *profile.breakpoints], profile.h)
    lengths = np.diff(pts)
    counts = np.maximum(np.round(n * lengths / profile.h).astype(int), 2)
    z = [0.0]
    for a, b, c in zip(pts[:-1], pts[1:], counts):
        z.extend(np.linspace(a, b, c + 1)[1:])
    return np.array(z)


def _fv_solve(z, coef_flux, coef_mass, mass_const, dirichlet0, beta, g):
    """Solves ``-(c w')' + s w = 0`` with the vertex-centred finite-volume scheme.

    ``coef_flux`` holds ``c`` at cell midpoints; the zero-order term integrated
    over the control volume of node ``j`` is ``mass_j w_j`` with
    ``mass_j = sum_halfcells (coef_mass * dz/2) + mass_const * V_j``.  The top
    condition is ``w' - i beta w = g`` with ``c(h) = 1``.

    The three-point equations are solved by marching the pair (nodal value,
    cell flux) up from the plate and scaling to the top condition.  This is
    algebraically the same discrete solution as the tridiagonal system but
    avoids losing the zero-order term against the ``O(1/dz)`` diagonal.
    """
    dz = np.diff(z)
    half = 0.5 * dz
    mass = np.zeros(z.size, dtype=complex)
    mass[:-1] += (coef_mass + mass_const) * half
    mass[1:] += (coef_mass + mass_const) * half
    w = np.empty(z.size, dtype=complex)
    if dirichlet0:
        w[0], flux = 0.0, 1.0 + 0j
    else:
        w[0], flux = 1.0, mass[0]
    for j in range(dz.size):
        w[j + 1] = w[j] + dz[j] * flux / coef_flux[j]
        flux = flux + mass[j + 1] * w[j + 1]
    # flux now approximates c w' at x3 = h for the homogeneous solution
    return w * (g / (flux - 1j * beta * w[-1]))


def _fv_top(profile, k, kn, beta, u_in, psi_in, n):
    z = _grid(profile, n)
    mid = 0.5 * (z[:-1] + z[1:])
    a = np.asarray(profile.inv_eps_of_z(mid), dtype=float)
    phase = np.exp(-1j * beta * profile.h)
    g_u = -2j * beta * u_in * phase
    g_psi = -2j * beta * psi_in * phase
    u = _fv_solve(z, a, kn**2 * a, -(k**2), False, beta, g_u)
    psi = _fv_solve(z, np.ones_like(a), -(k**2) / a, kn**2, True, beta, g_psi)
    return u[-1], psi[-1], u[0], psi


def _assemble_top(k, kn, beta, u_h, psi_h, g_psi):
    dpsi_h = g_psi + 1j * beta * psi_h
    return np.array([-dpsi_h / k**2, u_h, 1j * kn * psi_h / k**2])


def _result(source, profile, e_par, e_perp, kn, total_local, plate_local) -> OracleResult:
    beta = source.beta0
    h = profile.h
    total = _to_global(total_local, e_par, e_perp)
    p_tilde = reflect(source.p)
    hir = source.p * np.exp(-1j * beta * h) + p_tilde * np.exp(1j * beta * h)
    scattered = total - hir
    upgoing = p_tilde * np.exp(1j * beta * h) + scattered
    plate = _to_global(plate_local, e_par, e_perp)
    plate[2] = 0
    return OracleResult(
        kappa=np.array([*source.alpha]),
        beta=beta,
        scattered=scattered,
        total_top=total,
        upgoing=upgoing,
        incident_flux=float(beta * np.sum(np.abs(source.p) ** 2)),
        reflected_flux=float(beta * np.sum(np.abs(upgoing) ** 2)),
        plate_tangential=plate[:2],
    )


def layered_solve(
    profile: LayeredProfile,
    source: PlaneWaveSource,
    resolution: int = 40_000,
    *,
    extrapolate: bool = True,
) -> OracleResult:
    """Finite-volume reference solution.

    Args:
        profile: laterally invariant profile.
        source: plane wave; its transverse wave vector fixes the excited mode.
        resolution: approximate number of grid intervals (at least ``10**4``).
        extrapolate: combine ``resolution`` and ``2*resolution`` by Richardson
            extrapolation (second-order scheme).
    """
    if resolution < 10_000:
        raise ValueError("oracle resolution must be at least 1e4 intervals")
    k = source.k
    e_par, e_perp, kn = _rotation(source.alpha)
    u_in, psi_in, beta = _incoming_data(source, e_par, e_perp, kn)
    g_psi = -2j * beta * psi_in * np.exp(-1j * beta * profile.h)

    def run(n):
        u_h, psi_h, u0, psi = _fv_top(profile, k, kn, beta, u_in, psi_in, n)
        top = _assemble_top(k, kn, beta, u_h, psi_h, g_psi)
        z = _grid(profile, n)
        # H1(0) = -psi'(0)/k^2 by a one-sided second-order difference
        d0 = (-3 * psi[0] + 4 * psi[1] - psi[2]) / (2 * (z[1] - z[0]))
        plate = np.array([-d0 / k**2, u0, 0.0])
        return top, plate

    top, plate = run(resolution)
    if extrapolate:
        top2, plate2 = run(2 * resolution)
        top = (4 * top2 - top) / 3
        plate = (4 * plate2 - plate) / 3
    return _result(source, profile, e_par, e_perp, kn, top, plate)


def _layer_matrix(gamma, t, weight):
    """Propagator of ``(w, weight * w')`` across a homogeneous layer of thickness ``t``."""
    g = complex(gamma)
    c = np.cos(g * t)
    s_over = t * np.sinc(g * t / np.pi)  # sin(g t)/g, finite at g = 0
    return np.array([[c, s_over / weight], [-weight * g * g * s_over, c]])


def transfer_matrix_solve(
    thicknesses,
    inv_eps_values,
    source: PlaneWaveSource,
    h: float,
) -> OracleResult:
    """Closed-form solution for piecewise-constant ``inv_eps`` stacked from the plate.

    Args:
        thicknesses: layer thicknesses from ``x3 = 0`` upwards; they are padded
            with vacuum up to ``h``.
        inv_eps_values: ``inv_eps`` per layer.
        source: incident plane wave.
        h: height of the artificial boundary.
    """
    thick = list(map(float, thicknesses))
    vals = list(map(float, inv_eps_values))
    if len(thick) != len(vals):
        raise ValueError("one value per layer required")
    rest = h - sum(thick)
    if rest <= 0:
        raise ValueError("layers must leave a vacuum collar below h")
    thick.append(rest)
    vals.append(1.0)
    k = source.k
    e_par, e_perp, kn = _rotation(source.alpha)
    u_in, psi_in, beta = _incoming_data(source, e_par, e_perp, kn)
    phase = np.exp(-1j * beta * h)
    te = np.array([1.0, 0.0], dtype=complex)  # (u, a u') at the plate
    tm = np.array([0.0, 1.0], dtype=complex)  # (psi, psi')
    for t, a in zip(thick, vals):
        gamma = np.sqrt(complex(k * k / a - kn * kn))
        te = _layer_matrix(gamma, t, a) @ te
        tm = _layer_matrix(gamma, t, 1.0) @ tm
    # top layer is vacuum, so a u' = u'
    cu = -2j * beta * u_in * phase / (te[1] - 1j * beta * te[0])
    cp = -2j * beta * psi_in * phase / (tm[1] - 1j * beta * tm[0])
    u_h, psi_h, dpsi_h = cu * te[0], cp * tm[0], cp * tm[1]
    top = np.array([-dpsi_h / k**2, u_h, 1j * kn * psi_h / k**2])
    plate = np.array([-cp / k**2, cu, 0.0])
    layered = LayeredProfile(lambda z: np.ones_like(np.asarray(z, dtype=float)), h, rest)
    return _result(source, layered, e_par, e_perp, kn, top, plate)
