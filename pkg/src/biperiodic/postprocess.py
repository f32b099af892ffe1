"""Rayleigh coefficients, energy bookkeeping and field sampling for solved fields."""

from __future__ import annotations

import dataclasses

import numpy as np

from biperiodic.discretization import DiscreteField, specular_index
from biperiodic.fourier import TraceCoefficients, synthesize_trace
from biperiodic.incident import PlaneWaveSource, reflect

THRESHOLD_TOL = 1e-8


@dataclasses.dataclass(frozen=True)
class RayleighTable:
    """Scattered-field coefficients ``H_n(h)`` with per-mode classification."""

    coefficients: TraceCoefficients
    propagating: np.ndarray
    near_threshold: np.ndarray

    def to_dict(self) -> dict:
        lat = self.coefficients.lattice
        rows = []
        for i, n in enumerate(lat.modes):
            c = self.coefficients.values[i]
            rows.append(
                {
                    "mode": [int(n[0]), int(n[1])],
                    "beta": [float(lat.beta[i].real), float(lat.beta[i].imag)],
                    "propagating": bool(self.propagating[i]),
                    "near_threshold": bool(self.near_threshold[i]),
                    "coefficient": [[float(v.real), float(v.imag)] for v in c],
                }
            )
        return {"alpha": [float(a) for a in lat.alpha], "k": lat.wavenumber, "modes": rows}


def rayleigh_coefficients(H: DiscreteField) -> RayleighTable:
    lat = H.lattice
    beta = lat.beta
    prop = (np.abs(beta.imag) == 0) & (beta.real > 0)
    near = np.abs(beta) < THRESHOLD_TOL
    return RayleighTable(TraceCoefficients(lat, H.top().copy()), prop, near)


@dataclasses.dataclass(frozen=True)
class FluxRow:
    mode: tuple[int, int]
    beta: float
    amplitude: np.ndarray
    flux: float


@dataclasses.dataclass(frozen=True)
class EnergyReport:
    """Vertical energy flux of the total upgoing field, normalised by the incident flux.

    The specular amplitude is ``p~ exp(i beta_0 h) + H_0(h)``: the reflected
    part of the combined incident field plus the scattered coefficient.
    """

    rows: list[FluxRow]
    incident_flux: float

    @property
    def reflected_flux(self) -> float:
        return float(sum(r.flux for r in self.rows))

    @property
    def balance(self) -> float:
        return self.reflected_flux / self.incident_flux

    def to_rows(self) -> list[dict]:
        return [
            {"n1": r.mode[0], "n2": r.mode[1], "beta": r.beta, "flux": r.flux, "relative_flux": r.flux / self.incident_flux}
            for r in self.rows
        ]


def energy_report(H: DiscreteField, source: PlaneWaveSource) -> EnergyReport:
    lat = H.lattice
    specular = specular_index(source, lat)
    h = H.mesh.h
    table = rayleigh_coefficients(H)
    rows = []
    for i in np.flatnonzero(table.propagating):
        amp = H.top()[i].copy()
        if i == specular:
            amp = amp + reflect(source.p) * np.exp(1j * source.beta0 * h)
        b = float(lat.beta[i].real)
        rows.append(FluxRow((int(lat.modes[i, 0]), int(lat.modes[i, 1])), b, amp, b * float(np.sum(np.abs(amp) ** 2))))
    incident = source.beta0 * float(np.sum(source.p**2))
    return EnergyReport(rows, incident)


def propagating_flux(H: DiscreteField) -> float:
    """``sum_n Re(beta_n) |H_n(h)|^2`` over the lattice (scattered field only)."""
    return float(np.sum(H.lattice.beta.real[:, None] * np.abs(H.top()) ** 2))


def _check_box(H: DiscreteField, x):
    x = np.asarray(x, dtype=float)
    lo = np.array([0.0, 0.0, 0.0])
    hi = np.array([2 * np.pi, 2 * np.pi, H.mesh.h])
    if np.any(x < lo - 1e-12) or np.any(x > hi + 1e-12):
        raise ValueError("sample points outside the period cell")
    return x


def evaluate_field(H: DiscreteField, points, *, physical: bool = True) -> np.ndarray:
    """Direct evaluation at ``points`` of shape ``(P, 3)``; returns ``(P, 3)``."""
    x = _check_box(H, points).reshape(-1, 3)
    lat = H.lattice
    vals = H.values(x[:, 2])  # (nm, 3, P)
    kap = lat.kappa if physical else lat.modes
    phase = np.exp(1j * (x[:, :2] @ np.asarray(kap, dtype=float).T))  # (P, nm)
    return np.einsum("pi,icp->pc", phase, vals)


@dataclasses.dataclass(frozen=True)
class GridSpec:
    """``resolution x resolution`` lateral samples at the given heights."""

    resolution: int
    z: np.ndarray

    def __post_init__(self):
        z = np.atleast_1d(np.asarray(self.z, dtype=float))
        if self.resolution < 1:
            raise ValueError("resolution must be positive")
        object.__setattr__(self, "z", z)


def field_export(H: DiscreteField, grid: GridSpec) -> np.ndarray:
    """Physical field on ``grid`` as ``(R, R, nz, 3)`` complex, lateral grid ``x = 2 pi i / R``."""
    if np.any(grid.z < 0) or np.any(grid.z > H.mesh.h + 1e-12):
        raise ValueError("grid heights outside [0, h]")
    R = grid.resolution
    if R < 2 * H.lattice.truncation_order + 1:
        raise ValueError("lateral resolution too coarse for the lattice")
    vals = H.values(grid.z)  # (nm, 3, nz)
    samples = synthesize_trace(TraceCoefficients(H.lattice, vals), R)  # (3, nz, R, R)
    x = 2 * np.pi * np.arange(R) / R
    a = H.lattice.alpha
    phase = np.exp(1j * (a[0] * x[:, None] + a[1] * x[None, :]))
    return np.transpose(samples * phase, (2, 3, 1, 0))
