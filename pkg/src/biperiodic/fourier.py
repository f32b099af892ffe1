"""Mode lattice, vertical wavenumbers and trace analysis on the period cell.

The period cell is fixed to ``(0, 2*pi)**2``.  Fourier coefficients use the
normalisation ``f_n = 1/(4 pi^2) * integral f(x) exp(-i n.x) dx``, so that
``f(x) = sum_n f_n exp(i n.x)``.  Inner products over the cell therefore carry
an explicit ``4 pi^2`` factor wherever they appear in the package.
"""

from __future__ import annotations

import dataclasses
from typing import Literal

import numpy as np

CELL_AREA = 4.0 * np.pi**2


class AliasingError(ValueError):
    """Raised when grid data is not resolved by the requested lattice."""


def vertical_wavenumber(k: float, kappa_sq: np.ndarray) -> np.ndarray:
    """Two-branch vertical wavenumber ``beta`` for ``|n + alpha|^2 = kappa_sq``.

    Returns ``sqrt(k^2 - kappa_sq)`` where that is real (including the
    threshold value 0) and ``i sqrt(kappa_sq - k^2)`` otherwise.
    """
    kappa_sq = np.asarray(kappa_sq, dtype=float)
    diff = k * k - kappa_sq
    return np.where(
        diff >= 0,
        np.sqrt(np.abs(diff)) + 0j,
        1j * np.sqrt(np.abs(diff)),
    )


@dataclasses.dataclass(frozen=True, eq=False)
class ModeLattice:
    """Square-truncated set of Fourier modes with their DtN data.

    Attributes:
        truncation_order: ``N``; modes satisfy ``max(|n1|, |n2|) <= N``.
        alpha: quasi-momentum ``(alpha1, alpha2)``.
        wavenumber: ``k``.
        modes: integer array of shape ``(nmodes, 2)``.
        kappa: ``n + alpha``, shape ``(nmodes, 2)``.
        beta: vertical wavenumbers, shape ``(nmodes,)``.
        dtn_symbol: ``r_n = (n1 + alpha1, n2 + alpha2, beta_n)``, shape ``(nmodes, 3)``.
    """

    truncation_order: int
    alpha: np.ndarray
    wavenumber: float
    modes: np.ndarray
    kappa: np.ndarray
    beta: np.ndarray
    dtn_symbol: np.ndarray

    @property
    def size(self) -> int:
        return self.modes.shape[0]

    @property
    def kappa3(self) -> np.ndarray:
        """``n + alpha`` padded with a zero third component."""
        out = np.zeros((self.size, 3))
        out[:, :2] = self.kappa
        return out

    def index(self, n) -> int:
        """Position of mode ``n = (n1, n2)`` in the lattice ordering."""
        n1, n2 = int(n[0]), int(n[1])
        N = self.truncation_order
        if max(abs(n1), abs(n2)) > N:
            raise KeyError(f"mode {(n1, n2)} outside lattice of order {N}")
        return (n1 + N) * (2 * N + 1) + (n2 + N)

    @property
    def propagating(self) -> np.ndarray:
        return (np.abs(self.beta.imag) == 0) & (self.beta.real > 0)

    def threshold_distance(self) -> float:
        """``min_n | k - |n + alpha| |`` over the lattice."""
        return float(np.min(np.abs(self.wavenumber - np.hypot(*self.kappa.T))))


def build_lattice(N: int, alpha, k: float) -> ModeLattice:
    """Builds the ``(2N+1)^2`` mode lattice for quasi-momentum ``alpha`` at wave number ``k``."""
    alpha = np.asarray(alpha, dtype=float).reshape(-1)
    if alpha.shape != (2,):
        raise ValueError("alpha must be a 2-vector")
    if not (np.all(np.isfinite(alpha)) and np.isfinite(k)):
        raise ValueError("non-finite lattice parameters")
    if int(N) != N or N < 0:
        raise ValueError("truncation order must be a non-negative integer")
    if k <= 0:
        raise ValueError("wave number must be positive")
    N = int(N)
    r = np.arange(-N, N + 1)
    n1, n2 = np.meshgrid(r, r, indexing="ij")
    modes = np.stack([n1.ravel(), n2.ravel()], axis=1)
    kappa = modes + alpha
    beta = vertical_wavenumber(k, np.sum(kappa**2, axis=1))
    symbol = np.empty((modes.shape[0], 3), dtype=complex)
    symbol[:, :2] = kappa
    symbol[:, 2] = beta
    for arr in (modes, kappa, beta, symbol):
        arr.setflags(write=False)
    return ModeLattice(N, alpha, float(k), modes, kappa, beta, symbol)


@dataclasses.dataclass(frozen=True, eq=False)
class TraceCoefficients:
    """Fourier coefficients of a trace, one scalar or 3-vector per lattice mode."""

    lattice: ModeLattice
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape[0] != self.lattice.size:
            raise ValueError(
                f"expected {self.lattice.size} mode values, got {self.values.shape[0]}"
            )


def cell_grid(resolution: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform ``(x1, x2)`` sample points on the period cell, ``indexing='ij'``."""
    x = 2 * np.pi * np.arange(resolution) / resolution
    return np.meshgrid(x, x, indexing="ij")


def default_resolution(N: int) -> int:
    return 4 * (2 * N + 1)


def _fft_indices(lattice: ModeLattice, resolution: int):
    return lattice.modes[:, 0] % resolution, lattice.modes[:, 1] % resolution


def analyze_trace(
    samples,
    lattice: ModeLattice,
    *,
    out_of_band_tol: float | None = 1e-10,
) -> TraceCoefficients:
    """Fourier coefficients of grid samples on the period cell.

    Args:
        samples: array whose last two axes are a uniform ``(R, R)`` grid over
            the cell (``x_j = 2 pi i_j / R``).  Leading axes (e.g. a vector
            component axis) are kept and moved behind the mode axis.
        lattice: lattice whose modes are extracted.
        out_of_band_tol: if not ``None``, the spectral energy outside the
            lattice relative to the total must not exceed this value.

    Raises:
        AliasingError: grid too coarse for the lattice, or significant energy
            outside the retained modes.
    """
    samples = np.asarray(samples)
    R1, R2 = samples.shape[-2:]
    need = 2 * (2 * lattice.truncation_order + 1)
    if R1 != R2 or R1 < need:
        raise AliasingError(f"grid {R1}x{R2} below required resolution {need}")
    spectrum = np.fft.fft2(samples, axes=(-2, -1)) / (R1 * R2)
    i1, i2 = _fft_indices(lattice, R1)
    coeffs = spectrum[..., i1, i2]
    if out_of_band_tol is not None:
        total = np.sum(np.abs(spectrum) ** 2)
        kept = np.sum(np.abs(coeffs) ** 2)
        if total > 0 and (total - kept) > out_of_band_tol * total:
            raise AliasingError(
                f"relative out-of-band energy {(total - kept) / total:.3e} exceeds tolerance"
            )
    return TraceCoefficients(lattice, np.moveaxis(coeffs, -1, 0))


def synthesize_trace(coeffs: TraceCoefficients, resolution: int) -> np.ndarray:
    """Evaluates ``sum_n c_n exp(i n.x)`` on the uniform ``(R, R)`` cell grid."""
    lattice = coeffs.lattice
    vals = np.moveaxis(np.asarray(coeffs.values), 0, -1)
    spectrum = np.zeros(vals.shape[:-1] + (resolution, resolution), dtype=complex)
    i1, i2 = _fft_indices(lattice, resolution)
    spectrum[..., i1, i2] = vals
    return np.fft.ifft2(spectrum, axes=(-2, -1)) * resolution**2


def phase_shift(
    samples,
    alpha,
    direction: Literal["forward", "inverse"] = "forward",
) -> np.ndarray:
    """Multiplies cell samples by ``exp(-i alpha.x)`` (forward) or ``exp(+i alpha.x)``."""
    samples = np.asarray(samples)
    sign = {"forward": -1.0, "inverse": 1.0}[direction]
    x1, x2 = cell_grid(samples.shape[-1])
    return samples * np.exp(sign * 1j * (alpha[0] * x1 + alpha[1] * x2))
