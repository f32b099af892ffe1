"""Direct solves, smallest singular values and wave-number sweeps."""

from __future__ import annotations

import dataclasses
import logging
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import minimize_scalar

from biperiodic.discretization import (
    DiscreteField,
    DiscreteSystem,
    assemble_system,
    build_mesh,
    default_rho,
    divergence_norm,
)
from biperiodic.fourier import build_lattice
from biperiodic.material import MaterialProfile

log = logging.getLogger(__name__)

DENSE_LIMIT = 800
RW_OFFSET = 1e-6


class SingularSystemError(RuntimeError):
    """Raised when the factorisation breaks down; carries a ``sigma_min`` estimate."""

    def __init__(self, message: str, sigma_min: float | None = None):
        super().__init__(message)
        self.sigma_min = sigma_min


@dataclasses.dataclass
class SolveReport:
    solution: DiscreteField
    linear_residual: float
    divergence_residual: float
    dtn_residual: float
    stats: dict


def dtn_residual(H: DiscreteField) -> float:
    """``max_n |dH_n/dx3(h) - i beta_n H_n(h)|`` with a one-sided top difference."""
    c = H.coeffs
    z = H.mesh.nodes
    if H.mesh.M >= 2 and np.isclose(z[-1] - z[-2], z[-2] - z[-3]):
        d = (3 * c[..., -1] - 4 * c[..., -2] + c[..., -3]) / (2 * (z[-1] - z[-2]))
    else:
        d = (c[..., -1] - c[..., -2]) / (z[-1] - z[-2])
    res = d - 1j * H.lattice.beta[:, None] * c[..., -1]
    return float(np.max(np.abs(res[:, :2])))


def solve(system: DiscreteSystem, *, tol: float = 1e-10) -> SolveReport:
    """Sparse LU solve of the assembled system.

    Raises:
        SingularSystemError: if the factorisation fails or the residual exceeds
            ``tol`` (the report carries a ``sigma_min`` estimate).
    """
    A = system.matrix.tocsc()
    b = system.rhs
    try:
        lu = spla.splu(A)
        x = lu.solve(b)
    except RuntimeError as exc:
        raise SingularSystemError(f"factorisation failed: {exc}", _safe_sigma(system)) from exc
    bnorm = np.linalg.norm(b)
    r = np.linalg.norm(A @ x - b)
    rel = float(r / bnorm) if bnorm > 0 else float(r)
    if not np.all(np.isfinite(x)) or rel > tol:
        raise SingularSystemError(
            f"linear residual {rel:.3e} exceeds {tol:.1e}; matrix close to singular",
            _safe_sigma(system),
        )
    H = system.field(x)
    stats = {
        "dofs": system.size,
        "nnz": int(A.nnz),
        "factor_nnz": int(lu.L.nnz + lu.U.nnz),
    }
    return SolveReport(H, rel, divergence_norm(H), dtn_residual(H), stats)


def _safe_sigma(system):
    try:
        return min_singular_value(system)
    except Exception:  # noqa: BLE001 - diagnostic only
        return None


def min_singular_value(system, *, return_vector: bool = False, dense_limit: int = DENSE_LIMIT):
    """Smallest singular value of the system matrix.

    Dense SVD up to ``dense_limit`` unknowns; beyond that the largest
    eigenvalue of ``(A^H A)^{-1}`` is found by Lanczos iteration on top of a
    sparse LU factorisation.

    Args:
        system: a :class:`DiscreteSystem` or any (sparse or dense) square matrix.
        return_vector: also return the unit right singular vector.
    """
    A = system.matrix if isinstance(system, DiscreteSystem) else system
    n = A.shape[0]
    if n == 0:
        return (np.inf, np.zeros(0)) if return_vector else np.inf
    if n <= dense_limit:
        dense = A.toarray() if sp.issparse(A) else np.asarray(A)
        if not return_vector:
            return float(la.svdvals(dense)[-1])
        _, s, vh = la.svd(dense)
        return float(s[-1]), np.conj(vh[-1])
    lu = spla.splu(sp.csc_matrix(A))

    def mv(x):
        return lu.solve(lu.solve(x, trans="H"))

    op = spla.LinearOperator((n, n), matvec=mv, dtype=complex)
    v0 = np.random.default_rng(0).normal(size=n) + 0j
    lam, vec = spla.eigsh(op, k=1, which="LM", v0=v0, tol=1e-10)
    sigma = float(1 / np.sqrt(lam[0].real))
    if not return_vector:
        return sigma
    # eigenvectors of (A^H A)^{-1} are right singular vectors
    v = vec[:, 0]
    return sigma, v / np.linalg.norm(v)


def near_null_field(system: DiscreteSystem) -> tuple[float, DiscreteField]:
    """``sigma_min`` with its right singular vector as a field of unit coefficient norm."""
    s, v = min_singular_value(system, return_vector=True)
    return s, system.field(v)


@dataclasses.dataclass
class ScanCurve:
    k: np.ndarray
    sigma_min: np.ndarray
    threshold_flag: np.ndarray

    def __post_init__(self):
        if not (self.k.shape == self.sigma_min.shape == self.threshold_flag.shape):
            raise ValueError("scan arrays must have equal length")
        if self.k.size > 1 and np.any(np.diff(self.k) <= 0):
            raise ValueError("scan wave numbers must increase strictly")

    def median(self) -> float:
        return float(np.median(self.sigma_min)) if self.k.size else float("nan")

    def dip_depth(self) -> float:
        """``log10(median / min)``: orders of magnitude of the deepest dip."""
        if not self.k.size:
            return 0.0
        return float(np.log10(self.median() / np.min(self.sigma_min)))


def threshold_wavenumbers(alpha, k_max: float, N: int) -> np.ndarray:
    """Sorted ``|n + alpha|`` over the lattice, up to ``k_max``."""
    r = np.arange(-N, N + 1)
    n1, n2 = np.meshgrid(r, r, indexing="ij")
    t = np.hypot(n1.ravel() + alpha[0], n2.ravel() + alpha[1])
    return np.unique(t[t <= k_max])


def offset_from_thresholds(k, thresholds, offset: float = RW_OFFSET):
    """Moves samples closer than ``offset`` to a threshold ``offset`` away from it.

    Returns the adjusted wave numbers and a flag array marking moved samples.
    """
    k = np.array(k, dtype=float)
    flags = np.zeros(k.shape, dtype=bool)
    for i, ki in enumerate(k):
        if thresholds.size == 0:
            break
        j = np.argmin(np.abs(thresholds - ki))
        if abs(ki - thresholds[j]) < offset:
            flags[i] = True
            k[i] = thresholds[j] + (offset if ki >= thresholds[j] else -offset)
    return k, flags


RhoRule = str | complex | Callable[[MaterialProfile], complex]


def resolve_rho(rule: RhoRule, m: MaterialProfile) -> complex:
    if callable(rule):
        return complex(rule(m))
    if isinstance(rule, str):
        if rule != "default":
            raise ValueError(f"unknown rho rule {rule!r}")
        return default_rho(m)
    return complex(rule)


def system_at(k: float, m: MaterialProfile, N: int, M: int, rho_rule: RhoRule = "default", alpha=(0.0, 0.0)):
    lattice = build_lattice(N, alpha, k)
    mesh = build_mesh(m.h, M, m.breakpoints)
    return assemble_system(m, lattice, mesh, resolve_rho(rho_rule, m))


def scan_k(
    k_range,
    m: MaterialProfile,
    N: int,
    M: int,
    rho_rule: RhoRule = "default",
    *,
    alpha=(0.0, 0.0),
    points=None,
    workers: int = 1,
) -> ScanCurve:
    """``sigma_min`` over a uniform wave-number grid.

    Args:
        k_range: ``(k_min, k_max, count)``.
        m: material profile.
        N, M: lattice truncation order and number of vertical elements.
        rho_rule: ``"default"``, a complex constant or a callable of the profile.
        alpha: quasi-momentum held fixed along the sweep.
        points: explicit wave numbers overriding the uniform grid.
        workers: thread count for independent wave numbers (results are
            collected in order, so output does not depend on it).
    """
    k_min, k_max, count = k_range
    if k_min <= 0:
        raise ValueError("k_min must be positive")
    ks = np.linspace(k_min, k_max, int(count)) if points is None else np.asarray(points, float)
    if ks.size == 0:
        return ScanCurve(np.zeros(0), np.zeros(0), np.zeros(0, dtype=bool))
    thr = threshold_wavenumbers(alpha, ks.max() + 1, N)
    ks, flags = offset_from_thresholds(ks, thr)

    def one(k):
        s = min_singular_value(system_at(k, m, N, M, rho_rule, alpha))
        log.debug("k=%.6f sigma_min=%.3e", k, s)
        return s

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            sig = np.array(list(pool.map(one, ks)))
    else:
        sig = np.array([one(k) for k in ks])
    return ScanCurve(ks, sig, flags)


def locate_dip(
    m: MaterialProfile,
    N: int,
    M: int,
    bracket: tuple[float, float],
    rho_rule: RhoRule = "default",
    *,
    alpha=(0.0, 0.0),
    xtol: float = 1e-9,
) -> tuple[float, float]:
    """Refines a local minimum of ``sigma_min(k)`` inside ``bracket``.

    Returns ``(k, sigma_min)``.
    """
    f = lambda k: min_singular_value(system_at(k, m, N, M, rho_rule, alpha))  # noqa: E731
    res = minimize_scalar(f, bounds=bracket, method="bounded", options={"xatol": xtol})
    return float(res.x), float(res.fun)


def refine_scan(curve: ScanCurve, m, N, M, rho_rule="default", *, alpha=(0.0, 0.0), top: int = 3):
    """Refines the ``top`` deepest interior local minima of a scan.

    Returns a list of ``(k, sigma_min)`` pairs sorted by ``sigma_min``.
    """
    s = curve.sigma_min
    idx = [i for i in range(1, s.size - 1) if s[i] <= s[i - 1] and s[i] <= s[i + 1]]
    idx = sorted(idx, key=lambda i: s[i])[:top]
    thr = threshold_wavenumbers(alpha, curve.k.max() + 1, N)
    out = []
    for i in idx:
        lo, hi = curve.k[i - 1], curve.k[i + 1]
        # keep the refinement on one side of any threshold
        inside = thr[(thr > lo) & (thr < hi)]
        if inside.size:
            if inside[0] > curve.k[i]:
                hi = inside[0] - RW_OFFSET
            else:
                lo = inside[-1] + RW_OFFSET
        out.append(locate_dip(m, N, M, (lo, hi), rho_rule, alpha=alpha))
    return sorted(out, key=lambda t: t[1])
