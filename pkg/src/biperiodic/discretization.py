"""Fourier x P1 Galerkin discretisation of the magnetic-field sesquilinear form.

Unknowns are ``H_n(x3)`` per lattice mode and component, expanded in
continuous piecewise-linear functions on a vertical mesh of ``(0, h)``.  The
normal component vanishes at the plate, so the degree of freedom for
``H_3`` at ``x3 = 0`` is eliminated.

Degrees of freedom are numbered node-major (node, mode, component), which
keeps the matrix banded for the sparse factorisation.
"""

from __future__ import annotations

import dataclasses

import numpy as np
import scipy.sparse as sp

from biperiodic.fourier import CELL_AREA, ModeLattice
from biperiodic.incident import CombinedIncidentField, PlaneWaveSource
from biperiodic.material import MaterialProfile, coupling_matrices, fourier_slices

_UNIT = np.eye(3)


@dataclasses.dataclass(frozen=True, eq=False)
class VerticalMesh:
    """Nodes ``0 = z_0 < ... < z_M = h`` with a Gauss rule per element."""

    nodes: np.ndarray
    quad_order: int = 3

    def __post_init__(self):
        z = np.asarray(self.nodes, dtype=float)
        if z.ndim != 1 or z.size < 2 or z[0] != 0 or np.any(np.diff(z) <= 0):
            raise ValueError("mesh nodes must start at 0 and increase strictly")
        if self.quad_order < 1:
            raise ValueError("quadrature order must be positive")
        object.__setattr__(self, "nodes", z)
        z.setflags(write=False)

    @property
    def h(self) -> float:
        return float(self.nodes[-1])

    @property
    def M(self) -> int:
        return self.nodes.size - 1

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.nodes)

    def has_node(self, z: float, tol: float = 1e-12) -> bool:
        return bool(np.min(np.abs(self.nodes - z)) <= tol * max(1.0, self.h))

    def quadrature(self, order: int | None = None):
        """Composite Gauss rule: points ``(M, q)``, weights ``(M, q)`` and the
        reference coordinate ``t in (0, 1)`` of each point ``(q,)``."""
        order = self.quad_order if order is None else order
        xi, wi = np.polynomial.legendre.leggauss(order)
        t = 0.5 * (xi + 1)
        L = self.widths[:, None]
        pts = self.nodes[:-1, None] + L * t[None, :]
        wts = 0.5 * L * wi[None, :]
        return pts, wts, t


def merge_close(points, scale: float, tol: float = 1e-10) -> list[float]:
    """Sorted points with near-duplicates (closer than ``tol * scale``) merged."""
    out: list[float] = []
    for p in sorted(points):
        if not out or p - out[-1] > tol * scale:
            out.append(p)
        elif p == scale:
            out[-1] = p
    return out


def build_mesh(h: float, M: int, breakpoints=(), quad_order: int = 3) -> VerticalMesh:
    """Piecewise-uniform mesh with ``M`` elements and a node at every breakpoint.

    Elements are distributed over the segments between breakpoints in
    proportion to their length (largest remainder, at least one each).
    """
    pts = merge_close([0.0, float(h), *(float(b) for b in breakpoints if 0 < b < h)], h)
    lengths = np.diff(pts)
    if M < lengths.size:
        raise ValueError(f"need at least {lengths.size} elements to resolve breakpoints")
    ideal = M * lengths / h
    counts = np.maximum(np.floor(ideal).astype(int), 1)
    while counts.sum() < M:
        counts[np.argmax(ideal - counts)] += 1
    while counts.sum() > M:
        j = np.argmax(np.where(counts > 1, counts - ideal, -np.inf))
        counts[j] -= 1
    nodes = [0.0]
    for a, b, c in zip(pts[:-1], pts[1:], counts):
        nodes.extend(np.linspace(a, b, c + 1)[1:])
    nodes[-1] = float(h)
    return VerticalMesh(np.array(nodes), quad_order)


class DofMap:
    """Flat numbering of free ``(mode, component, node)`` triples."""

    def __init__(self, nmodes: int, M: int):
        self.nmodes = nmodes
        self.M = M
        full = np.arange(nmodes * 3 * (M + 1)).reshape(M + 1, nmodes, 3)
        free = np.ones_like(full, dtype=bool)
        free[0, :, 2] = False
        index = -np.ones_like(full)
        index[free] = np.arange(int(free.sum()))
        # stored as (mode, component, node)
        self.index = np.transpose(index, (1, 2, 0))
        self.free_full = full[free]
        self.size = int(free.sum())
        self.full_size = full.size
        self._full = np.transpose(full, (1, 2, 0))

    def full_index(self):
        return self._full

    def to_vector(self, coeffs: np.ndarray) -> np.ndarray:
        """Packs ``(nmodes, 3, M+1)`` coefficients; constrained entries are dropped."""
        out = np.empty(self.size, dtype=complex)
        mask = self.index >= 0
        out[self.index[mask]] = coeffs[mask]
        return out

    def to_coeffs(self, vec: np.ndarray) -> np.ndarray:
        out = np.zeros((self.nmodes, 3, self.M + 1), dtype=complex)
        mask = self.index >= 0
        out[mask] = vec[self.index[mask]]
        return out


@dataclasses.dataclass(frozen=True, eq=False)
class DiscreteField:
    """``H(x) = sum_n H_n(x3) exp(i n.x)`` with nodal ``coeffs[mode, comp, node]``."""

    lattice: ModeLattice
    mesh: VerticalMesh
    coeffs: np.ndarray

    def __post_init__(self):
        shape = (self.lattice.size, 3, self.mesh.M + 1)
        if self.coeffs.shape != shape:
            raise ValueError(f"coefficients must have shape {shape}")

    @classmethod
    def zeros(cls, lattice, mesh):
        return cls(lattice, mesh, np.zeros((lattice.size, 3, mesh.M + 1), dtype=complex))

    @classmethod
    def interpolate(cls, lattice, mesh, profile) -> "DiscreteField":
        """Nodal interpolant; ``profile(z)`` returns ``(nmodes, 3, len(z))``.

        The normal component is zeroed at the plate.
        """
        c = np.array(profile(mesh.nodes), dtype=complex)
        c[:, 2, 0] = 0
        return cls(lattice, mesh, c)

    def values(self, z) -> np.ndarray:
        """``H_n(z)`` by linear interpolation, shape ``(nmodes, 3, len(z))``."""
        z = np.atleast_1d(z)
        nodes = self.mesh.nodes
        j = np.clip(np.searchsorted(nodes, z, side="right") - 1, 0, self.mesh.M - 1)
        t = (z - nodes[j]) / (nodes[j + 1] - nodes[j])
        return self.coeffs[..., j] * (1 - t) + self.coeffs[..., j + 1] * t

    def derivative_on_elements(self) -> np.ndarray:
        """Element-wise constant ``dH_n/dx3``, shape ``(nmodes, 3, M)``."""
        return np.diff(self.coeffs, axis=-1) / self.mesh.widths

    def top(self) -> np.ndarray:
        return self.coeffs[:, :, -1]


@dataclasses.dataclass(frozen=True, eq=False)
class DiscreteSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    dof_map: DofMap
    rho: complex
    lattice: ModeLattice
    mesh: VerticalMesh

    @property
    def size(self) -> int:
        return self.dof_map.size

    def field(self, vec) -> DiscreteField:
        return DiscreteField(self.lattice, self.mesh, self.dof_map.to_coeffs(np.asarray(vec)))


def default_rho(m: MaterialProfile) -> complex:
    """``Re rho = inf inv_eps``, ``Im rho = -Re rho``."""
    c = m.bounds()[0]
    return complex(c, -c)


def check_rho(rho: complex) -> complex:
    rho = complex(rho)
    if not (rho.real > 0 and rho.imag < 0):
        raise ValueError(f"penalty constant needs Re rho > 0 and Im rho < 0, got {rho}")
    return rho


def mode_curl(lattice: ModeLattice, i: int, values, derivs) -> np.ndarray:
    """``(i kappa_n + e3 d/dx3) x H_n`` for values and derivatives ``(..., 3)``."""
    kap = lattice.kappa3[i]
    values = np.asarray(values)
    derivs = np.asarray(derivs)
    e3d = np.zeros_like(derivs)
    e3d[..., 0] = -derivs[..., 1]
    e3d[..., 1] = derivs[..., 0]
    return 1j * np.cross(kap, values) + e3d


def mode_div(lattice: ModeLattice, i: int, values, derivs) -> np.ndarray:
    kap = lattice.kappa3[i]
    return 1j * np.asarray(values) @ kap + np.asarray(derivs)[..., 2]


def _basis_symbols(lattice: ModeLattice, t: np.ndarray, L: float):
    """Curl and divergence of every local basis function at the Gauss points.

    Returns ``curl[mode, a, comp, q, 3]``, ``div[mode, a, comp, q]`` and
    ``phi[a, q]`` for local nodes ``a in {0, 1}``.
    """
    phi = np.stack([1 - t, t])  # (2, q)
    dphi = np.array([-1.0, 1.0]) / L  # (2,)
    kap = lattice.kappa3  # (nm, 3)
    # (i kappa phi + e3 dphi) x e_c
    cross_k = np.cross(kap[:, None, :], _UNIT[None, :, :])  # (nm, c, 3)
    cross_e3 = np.cross(_UNIT[2][None, :], _UNIT)  # (c, 3)
    curl = (
        1j * cross_k[:, None, :, None, :] * phi[None, :, None, :, None]
        + cross_e3[None, None, :, None, :] * dphi[None, :, None, None, None]
    )
    div = np.zeros((lattice.size, 2, 3, t.size), dtype=complex)
    div[:, :, 0:2, :] = 1j * kap[:, None, :2, None] * phi[None, :, None, :]
    div[:, :, 2, :] = dphi[None, :, None]
    return curl, div, phi


def _boundary_block(lattice: ModeLattice) -> np.ndarray:
    """``[mode, test comp, trial comp]`` entries of the two Gamma_h terms."""
    r = lattice.dtn_symbol
    out = np.empty((lattice.size, 3, 3), dtype=complex)
    for c in range(3):
        v = 1j * np.cross(r, _UNIT[c])  # R x e_c
        e3v = np.zeros_like(v)
        e3v[:, 0] = -v[:, 1]
        e3v[:, 1] = v[:, 0]
        out[:, :, c] = e3v
        out[:, 2, c] -= 1j * r[:, c]
    return out


def _check_alignment(m: MaterialProfile, mesh: VerticalMesh):
    if abs(mesh.h - m.h) > 1e-12 * m.h:
        raise ValueError("mesh height differs from profile height")
    if not mesh.has_node(m.h - m.collar):
        raise ValueError(f"no mesh node at the collar boundary x3 = {m.h - m.collar}")


def assemble_system(
    m: MaterialProfile,
    lattice: ModeLattice,
    mesh: VerticalMesh,
    rho: complex | None = None,
    source: PlaneWaveSource | None = None,
    *,
    boundary: bool = True,
) -> DiscreteSystem:
    """Assembles the sesquilinear form (and the right-hand side when a source is given).

    Args:
        m: profile; its collar boundary must be a mesh node.
        lattice: mode lattice at the working wave number.
        mesh: vertical mesh.
        rho: divergence penalty; defaults to :func:`default_rho`.
        source: plane wave for the right-hand side (zero vector otherwise).
        boundary: include the ``Gamma_h`` terms (disable for form audits only).
    """
    rho = check_rho(default_rho(m) if rho is None else rho)
    _check_alignment(m, mesh)
    nm = lattice.size
    k2 = lattice.wavenumber**2
    dofs = DofMap(nm, mesh.M)
    full = dofs.full_index()  # (nm, 3, M+1)
    pts, wts, t = mesh.quadrature()
    layered = m.is_layered
    if layered:
        eps_diag = m.inv_eps(0.0, 0.0, pts).real  # (M, q)
    else:
        coup = coupling_matrices(fourier_slices(m, lattice, pts.ravel()), lattice)
        coup = coup.reshape(mesh.M, pts.shape[1], nm, nm)

    rows, cols, vals = [], [], []
    mode_ix = np.arange(nm)
    for e in range(mesh.M):
        L = mesh.widths[e]
        curl, div, phi = _basis_symbols(lattice, t, L)
        w = wts[e]
        # mass and divergence penalty are mode-diagonal
        mass = np.einsum("q,aq,bq->ba", w, phi, phi)  # [test b, trial a]
        diag = rho * np.einsum("q,iacq,ibdq->ibdac", w, div, np.conj(div))
        diag -= k2 * mass[None, :, None, :, None] * _UNIT[None, None, :, None, :]
        if layered:
            diag += np.einsum("q,iacqk,ibdqk->ibdac", w * eps_diag[e], curl, np.conj(curl))
            block = diag
            gidx = full[:, :, e : e + 2]  # (nm, 3, 2)
            r = np.transpose(gidx, (0, 2, 1))  # (nm, b, d)
            R = np.broadcast_to(r[:, :, :, None, None], block.shape)
            C = np.broadcast_to(r[:, None, None, :, :], block.shape)
            rows.append(R.ravel())
            cols.append(C.ravel())
            vals.append(block.ravel())
        else:
            cc = np.einsum("q,qij,jacqk,ibdqk->ibdjac", w, coup[e], curl, np.conj(curl))
            cc[mode_ix, :, :, mode_ix] += diag
            r = np.transpose(full[:, :, e : e + 2], (0, 2, 1))
            R = np.broadcast_to(r[:, :, :, None, None, None], cc.shape)
            C = np.broadcast_to(r[None, None, None, :, :, :], cc.shape)
            rows.append(R.ravel())
            cols.append(C.ravel())
            vals.append(cc.ravel())

    if boundary:
        bb = _boundary_block(lattice)
        top = full[:, :, -1]  # (nm, 3)
        rows.append(np.broadcast_to(top[:, :, None], bb.shape).ravel())
        cols.append(np.broadcast_to(top[:, None, :], bb.shape).ravel())
        vals.append(bb.ravel())

    A = sp.coo_matrix(
        (CELL_AREA * np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dofs.full_size, dofs.full_size),
    ).tocsr()
    keep = dofs.free_full
    A = A[keep][:, keep].tocsr()
    rhs = np.zeros(dofs.size, dtype=complex)
    if source is not None:
        rhs = assemble_rhs(source, m, lattice, mesh, dofs=dofs)
    return DiscreteSystem(A, rhs, dofs, rho, lattice, mesh)


def specular_index(source: PlaneWaveSource, lattice: ModeLattice) -> int:
    """Lattice position of the specular order.

    The lattice quasi-momentum may differ from the source's ``(d1, d2)`` by an
    integer vector ``s``; the specular order is then mode ``s``.

    Raises:
        ValueError: if the difference is not an integer vector inside the lattice.
    """
    shift = np.asarray(source.alpha) - lattice.alpha
    s = np.round(shift)
    if np.max(np.abs(shift - s)) > 1e-12:
        raise ValueError("source quasi-momentum differs from the lattice alpha by a non-integer vector")
    try:
        return lattice.index(s.astype(int))
    except KeyError as exc:
        raise ValueError("specular order lies outside the lattice") from exc


def assemble_rhs(
    source: PlaneWaveSource,
    m: MaterialProfile,
    lattice: ModeLattice,
    mesh: VerticalMesh,
    *,
    dofs: DofMap | None = None,
) -> np.ndarray:
    """Load vector of ``int (1 - inv_eps) curl_alpha H^ir_alpha . conj(curl_alpha F)``."""
    specular = specular_index(source, lattice)
    if abs(source.k - lattice.wavenumber) > 1e-12 * source.k:
        raise ValueError("source wave number differs from the lattice wave number")
    dofs = DofMap(lattice.size, mesh.M) if dofs is None else dofs
    field = CombinedIncidentField(source)
    pts, wts, t = mesh.quadrature()
    G = field.curl_alpha_H_profile(pts)  # (M, q, 3)
    J = 2 * lattice.truncation_order
    if m.is_layered:
        contrast = np.zeros((mesh.M, pts.shape[1], lattice.size))
        contrast[:, :, specular] = 1 - m.inv_eps(0.0, 0.0, pts).real
    else:
        # in the lattice frame G carries the factor exp(i s.x), s = the specular mode
        s = lattice.modes[specular]
        sl = fourier_slices(m, lattice, pts.ravel()).reshape(mesh.M, pts.shape[1], 2 * J + 1, 2 * J + 1)
        d = lattice.modes - s
        ok = np.all(np.abs(d) <= J, axis=1)
        contrast = np.zeros((mesh.M, pts.shape[1], lattice.size), dtype=complex)
        contrast[:, :, ok] = -sl[:, :, d[ok, 0] + J, d[ok, 1] + J]
        contrast[:, :, specular] += 1
    out = np.zeros((lattice.size, 3, mesh.M + 1), dtype=complex)
    for e in range(mesh.M):
        curl, _, _ = _basis_symbols(lattice, t, mesh.widths[e])
        # product slices: (1 - inv_eps)^_n * G, since G is laterally constant
        src = contrast[e][:, :, None] * G[e][:, None, :]  # (q, nm, 3)
        loc = np.einsum("q,qik,ibdqk->idb", wts[e], src, np.conj(curl))
        out[:, :, e : e + 2] += loc
    return dofs.to_vector(CELL_AREA * out)


# ---------------------------------------------------------------------------
# direct evaluation of the form (independent of the matrix assembly)


def _field_at(F: DiscreteField, pts):
    """Values and derivatives of ``F`` at element quadrature points, ``(nm, 3, M, q)``."""
    t = (pts - F.mesh.nodes[:-1, None]) / F.mesh.widths[:, None]
    c = F.coeffs
    vals = c[..., :-1, None] * (1 - t) + c[..., 1:, None] * t
    ders = np.broadcast_to(F.derivative_on_elements()[..., None], vals.shape)
    return vals, ders


def _curl_div(lattice, vals, ders):
    kap = lattice.kappa3
    v = np.moveaxis(vals, 1, -1)  # (nm, M, q, 3)
    d = np.moveaxis(ders, 1, -1)
    ik = 1j * kap[:, None, None, :]
    curl = np.cross(ik, v)
    curl[..., 0] -= d[..., 1]
    curl[..., 1] += d[..., 0]
    div = np.sum(ik * v, axis=-1) + d[..., 2]
    return curl, div, v


def evaluate_B(H: DiscreteField, F: DiscreteField, m: MaterialProfile, rho: complex | None = None) -> complex:
    """Evaluates the sesquilinear form by quadrature of the mode expansions."""
    if H.lattice is not F.lattice and not (
        np.array_equal(H.lattice.modes, F.lattice.modes)
        and np.allclose(H.lattice.beta, F.lattice.beta)
    ):
        raise ValueError("fields live on different lattices")
    if not np.array_equal(H.mesh.nodes, F.mesh.nodes):
        raise ValueError("fields live on different meshes")
    rho = check_rho(default_rho(m) if rho is None else rho)
    lat = H.lattice
    pts, wts, _ = H.mesh.quadrature()
    cH, dH, vH = _curl_div(lat, *_field_at(H, pts))
    cF, dF, vF = _curl_div(lat, *_field_at(F, pts))
    if m.is_layered:
        a = m.inv_eps(0.0, 0.0, pts).real
        curlcurl = np.sum(wts[None] * a[None] * np.sum(cH * np.conj(cF), axis=-1))
    else:
        coup = coupling_matrices(fourier_slices(m, lat, pts.ravel()), lat).reshape(
            pts.shape + (lat.size, lat.size)
        )
        curlcurl = np.einsum("eq,eqij,jeqk,ieqk->", wts, coup, cH, np.conj(cF))
    mass = np.sum(wts[None] * np.sum(vH * np.conj(vF), axis=-1))
    divdiv = np.sum(wts[None] * dH * np.conj(dF))
    r = lat.dtn_symbol
    hT, fT = H.top(), F.top()
    RxH = 1j * np.cross(r, hT)
    e3RxH = np.stack([-RxH[:, 1], RxH[:, 0], np.zeros(lat.size)], axis=1)
    RdotH = 1j * np.sum(r * hT, axis=1)
    bnd = np.sum(e3RxH * np.conj(fT)) - np.sum(RdotH * np.conj(fT[:, 2]))
    k2 = lat.wavenumber**2
    return complex(CELL_AREA * (curlcurl - k2 * mass + rho * divdiv + bnd))


def field_norms(H: DiscreteField) -> tuple[float, float]:
    """``(||H||^2, ||grad_alpha H||^2)`` over the cell, integrated exactly for P1."""
    L = H.mesh.widths
    c = H.coeffs
    a, b = c[..., :-1], c[..., 1:]
    l2 = np.sum(L * (np.abs(a) ** 2 + np.abs(b) ** 2 + np.real(a * np.conj(b))) / 3)
    kap2 = np.sum(H.lattice.kappa**2, axis=1)[:, None, None]
    per_mode = L * (np.abs(a) ** 2 + np.abs(b) ** 2 + np.real(a * np.conj(b))) / 3
    grad = np.sum(kap2 * per_mode) + np.sum(np.abs(b - a) ** 2 / L)
    return float(CELL_AREA * l2), float(CELL_AREA * grad)


def divergence_norm(H: DiscreteField) -> float:
    """``||div_alpha H||`` over the cell (Gauss quadrature, exact for P1 products)."""
    pts, wts, _ = H.mesh.quadrature(2)
    _, div, _ = _curl_div(H.lattice, *_field_at(H, pts))
    return float(np.sqrt(CELL_AREA * np.sum(wts[None] * np.abs(div) ** 2)))
