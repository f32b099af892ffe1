"""Inverse relative permittivity profiles, the non-trapping condition checker
and per-mode Fourier slices used by the assembly.

Profiles live on ``Omega = (0, 2pi)^2 x (0, h)`` and equal one on the collar
``h - eta < x3 < h``.  Two representations are provided:

* :class:`SeparableProfile` -- ``base(x3) + lateral(x1, x2) * vertical(x3)``
  with closed-form gradients.  Covers laterally invariant (layered) media and
  the bump family used for non-trapping examples.
* :class:`GridProfile` -- trilinear interpolation of nodal samples.
"""

from __future__ import annotations

import dataclasses
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import ndimage

from biperiodic.fourier import AliasingError, ModeLattice

# ---------------------------------------------------------------------------
# one-dimensional building blocks


def _cubic_step(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3 - 2 * t), 6 * t * (1 - t)


def _smooth_step(t):
    # C-infinity step built from exp(-1/t); derivative is returned alongside.
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        f = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        g = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1 - t, 1.0)), 0.0)
        df = np.where(t > 0, f / np.where(t > 0, t, 1.0) ** 2, 0.0)
        dg = np.where(t < 1, -g / np.where(t < 1, 1 - t, 1.0) ** 2, 0.0)
        s = f / (f + g)
        ds = (df * (f + g) - f * (df + dg)) / (f + g) ** 2
    return s, np.nan_to_num(ds)


_STEPS = {"cubic": _cubic_step, "smooth": _smooth_step}


@dataclasses.dataclass(frozen=True)
class Window1D:
    """Periodic window on ``(0, 2pi)``: zero outside ``(a, 2pi - a)``, one on
    ``[pi/2, 3pi/2]``, with cubic (C^1) or C^infinity ramps in between."""

    a: float = np.pi / 8
    kind: str = "cubic"

    def __post_init__(self):
        if not 0 < self.a < np.pi / 2:
            raise ValueError("window ramp start must lie in (0, pi/2)")
        if self.kind not in _STEPS:
            raise ValueError(f"unknown ramp kind {self.kind!r}")

    def value_and_deriv(self, t):
        t = np.mod(np.asarray(t, dtype=float), 2 * np.pi)
        step = _STEPS[self.kind]
        w = np.pi / 2 - self.a
        up, dup = step((t - self.a) / w)
        down, ddown = step((2 * np.pi - self.a - t) / w)
        left = t < np.pi
        val = np.where(left, up, down)
        der = np.where(left, dup / w, -ddown / w)
        return val, der

    def __call__(self, t):
        return self.value_and_deriv(t)[0]


@dataclasses.dataclass(frozen=True)
class Bump:
    """Tensor-product cut-off ``chi(x1, x2) = w(x1) w(x2)``."""

    window: Window1D = Window1D()

    @property
    def factors(self):
        return (self.window, self.window)

    def __call__(self, x1, x2):
        return self.window(x1) * self.window(x2)

    def grad(self, x1, x2):
        v1, d1 = self.window.value_and_deriv(x1)
        v2, d2 = self.window.value_and_deriv(x2)
        return d1 * v2, v1 * d2


@dataclasses.dataclass(frozen=True)
class _Cos1D:
    amplitude: float
    n: int

    def __call__(self, t):
        return self.amplitude * np.cos(self.n * np.asarray(t, dtype=float))


@dataclasses.dataclass(frozen=True)
class _One1D:
    def __call__(self, t):
        return np.ones_like(np.asarray(t, dtype=float))


@dataclasses.dataclass(frozen=True)
class CosineLateral:
    """``amplitude * cos(n1 x1) * cos(n2 x2)`` (``n2 = 0`` gives ``cos(n1 x1)``)."""

    amplitude: float
    n1: int = 1
    n2: int = 0

    @property
    def factors(self):
        f2 = _One1D() if self.n2 == 0 else _Cos1D(1.0, self.n2)
        return (_Cos1D(self.amplitude, self.n1), f2)

    def __call__(self, x1, x2):
        return self.amplitude * np.cos(self.n1 * x1) * np.cos(self.n2 * x2)

    def grad(self, x1, x2):
        a = self.amplitude
        return (
            -a * self.n1 * np.sin(self.n1 * x1) * np.cos(self.n2 * x2),
            -a * self.n2 * np.cos(self.n1 * x1) * np.sin(self.n2 * x2),
        )


@dataclasses.dataclass(frozen=True)
class PiecewiseLinear:
    """Continuous piecewise-linear function of ``x3`` (constant beyond the knots)."""

    knots: tuple
    values: tuple

    def __post_init__(self):
        if len(self.knots) != len(self.values) or len(self.knots) < 1:
            raise ValueError("knots and values must have equal, non-zero length")
        if np.any(np.diff(self.knots) <= 0):
            raise ValueError("knots must be strictly increasing")

    def __call__(self, z):
        return np.interp(z, self.knots, self.values)

    def deriv(self, z):
        z = np.asarray(z, dtype=float)
        kn = np.asarray(self.knots, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if kn.size == 1:
            return np.zeros_like(z)
        slopes = np.diff(vals) / np.diff(kn)
        # open intervals use their slope; a knot takes the slope on its right
        idx = np.searchsorted(kn, z, side="right") - 1
        inside = (idx >= 0) & (idx < slopes.size)
        return np.where(inside, slopes[np.clip(idx, 0, slopes.size - 1)], 0.0)

    @property
    def breakpoints(self):
        return tuple(self.knots)


@dataclasses.dataclass(frozen=True)
class StepFunction:
    """Piecewise-constant function of ``x3``: ``values[i]`` on ``[edges[i-1], edges[i])``."""

    edges: tuple
    values: tuple

    def __post_init__(self):
        if len(self.values) != len(self.edges) + 1:
            raise ValueError("need one more value than edges")

    def __call__(self, z):
        idx = np.searchsorted(np.asarray(self.edges), z, side="right")
        return np.asarray(self.values, dtype=float)[idx]

    def deriv(self, z):
        return np.zeros_like(np.asarray(z, dtype=float))

    @property
    def breakpoints(self):
        return tuple(self.edges)


@dataclasses.dataclass(frozen=True)
class SmoothTransition:
    """``start`` for ``x3 <= z0``, ``end`` for ``x3 >= z1``, C^infinity in between."""

    z0: float
    z1: float
    start: float
    end: float

    def __call__(self, z):
        s, _ = _smooth_step((np.asarray(z, dtype=float) - self.z0) / (self.z1 - self.z0))
        return self.start + (self.end - self.start) * s

    def deriv(self, z):
        _, ds = _smooth_step((np.asarray(z, dtype=float) - self.z0) / (self.z1 - self.z0))
        return (self.end - self.start) * ds / (self.z1 - self.z0)

    @property
    def breakpoints(self):
        return (self.z0, self.z1)


# ---------------------------------------------------------------------------
# profiles


class MaterialProfile:
    """Common interface for ``eps_r^{-1}`` on the cell.

    Subclasses implement :meth:`inv_eps`, :meth:`grad` and :meth:`_slices`.
    """

    h: float
    collar: float
    description: dict

    def inv_eps(self, x1, x2, x3) -> np.ndarray:
        raise NotImplementedError

    def grad(self, x1, x2, x3) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        raise NotImplementedError

    @property
    def is_layered(self) -> bool:
        return False

    @property
    def breakpoints(self) -> tuple:
        """``x3`` locations where the profile is not smooth; meshes align to them."""
        return ()

    def bounds(self, density: int = 32) -> tuple[float, float]:
        """Sampled ``(inf, sup)`` of the profile."""
        cached = getattr(self, "_bounds", None)
        if cached is not None:
            return cached
        x1, x2, x3 = sample_grid(self, (density, density, 4 * density))
        v = self.inv_eps(x1, x2, x3)
        self._bounds = (float(v.min()), float(v.max()))
        return self._bounds

    def validate(self, density: int = 16, tol: float = 1e-12) -> None:
        """Checks positivity, the unit collar and lateral periodicity by sampling."""
        if self.bounds()[0] <= 0:
            raise ValueError("inverse permittivity must be positive")
        t = np.linspace(0, 2 * np.pi, density, endpoint=False)
        zc = np.linspace(self.h - self.collar, self.h, density)
        X1, X2, Z = np.meshgrid(t, t, zc, indexing="ij")
        if np.max(np.abs(self.inv_eps(X1, X2, Z) - 1)) > tol:
            raise ValueError("profile differs from one on the collar")
        z = np.linspace(0, self.h, density)
        T, Z = np.meshgrid(t, z, indexing="ij")
        for a, b in (
            (self.inv_eps(0 * T, T, Z), self.inv_eps(0 * T + 2 * np.pi, T, Z)),
            (self.inv_eps(T, 0 * T, Z), self.inv_eps(T, 0 * T + 2 * np.pi, Z)),
        ):
            if np.max(np.abs(a - b)) > 1e-10:
                raise ValueError("profile is not 2pi-periodic")

    def slices(self, max_order: int, z, kind: str = "inv_eps") -> np.ndarray:
        """Fourier coefficients ``f_j(x3)`` of the profile (or a gradient
        component) for ``|j1|, |j2| <= max_order``.

        Args:
            max_order: largest difference index per direction.
            z: ``x3`` nodes.
            kind: ``'inv_eps'``, ``'d1'``, ``'d2'`` or ``'d3'``.

        Returns:
            complex array of shape ``(len(z), 2*max_order+1, 2*max_order+1)``;
            entry ``[q, j1 + max_order, j2 + max_order]``.
        """
        if kind not in ("inv_eps", "d1", "d2", "d3"):
            raise ValueError(f"unknown slice kind {kind!r}")
        return self._slices(int(max_order), np.atleast_1d(np.asarray(z, dtype=float)), kind)

    def _slices(self, max_order, z, kind):
        raise NotImplementedError


class SeparableProfile(MaterialProfile):
    """``inv_eps = base(x3) + lateral(x1, x2) * vertical(x3)``.

    Args:
        base, vertical: callables of ``x3`` with a ``deriv`` method.
        lateral: callable of ``(x1, x2)`` with a ``grad`` method, or ``None``
            for laterally invariant media.  If it exposes 1D ``factors``, its
            Fourier coefficients are computed from 1D FFTs.
        h, collar: cell height and unit-collar thickness.
        lateral_resolution: FFT resolution for the lateral coefficients.
    """

    def __init__(
        self,
        base,
        h: float,
        collar: float,
        lateral=None,
        vertical=None,
        *,
        description: dict | None = None,
        lateral_resolution: int | None = None,
    ):
        if h <= 0 or not 0 < collar <= h:
            raise ValueError("need h > 0 and 0 < collar <= h")
        if (lateral is None) != (vertical is None):
            raise ValueError("lateral and vertical factors go together")
        self.base = base
        self.lateral = lateral
        self.vertical = vertical
        self.h = float(h)
        self.collar = float(collar)
        self.description = description or {"family": "separable"}
        if lateral_resolution is None:
            lateral_resolution = 1 << 14 if hasattr(lateral, "factors") else 2048
        self.lateral_resolution = int(lateral_resolution)
        self._lateral_hat_cache: dict = {}

    @property
    def is_layered(self) -> bool:
        return self.lateral is None

    @property
    def breakpoints(self) -> tuple:
        pts = set(getattr(self.base, "breakpoints", ()))
        if self.vertical is not None:
            pts |= set(getattr(self.vertical, "breakpoints", ()))
        pts.add(self.h - self.collar)
        return tuple(sorted(p for p in pts if 0 < p < self.h))

    def inv_eps(self, x1, x2, x3):
        x1, x2, x3 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x1, x2, x3)))
        out = self.base(x3)
        if self.lateral is not None:
            out = out + self.lateral(x1, x2) * self.vertical(x3)
        return out

    def grad(self, x1, x2, x3):
        x1, x2, x3 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x1, x2, x3)))
        g3 = self.base.deriv(x3)
        if self.lateral is None:
            zero = np.zeros_like(x3)
            return zero, zero.copy(), g3
        lg1, lg2 = self.lateral.grad(x1, x2)
        v = self.vertical(x3)
        return lg1 * v, lg2 * v, g3 + self.lateral(x1, x2) * self.vertical.deriv(x3)

    def lateral_hat(self, max_order: int) -> np.ndarray:
        """Fourier coefficients of the lateral factor, ``(2J+1, 2J+1)``."""
        if max_order in self._lateral_hat_cache:
            return self._lateral_hat_cache[max_order]
        R = self.lateral_resolution
        if R < 2 * (2 * max_order + 1):
            raise AliasingError("lateral resolution too small for requested order")
        idx = np.arange(-max_order, max_order + 1) % R
        t = 2 * np.pi * np.arange(R) / R
        factors = getattr(self.lateral, "factors", None)
        if factors is not None:
            c1 = np.fft.fft(factors[0](t))[idx] / R
            c2 = np.fft.fft(factors[1](t))[idx] / R
            hat = np.outer(c1, c2)
        else:
            X1, X2 = np.meshgrid(t, t, indexing="ij")
            spectrum = np.fft.fft2(self.lateral(X1, X2)) / R**2
            hat = spectrum[np.ix_(idx, idx)]
        self._lateral_hat_cache[max_order] = hat
        return hat

    def _slices(self, J, z, kind):
        out = np.zeros((z.size, 2 * J + 1, 2 * J + 1), dtype=complex)
        if kind == "inv_eps":
            out[:, J, J] = self.base(z)
        elif kind == "d3":
            out[:, J, J] = self.base.deriv(z)
        if self.lateral is None:
            return out
        hat = self.lateral_hat(J)
        j = np.arange(-J, J + 1)
        if kind == "d1":
            hat = 1j * j[:, None] * hat
        elif kind == "d2":
            hat = 1j * j[None, :] * hat
        prof = self.vertical.deriv(z) if kind == "d3" else self.vertical(z)
        return out + prof[:, None, None] * hat[None]


class GridProfile(MaterialProfile):
    """Trilinear interpolant of nodal samples.

    ``values[i1, i2, i3]`` sits at ``(2pi i1/n1, 2pi i2/n2, h i3/(n3-1))``;
    periodic in ``x1, x2``.  Gradients are the exact derivatives of the
    interpolant (one-sided at cell faces).
    """

    def __init__(self, values, h: float, collar: float, *, description=None, lateral_resolution=None):
        values = np.asarray(values, dtype=float)
        if values.ndim != 3 or values.shape[2] < 2:
            raise ValueError("grid values must be a 3D array with at least two x3 nodes")
        if h <= 0 or not 0 < collar <= h:
            raise ValueError("need h > 0 and 0 < collar <= h")
        self.values = values
        self.h = float(h)
        self.collar = float(collar)
        self.description = description or {"family": "grid", "shape": list(values.shape)}
        self.lateral_resolution = lateral_resolution

    @property
    def breakpoints(self) -> tuple:
        n3 = self.values.shape[2]
        pts = {self.h * j / (n3 - 1) for j in range(1, n3 - 1)}
        pts.add(self.h - self.collar)
        return tuple(sorted(p for p in pts if 0 < p < self.h))

    def _locate(self, x1, x2, x3):
        n1, n2, n3 = self.values.shape
        s1 = np.mod(x1, 2 * np.pi) * n1 / (2 * np.pi)
        s2 = np.mod(x2, 2 * np.pi) * n2 / (2 * np.pi)
        s3 = np.clip(x3 / self.h * (n3 - 1), 0, n3 - 1)
        i1 = np.floor(s1).astype(int) % n1
        i2 = np.floor(s2).astype(int) % n2
        i3 = np.minimum(np.floor(s3).astype(int), n3 - 2)
        return (i1, s1 - np.floor(s1)), (i2, s2 - np.floor(s2)), (i3, s3 - i3)

    def _corners(self, i1, i2, i3):
        n1, n2, _ = self.values.shape
        v = self.values
        j1, j2 = (i1 + 1) % n1, (i2 + 1) % n2
        return {
            (a, b, c): v[(i1, j1)[a], (i2, j2)[b], i3 + c]
            for a in (0, 1) for b in (0, 1) for c in (0, 1)
        }

    def inv_eps(self, x1, x2, x3):
        x1, x2, x3 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x1, x2, x3)))
        (i1, t1), (i2, t2), (i3, t3) = self._locate(x1, x2, x3)
        c = self._corners(i1, i2, i3)
        w = lambda a, t: t if a else 1 - t  # noqa: E731
        return sum(c[a, b, cc] * w(a, t1) * w(b, t2) * w(cc, t3) for (a, b, cc) in c)

    def grad(self, x1, x2, x3):
        x1, x2, x3 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x1, x2, x3)))
        n1, n2, n3 = self.values.shape
        (i1, t1), (i2, t2), (i3, t3) = self._locate(x1, x2, x3)
        c = self._corners(i1, i2, i3)
        w = lambda a, t: t if a else 1 - t  # noqa: E731
        dw = lambda a: 1.0 if a else -1.0  # noqa: E731
        scale = (n1 / (2 * np.pi), n2 / (2 * np.pi), (n3 - 1) / self.h)
        g1 = sum(c[k] * dw(k[0]) * w(k[1], t2) * w(k[2], t3) for k in c) * scale[0]
        g2 = sum(c[k] * w(k[0], t1) * dw(k[1]) * w(k[2], t3) for k in c) * scale[1]
        g3 = sum(c[k] * w(k[0], t1) * w(k[1], t2) * dw(k[2]) for k in c) * scale[2]
        return g1, g2, g3

    def _slices(self, J, z, kind):
        R = self.lateral_resolution or max(4 * (2 * J + 1), 4 * max(self.values.shape[:2]))
        if R < 2 * (2 * J + 1):
            raise AliasingError("lateral resolution too small for requested order")
        t = 2 * np.pi * np.arange(R) / R
        X1, X2 = np.meshgrid(t, t, indexing="ij")
        idx = np.arange(-J, J + 1) % R
        out = np.empty((z.size, 2 * J + 1, 2 * J + 1), dtype=complex)
        for q, zq in enumerate(z):
            Z = np.full_like(X1, zq)
            if kind == "inv_eps":
                f = self.inv_eps(X1, X2, Z)
            else:
                f = self.grad(X1, X2, Z)["d1 d2 d3".split().index(kind)]
            out[q] = (np.fft.fft2(f) / R**2)[np.ix_(idx, idx)]
        return out


def constant_profile(h: float = 1.0, collar: float | None = None) -> SeparableProfile:
    """``inv_eps = 1`` everywhere (zero contrast)."""
    collar = h / 2 if collar is None else collar
    return SeparableProfile(
        PiecewiseLinear((0.0,), (1.0,)), h, collar, description={"family": "constant", "h": h}
    )


def layered_profile(knots: Sequence[float], values: Sequence[float], h: float) -> SeparableProfile:
    """Laterally invariant, piecewise-linear ``inv_eps(x3)``; must reach 1 at the last knot."""
    knots = tuple(float(v) for v in knots)
    values = tuple(float(v) for v in values)
    if abs(values[-1] - 1) > 1e-14 or knots[-1] >= h:
        raise ValueError("layered profile must equal one from its last knot (< h) upwards")
    return SeparableProfile(
        PiecewiseLinear(knots, values),
        h,
        h - knots[-1],
        description={"family": "layered", "knots": list(knots), "values": list(values), "h": h},
    )


def slab_profile(eps: float, thickness: float, h: float) -> SeparableProfile:
    """Uniform slab ``eps_r = eps`` on ``(0, thickness)`` above the plate."""
    if not 0 < thickness < h or eps <= 0:
        raise ValueError("need 0 < thickness < h and eps > 0")
    return SeparableProfile(
        StepFunction((thickness,), (1.0 / eps, 1.0)),
        h,
        h - thickness,
        description={"family": "slab", "eps": eps, "thickness": thickness, "h": h},
    )


def build_example_profile(
    lam: float,
    h1: float,
    h2: float,
    h: float,
    chi: Bump | None = None,
    *,
    smooth_vertical: bool = False,
) -> SeparableProfile:
    """Non-trapping example: ``lam*chi + 1`` below ``h1``, linear decay to 1 on
    ``(h1, h2)``, and 1 above ``h2``.

    Args:
        lam: contrast ``lambda > 0``.
        h1, h2, h: heights with ``0 < h1 < h2 < h``.
        chi: lateral cut-off; defaults to a cubic-ramp tensor bump.
        smooth_vertical: replace the linear ramp by a C^infinity transition
            (used for quadrature convergence studies).
    """
    if not 0 < h1 < h2 < h:
        raise ValueError("need 0 < h1 < h2 < h")
    if lam <= 0:
        raise ValueError("lambda must be positive")
    chi = Bump() if chi is None else chi
    if smooth_vertical:
        vertical = SmoothTransition(h1, h2, lam, 0.0)
    else:
        vertical = PiecewiseLinear((h1, h2), (lam, 0.0))
    return SeparableProfile(
        PiecewiseLinear((0.0,), (1.0,)),
        h,
        h - h2,
        lateral=chi,
        vertical=vertical,
        description={
            "family": "example",
            "lambda": lam,
            "h1": h1,
            "h2": h2,
            "h": h,
            "chi": {"a": chi.window.a, "kind": chi.window.kind},
            "smooth_vertical": smooth_vertical,
        },
    )


# ---------------------------------------------------------------------------
# grid files

GRID_MAGIC = "# biperiodic-grid v1"


def write_grid_file(path, values, h: float, collar: float) -> None:
    """Grid format: magic line, ``n1 n2 n3 h eta`` header, then one value per
    line in row-major ``(i1, i2, i3)`` order (``i3`` fastest)."""
    values = np.asarray(values, dtype=float)
    n1, n2, n3 = values.shape
    lines = [GRID_MAGIC, f"{n1} {n2} {n3} {h!r} {collar!r}"]
    lines += [repr(float(v)) for v in values.ravel(order="C")]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_grid_file(path) -> GridProfile:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != GRID_MAGIC:
        raise ValueError(f"{path}: line 1: missing grid header {GRID_MAGIC!r}")
    try:
        n1, n2, n3 = (int(v) for v in lines[1].split()[:3])
        h, eta = (float(v) for v in lines[1].split()[3:5])
    except (IndexError, ValueError) as exc:
        raise ValueError(f"{path}: line 2: expected 'n1 n2 n3 h eta'") from exc
    body = lines[2:]
    if len(body) != n1 * n2 * n3:
        raise ValueError(f"{path}: expected {n1 * n2 * n3} values, found {len(body)}")
    vals = np.array([float(v) for v in body]).reshape(n1, n2, n3)
    return GridProfile(vals, h, eta, description={"family": "grid", "path": str(path)})


# ---------------------------------------------------------------------------
# condition checks


def sample_grid(m: MaterialProfile, density) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cell-centred sample points (avoids landing exactly on profile kinks)."""
    if np.isscalar(density):
        density = (int(density),) * 3
    n1, n2, n3 = density
    x1 = 2 * np.pi * (np.arange(n1) + 0.5) / n1
    x2 = 2 * np.pi * (np.arange(n2) + 0.5) / n2
    x3 = m.h * (np.arange(n3) + 0.5) / n3
    return np.meshgrid(x1, x2, x3, indexing="ij")


@dataclasses.dataclass
class ConditionReport:
    """Outcome of the sampled non-trapping checks (a)-(c)."""

    cond_a: bool
    max_d3: float
    cond_b: bool
    ball_center: list | None
    ball_radius: float
    cond_c: bool
    best_delta: float | None
    lhs_c: float
    rhs_c: float
    estimate_constant: float
    sup_grad_T: float
    sup_d3: float
    min_inv_eps: float
    max_inv_eps: float
    density: tuple
    max_jump: float = 0.0

    @property
    def all_pass(self) -> bool:
        return self.cond_a and self.cond_b and self.cond_c

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["density"] = list(self.density)
        out["all_pass"] = self.all_pass
        return out


def condition_c_lhs(delta, sup_grad_T: float, sup_d3: float, h: float):
    return 0.5 * np.asarray(delta) * sup_grad_T**2 + np.sqrt(2) / h * sup_d3


def estimate_constant(delta, sup_grad_T: float, sup_d3: float, h: float):
    """``min(2 - delta h^2/2 |grad_T|^2 - sqrt(2) h |d3|, (2 delta - 1)/delta)``."""
    delta = np.asarray(delta, dtype=float)
    bracket = 2 - 0.5 * delta * h**2 * sup_grad_T**2 - np.sqrt(2) * h * sup_d3
    return np.minimum(bracket, (2 * delta - 1) / delta)


def check_conditions(
    m: MaterialProfile,
    sample_density=64,
    delta_search=(0.5, 100.0, 200),
    *,
    tol: float = 1e-12,
    margin: float = 1e-8,
) -> ConditionReport:
    """Sampled check of the non-trapping conditions.

    Args:
        m: profile with gradient access.
        sample_density: samples per axis (int or 3-tuple).
        delta_search: ``(lo, hi, count)`` log grid for ``delta`` in ``(lo, hi]``.
        tol: allowed positive excess of ``d inv_eps / d x3`` for (a).
        margin: (b) requires ``d inv_eps / d x3 < -margin`` on a ball.
    """
    if np.isscalar(sample_density):
        sample_density = (int(sample_density),) * 3
    X1, X2, X3 = sample_grid(m, sample_density)
    g1, g2, g3 = m.grad(X1, X2, X3)
    vals = m.inv_eps(X1, X2, X3)
    sup_T = float(np.sqrt(np.max(g1**2 + g2**2)))
    sup_3 = float(np.max(np.abs(g3)))
    max_d3 = float(np.max(g3))
    # a jump in x3 is an unbounded vertical derivative of the jump's sign
    jumps = _vertical_jumps(m, X1[:, :, 0], X2[:, :, 0])
    max_jump = float(np.max(np.abs(jumps))) if jumps.size else 0.0
    # allow for the continuous change over the probing interval
    jump_tol = 1e-7 * max(1.0, float(np.max(np.abs(vals)))) + 4e-9 * m.h * sup_3
    if max_jump > jump_tol:
        sup_3 = float("inf")
        if np.max(jumps) > jump_tol:
            max_d3 = float("inf")

    neg = g3 < -margin
    spacing = (2 * np.pi / sample_density[0], 2 * np.pi / sample_density[1], m.h / sample_density[2])
    padded = np.pad(neg, 1, constant_values=False)
    dist = ndimage.distance_transform_edt(padded, sampling=spacing)[1:-1, 1:-1, 1:-1]
    center, radius = None, 0.0
    if dist.max() > 0:
        i = np.unravel_index(np.argmax(dist), dist.shape)
        # distance to the nearest non-negative sample, less one sample step
        radius = float(max(dist[i] - max(spacing), 0.0))
        center = [float(X1[i]), float(X2[i]), float(X3[i])]
    cond_b = radius > 0

    lo, hi, count = delta_search
    deltas = np.geomspace(lo, hi, int(count) + 1)[1:]
    lhs = condition_c_lhs(deltas, sup_T, sup_3, m.h)
    rhs = 2 / m.h**2
    ok = lhs < rhs
    if np.any(ok):
        consts = np.where(ok, estimate_constant(deltas, sup_T, sup_3, m.h), -np.inf)
        j = int(np.argmax(consts))
        best_delta, lhs_c, const = float(deltas[j]), float(lhs[j]), float(consts[j])
    else:
        best_delta, lhs_c, const = None, float(lhs.min()), float("nan")
    return ConditionReport(
        cond_a=max_d3 <= tol,
        max_d3=max_d3,
        cond_b=cond_b,
        ball_center=center,
        ball_radius=radius,
        cond_c=bool(np.any(ok)),
        best_delta=best_delta,
        lhs_c=lhs_c,
        rhs_c=rhs,
        estimate_constant=const,
        sup_grad_T=sup_T,
        sup_d3=sup_3,
        min_inv_eps=float(vals.min()),
        max_inv_eps=float(vals.max()),
        density=tuple(sample_density),
        max_jump=max_jump,
    )


def _vertical_jumps(m: MaterialProfile, x1, x2, rel_step: float = 1e-9) -> np.ndarray:
    """``inv_eps(x3+) - inv_eps(x3-)`` across each interior breakpoint, on a lateral grid."""
    out = []
    eps = rel_step * m.h
    for z in m.breakpoints:
        if eps < z < m.h - eps:
            out.append(m.inv_eps(x1, x2, np.full_like(x1, z + eps)) - m.inv_eps(x1, x2, np.full_like(x1, z - eps)))
    return np.array(out)


# ---------------------------------------------------------------------------
# slices for assembly


def fourier_slices(m: MaterialProfile, lattice: ModeLattice, x3_points, kind: str = "inv_eps") -> np.ndarray:
    """Per-difference-mode slices ``f_{n-m}(x3)`` reachable from ``lattice``.

    Returns ``(len(x3), 4N+1, 4N+1)`` with difference ``j`` at ``j + 2N``.
    """
    z = np.atleast_1d(np.asarray(x3_points, dtype=float))
    if np.any(z < 0) or np.any(z > m.h):
        raise ValueError("x3 points must lie in [0, h]")
    return m.slices(2 * lattice.truncation_order, z, kind)


def coupling_matrices(slices: np.ndarray, lattice: ModeLattice) -> np.ndarray:
    """Expands slices into ``(nz, nmodes, nmodes)`` with ``[q, i, j] = f_{n_i - n_j}``."""
    J = (slices.shape[1] - 1) // 2
    diff = lattice.modes[:, None, :] - lattice.modes[None, :, :]
    return slices[:, diff[..., 0] + J, diff[..., 1] + J]

