import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from biperiodic.boundary import (
    RayleighWoodError,
    T_alpha_bound,
    apply_Q,
    apply_R_alpha_cross,
    apply_R_alpha_dot,
    apply_T_alpha,
    boundary_pairing,
    e3_cross,
    sobolev_norm,
)
from biperiodic.fourier import TraceCoefficients, build_lattice, cell_grid, synthesize_trace

CELL = 4 * np.pi**2


def single(lat, n, value):
    v = np.zeros((lat.size,) + np.shape(value), complex)
    v[lat.index(n)] = value
    return TraceCoefficients(lat, v)


def random_trace(rng, lat, shape=(3,)):
    return rng.normal(size=(lat.size,) + shape) + 1j * rng.normal(size=(lat.size,) + shape)


def test_T_alpha_examples():
    lat = build_lattice(2, (0, 0), 2.0)
    out = apply_T_alpha(single(lat, (1, 0), 1.0)).values
    assert out[lat.index((1, 0))] == pytest.approx(1j * np.sqrt(3), abs=1e-14)
    lat = build_lattice(2, (0, 0), 1.0)
    out = apply_T_alpha(single(lat, (2, 0), 0.7)).values
    assert out[lat.index((2, 0))] == pytest.approx(-np.sqrt(3) * 0.7, abs=1e-14)
    assert not np.any(apply_T_alpha(TraceCoefficients(lat, np.zeros(lat.size))).values)


@given(st.integers(0, 2**31 - 1), st.floats(0.2, 4.0))
def test_symbols_mode_by_mode(seed, k):
    rng = np.random.default_rng(seed)
    lat = build_lattice(2, tuple(rng.uniform(-0.5, 0.5, 2)), k)
    F = random_trace(rng, lat)
    cross = apply_R_alpha_cross(TraceCoefficients(lat, F)).values
    dot = apply_R_alpha_dot(TraceCoefficients(lat, F)).values
    for i in range(lat.size):
        r = lat.dtn_symbol[i]
        expect = 1j * np.array([r[1] * F[i, 2] - r[2] * F[i, 1], r[2] * F[i, 0] - r[0] * F[i, 2], r[0] * F[i, 1] - r[1] * F[i, 0]])
        np.testing.assert_allclose(cross[i], expect, rtol=0, atol=1e-14 * max(1, np.abs(expect).max()))
        assert abs(dot[i] - 1j * (r[0] * F[i, 0] + r[1] * F[i, 1] + r[2] * F[i, 2])) <= 1e-14 * max(1, abs(dot[i]))


def test_R_alpha_examples():
    lat = build_lattice(0, (0, 0), 1.0)
    out = apply_R_alpha_cross(TraceCoefficients(lat, np.array([[1.0, 0, 0]]))).values[0]
    np.testing.assert_allclose(out, [0, 1j, 0], atol=1e-15)
    lat = build_lattice(1, (0.2, 0.1), 1.3)
    parallel = lat.dtn_symbol * (1.5 - 0.5j)
    assert np.abs(apply_R_alpha_cross(TraceCoefficients(lat, parallel)).values).max() < 1e-14
    out = apply_R_alpha_dot(TraceCoefficients(lat, np.array([[1.0, 0, 0]] * lat.size))).values
    np.testing.assert_allclose(out, 1j * lat.kappa[:, 0], atol=1e-15)
    F = np.zeros((lat.size, 3), complex)
    F[:, 0], F[:, 1] = -lat.kappa[:, 1], lat.kappa[:, 0]  # r . F = 0 for every mode
    assert np.abs(apply_R_alpha_dot(TraceCoefficients(lat, F)).values).max() < 1e-14


def _spectral_derivative(grid, axis, alpha_component):
    R = grid.shape[-1]
    freq = np.fft.fftfreq(R, 1.0 / R)
    k = freq[:, None] if axis == 0 else freq[None, :]
    return np.fft.ifft2(1j * (k + alpha_component) * np.fft.fft2(grid, axes=(-2, -1)), axes=(-2, -1))


def test_R_alpha_against_grid_operators(rng):
    alpha = (0.3, -0.1)
    lat = build_lattice(2, alpha, 1.7)
    F = random_trace(rng, lat)
    R = 16
    grid = synthesize_trace(TraceCoefficients(lat, F), R)  # (3, R, R)
    T_grid = synthesize_trace(apply_T_alpha(TraceCoefficients(lat, F)), R)
    d1 = _spectral_derivative(grid, 0, alpha[0])
    d2 = _spectral_derivative(grid, 1, alpha[1])
    op = np.stack([d1, d2, T_grid])  # (3 operator comps, 3 field comps, R, R)
    cross = np.stack(
        [op[1, 2] - op[2, 1], op[2, 0] - op[0, 2], op[0, 1] - op[1, 0]]
    )
    dot = op[0, 0] + op[1, 1] + op[2, 2]
    ref_cross = synthesize_trace(apply_R_alpha_cross(TraceCoefficients(lat, F)), R)
    ref_dot = synthesize_trace(apply_R_alpha_dot(TraceCoefficients(lat, F)), R)
    np.testing.assert_allclose(cross, ref_cross, atol=1e-10)
    np.testing.assert_allclose(dot, ref_dot, atol=1e-10)


def test_Q_examples():
    lat = build_lattice(0, (0, 0), 1.0)
    out = apply_Q(TraceCoefficients(lat, np.array([[1.0, 0, 0]], complex))).values[0]
    np.testing.assert_allclose(out, [1j, 0, 0], atol=1e-15)
    lat = build_lattice(1, (0.1, 0.2), 1.7)
    F = np.zeros((lat.size, 3), complex)
    F[:, 2] = 1.0
    np.testing.assert_allclose(apply_Q(TraceCoefficients(lat, F)).values, 0, atol=1e-15)


@given(st.integers(0, 2**31 - 1))
def test_Q_symbol(seed):
    rng = np.random.default_rng(seed)
    lat = build_lattice(1, tuple(rng.uniform(-0.4, 0.4, 2)), float(rng.uniform(0.3, 3.0)))
    F = random_trace(rng, lat)
    out = apply_Q(TraceCoefficients(lat, F)).values
    for i in range(lat.size):
        kap = np.array([*lat.kappa[i], 0.0])
        FT = np.array([F[i, 0], F[i, 1], 0])
        expect = -(lat.wavenumber**2 * FT - (kap @ F[i]) * kap) / (1j * lat.beta[i])
        np.testing.assert_allclose(out[i], expect, rtol=1e-14, atol=1e-14)


def test_Q_rejects_threshold():
    lat = build_lattice(1, (0, 0), 1.0)
    with pytest.raises(RayleighWoodError):
        apply_Q(TraceCoefficients(lat, np.ones((lat.size, 3), complex)))


@given(st.integers(0, 2**31 - 1), st.floats(0.2, 4.0))
def test_boundary_form_sign_structure(seed, k):
    """For traces with ``R_alpha . H = 0`` the form splits by propagating/evanescent modes."""
    rng = np.random.default_rng(seed)
    lat = build_lattice(2, tuple(rng.uniform(-0.45, 0.45, 2)), k)
    if np.min(np.abs(lat.beta)) < 1e-6:
        return
    H = random_trace(rng, lat)
    H[:, 2] = -np.sum(lat.kappa * H[:, :2], axis=1) / lat.beta
    tr = TraceCoefficients(lat, H)
    assert np.abs(apply_R_alpha_dot(tr).values).max() < 1e-10 * np.abs(H).max()
    form = boundary_pairing(TraceCoefficients(lat, e3_cross(apply_R_alpha_cross(tr).values)), tr)
    b = lat.beta
    im = -CELL * np.sum(b.real * np.sum(np.abs(H) ** 2, axis=1))
    re = CELL * np.sum(np.imag(np.conj(b)) * np.abs(H[:, 2]) ** 2 + b.imag * np.sum(np.abs(H[:, :2]) ** 2, axis=1))
    scale = CELL * np.sum(np.abs(b)[:, None] * np.abs(H) ** 2)
    assert form.imag <= 1e-12 * scale
    assert abs(form.imag - im) <= 1e-12 * scale
    assert abs(form.real - re) <= 1e-12 * scale


def test_T_alpha_boundedness(rng):
    for k in (0.5, 2.3, 4.0):
        lat = build_lattice(3, (0.2, 0.3), k)
        C = T_alpha_bound(lat)
        for _ in range(20):
            f = TraceCoefficients(lat, random_trace(rng, lat, ()))
            assert sobolev_norm(apply_T_alpha(f), -0.5) <= C * sobolev_norm(f, 0.5) * (1 + 1e-12)
