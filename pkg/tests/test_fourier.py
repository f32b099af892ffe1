import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from biperiodic.fourier import (
    AliasingError,
    TraceCoefficients,
    analyze_trace,
    build_lattice,
    cell_grid,
    phase_shift,
    synthesize_trace,
)

alphas = st.tuples(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))


def test_beta_examples():
    lat = build_lattice(1, (0, 0), 2.0)
    assert lat.beta[lat.index((1, 1))] == pytest.approx(np.sqrt(2))
    assert build_lattice(0, (0, 0), 1.0).beta[0] == 1.0
    lat = build_lattice(1, (0, 0), 1.0)
    assert lat.beta[lat.index((1, 0))] == 0.0


@given(st.integers(0, 3), alphas, st.floats(0.05, 6.0))
def test_lattice_invariants(N, alpha, k):
    lat = build_lattice(N, alpha, k)
    assert lat.size == (2 * N + 1) ** 2
    b = lat.beta
    assert np.all(b.real >= 0) and np.all(b.imag >= 0)
    assert np.all(b.real * b.imag == 0)
    np.testing.assert_allclose(b**2 + np.sum(lat.kappa**2, axis=1), k * k, atol=1e-12 * max(1, k * k) * 10)
    modes = {tuple(n) for n in lat.modes}
    assert (0, 0) in modes
    assert all((-a, -b_) in modes for a, b_ in modes)
    np.testing.assert_array_equal(lat.dtn_symbol[:, :2], lat.kappa)
    np.testing.assert_array_equal(lat.dtn_symbol[:, 2], lat.beta)


@pytest.mark.parametrize("k0", [1.0, np.sqrt(2.0), 2.0])
def test_branch_switch_at_threshold(k0):
    n = {1.0: (1, 0), np.sqrt(2.0): (1, 1), 2.0: (2, 0)}[k0]
    below = build_lattice(2, (0, 0), k0 - 1e-6)
    above = build_lattice(2, (0, 0), k0 + 1e-6)
    i = below.index(n)
    assert below.beta[i].real == 0 and below.beta[i].imag > 0
    assert above.beta[i].imag == 0 and above.beta[i].real > 0


@pytest.mark.parametrize("bad", [dict(k=0.0), dict(k=np.inf), dict(alpha=(np.nan, 0)), dict(N=-1)])
def test_lattice_rejects_bad_input(bad):
    args = dict(N=1, alpha=(0.0, 0.0), k=1.0) | bad
    with pytest.raises(ValueError):
        build_lattice(args["N"], args["alpha"], args["k"])


def test_analyze_single_mode_and_constant():
    lat = build_lattice(1, (0, 0), 1.0)
    x1, x2 = cell_grid(12)
    c = analyze_trace(np.exp(1j * x1), lat).values
    expected = np.zeros(lat.size)
    expected[lat.index((1, 0))] = 1
    np.testing.assert_allclose(c, expected, atol=1e-14)
    c = analyze_trace(np.ones((12, 12)), lat).values
    assert c[lat.index((0, 0))] == pytest.approx(1)
    assert np.sum(np.abs(c)) == pytest.approx(1)


def test_analyze_rejects_out_of_band_and_coarse_grids():
    lat = build_lattice(1, (0, 0), 1.0)
    x1, _ = cell_grid(16)
    with pytest.raises(AliasingError):
        analyze_trace(np.exp(2j * x1), lat)
    with pytest.raises(AliasingError):
        analyze_trace(np.ones((5, 5)), lat)


@given(st.integers(0, 3), st.integers(0, 3), st.integers(0, 2**31 - 1))
def test_round_trip(N, extra, seed):
    rng = np.random.default_rng(seed)
    lat = build_lattice(N, (0.1, -0.2), 1.0)
    R = 2 * (2 * N + 1) + extra
    vals = rng.normal(size=(lat.size, 3)) + 1j * rng.normal(size=(lat.size, 3))
    grid = synthesize_trace(TraceCoefficients(lat, vals), R)
    back = analyze_trace(grid, lat).values
    np.testing.assert_allclose(back, vals, atol=1e-12)
    np.testing.assert_allclose(synthesize_trace(TraceCoefficients(lat, back), R), grid, atol=1e-12)


def test_synthesize_trivial_cases():
    lat = build_lattice(1, (0, 0), 1.0)
    one = np.zeros(lat.size, complex)
    one[lat.index((0, 0))] = 2.5
    np.testing.assert_allclose(synthesize_trace(TraceCoefficients(lat, one), 8), 2.5)
    np.testing.assert_array_equal(synthesize_trace(TraceCoefficients(lat, np.zeros(lat.size)), 8), 0)


def test_phase_shift(rng):
    grid = rng.normal(size=(10, 10)) + 1j * rng.normal(size=(10, 10))
    np.testing.assert_array_equal(phase_shift(grid, (0, 0)), grid)
    x1, _ = cell_grid(10)
    np.testing.assert_allclose(phase_shift(np.ones((10, 10)), (1, 0)), np.exp(-1j * x1), atol=1e-15)
    back = phase_shift(phase_shift(grid, (0.3, -0.7)), (0.3, -0.7), "inverse")
    np.testing.assert_allclose(back, grid, atol=1e-14)
