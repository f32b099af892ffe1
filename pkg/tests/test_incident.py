import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from biperiodic.incident import (
    CombinedIncidentField,
    eval_curl_alpha_Hir,
    eval_Hir_alpha,
    make_source,
    reflect,
    source_from_angles,
)

sources = st.builds(
    source_from_angles,
    st.floats(0.2, 5.0),
    st.floats(0.0, 1.4),
    st.floats(-np.pi, np.pi),
    st.floats(-np.pi, np.pi),
)
points = st.tuples(st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi), st.floats(0, 2.0))


def test_make_source_examples():
    s = make_source((0, 0, -1), (1, 0, 0), 1.0)
    np.testing.assert_allclose(s.q, [0, 1, 0])
    s = make_source((0, 0, -1), (0, 1, 0), 1.0)
    np.testing.assert_allclose(s.q, [-1, 0, 0])
    assert s.k == 1.0
    np.testing.assert_array_equal(s.alpha, [0, 0])


@pytest.mark.parametrize(
    "d, p, omega",
    [
        ((0, 0, -1), (0, 0, -1), 1.0),  # p parallel to d
        ((0, 0, -2), (1, 0, 0), 1.0),  # dispersion relation
        ((0, 0, 1), (1, 0, 0), 1.0),  # upward
        ((0, 0, -1), (1, 0, 0), -1.0),
    ],
)
def test_make_source_rejects(d, p, omega):
    with pytest.raises(ValueError):
        make_source(d, p, omega)


@given(sources)
def test_source_invariants(s):
    assert abs(s.d @ s.d - s.omega**2 * s.eps0 * s.mu0) <= 1e-12 * s.k**2
    assert abs(s.p @ s.d) <= 1e-12 * s.k
    np.testing.assert_array_equal(s.q, np.cross(s.p, s.d) / (s.omega * s.eps0))


def test_normal_incidence_value():
    f = CombinedIncidentField(make_source((0, 0, -1), (1, 0, 0), 1.0))
    np.testing.assert_allclose(eval_Hir_alpha(f, np.zeros(3)), [2, 0, 0])


@given(sources, points)
def test_plate_conditions_and_periodicity(s, x):
    f = CombinedIncidentField(s)
    x = np.array(x)
    plate = x.copy()
    plate[2] = 0
    assert abs(f.H(plate)[2]) <= 1e-12 * np.linalg.norm(s.p)
    E = f.E(plate)
    assert np.hypot(abs(E[0]), abs(E[1])) <= 1e-12 * max(1, np.linalg.norm(s.q))
    curl = eval_curl_alpha_Hir(f, plate)
    assert np.hypot(abs(curl[0]), abs(curl[1])) <= 1e-12 * max(1, s.k * np.linalg.norm(s.p))
    shifted = x + [2 * np.pi, 0, 0]
    np.testing.assert_allclose(eval_Hir_alpha(f, shifted), eval_Hir_alpha(f, x), atol=1e-13)
    shifted = x + [0, 2 * np.pi, 0]
    np.testing.assert_allclose(eval_Hir_alpha(f, shifted), eval_Hir_alpha(f, x), atol=1e-13)


def _fd_jacobian(fun, x, step=1e-4):
    """``J[i, j] = d fun_i / d x_j`` by central differences."""
    cols = []
    for j in range(3):
        e = np.zeros(3)
        e[j] = step
        cols.append((fun(x + e) - fun(x - e)) / (2 * step))
    return np.stack(cols, axis=1)


def _fd_curl_alpha(fun, alpha3, x):
    J = _fd_jacobian(fun, x)
    curl = np.array([J[2, 1] - J[1, 2], J[0, 2] - J[2, 0], J[1, 0] - J[0, 1]])
    return curl + 1j * np.cross(alpha3, fun(x))


@given(sources, points)
def test_curl_matches_finite_differences(s, x):
    f = CombinedIncidentField(s)
    alpha3 = np.array([*s.alpha, 0])
    x = np.array(x)
    fd = _fd_curl_alpha(f.H_alpha, alpha3, x)
    scale = s.k * np.linalg.norm(s.p)
    assert np.abs(fd - eval_curl_alpha_Hir(f, x)).max() <= 1e-7 * max(1, scale) * max(1, s.k**2)


@given(sources, points)
def test_vector_helmholtz_and_divergence(s, x):
    f = CombinedIncidentField(s)
    alpha3 = np.array([*s.alpha, 0])
    x = np.array(x)
    curlcurl = _fd_curl_alpha(f.curl_alpha_H, alpha3, x)
    scale = max(1, s.k**2) * max(1, np.linalg.norm(s.p))
    assert np.abs(curlcurl - s.k**2 * f.H_alpha(x)).max() <= 1e-6 * scale * max(1, s.k**2)
    # analytic divergence: i d.p e^{i d.x} + i d~.p~ e^{i d~.x}, phase-shifted
    ph = np.exp(-1j * alpha3 @ x)
    div = 1j * (s.d @ s.p) * np.exp(1j * s.d @ x) + 1j * (reflect(s.d) @ reflect(s.p)) * np.exp(1j * reflect(s.d) @ x)
    assert abs(div * ph) <= 1e-12 * scale
    J = _fd_jacobian(f.H_alpha, x)
    fd_div = np.trace(J) + 1j * alpha3 @ f.H_alpha(x)
    assert abs(fd_div) <= 1e-7 * scale * max(1, s.k**2)


def test_zero_polarisation_gives_zero_field():
    f = CombinedIncidentField(make_source((0.6, 0, -0.8), (0, 0, 0), 1.0))
    x = np.array([[0.1, 0.2, 0.3], [1.0, 2.0, 0.0]])
    assert not np.any(f.H_alpha(x))
    assert not np.any(f.curl_alpha_H(x))
