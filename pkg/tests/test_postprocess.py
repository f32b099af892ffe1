import numpy as np
import pytest

from biperiodic import material as mat
from biperiodic.discretization import DiscreteField, assemble_system, build_mesh
from biperiodic.fourier import TraceCoefficients, analyze_trace, build_lattice
from biperiodic.incident import make_source, source_from_angles
from biperiodic.oracle import layered_from_material, layered_solve
from biperiodic.postprocess import (
    GridSpec,
    energy_report,
    evaluate_field,
    field_export,
    propagating_flux,
    rayleigh_coefficients,
)
from biperiodic.solver import solve


def _solve(m, s, N=1, M=64):
    lat = build_lattice(N, s.alpha, s.k)
    return solve(assemble_system(m, lat, build_mesh(m.h, M, m.breakpoints), None, s)).solution


def random_field(rng, lat, mesh):
    c = rng.normal(size=(lat.size, 3, mesh.M + 1)) + 1j * rng.normal(size=(lat.size, 3, mesh.M + 1))
    c[:, 2, 0] = 0
    return DiscreteField(lat, mesh, c)


def test_vacuum_balance_is_exactly_one():
    s = source_from_angles(2.2, 0.5, 0.3, 0.8)
    H = _solve(mat.constant_profile(), s)
    table = rayleigh_coefficients(H)
    assert not np.any(table.coefficients.values)
    rep = energy_report(H, s)
    assert rep.balance == pytest.approx(1, abs=1e-15)


def test_layered_matches_oracle_per_mode(graded):
    s = source_from_angles(1.7, 0.4, 0.3, 0.6)
    H = _solve(graded, s)
    ref = layered_solve(layered_from_material(graded), s)
    table = rayleigh_coefficients(H)
    lat = H.lattice
    vals = table.coefficients.values
    specular = lat.index((0, 0))
    assert np.linalg.norm(vals[specular] - ref.scattered) <= 1e-3 * np.linalg.norm(ref.scattered)
    assert np.abs(np.delete(vals, specular, axis=0)).max() == 0


def test_round_trip_of_known_expansion(rng):
    lat = build_lattice(2, (0.1, 0.3), 2.5)
    mesh = build_mesh(1.0, 6, ())
    H = random_field(rng, lat, mesh)
    np.testing.assert_array_equal(rayleigh_coefficients(H).coefficients.values, H.coeffs[:, :, -1])


def test_mode_classification():
    lat = build_lattice(1, (0, 0), 1.0)
    mesh = build_mesh(1.0, 4, ())
    table = rayleigh_coefficients(DiscreteField.zeros(lat, mesh))
    assert table.propagating[lat.index((0, 0))]
    for n in [(1, 0), (0, 1), (-1, 0), (0, -1)]:
        assert table.near_threshold[lat.index(n)] and not table.propagating[lat.index(n)]
    assert not table.propagating[lat.index((1, 1))]
    d = table.to_dict()
    assert len(d["modes"]) == lat.size and d["k"] == 1.0


def test_evanescent_modes_carry_no_flux(rng):
    s = make_source((0, 0, -1.3), (1, 0, 0), 1.3)
    lat = build_lattice(2, s.alpha, s.k)
    H = random_field(rng, lat, build_mesh(1.0, 5, ()))
    rep = energy_report(H, s)
    # only (0,0), (+-1,0) and (0,+-1) propagate at k = 1.3
    assert sorted(r.mode for r in rep.rows) == sorted([(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)])
    assert all(r.flux >= 0 for r in rep.rows)
    # wiping the evanescent coefficients leaves the propagating flux unchanged
    before = propagating_flux(H)
    c = H.coeffs.copy()
    c[~lat.propagating] = 0
    assert propagating_flux(DiscreteField(lat, H.mesh, c)) == pytest.approx(before, rel=1e-14)


@pytest.mark.parametrize("name", ["slab", "graded"])
def test_energy_balance_layered(name, request):
    m = request.getfixturevalue(name)
    for s in (make_source((0, 0, -1), (1, 0, 0), 1.0), source_from_angles(2.0, 0.3, 0.2, 0.4), source_from_angles(1.7, 0.4, 0.3, 0.6)):
        rep = energy_report(_solve(m, s), s)
        assert abs(rep.balance - 1) <= 1e-3


def test_field_export_zero_and_single_mode():
    lat = build_lattice(1, (0.2, -0.1), 1.0)
    mesh = build_mesh(1.0, 4, ())
    grid = GridSpec(8, np.linspace(0, 1, 5))
    assert not np.any(field_export(DiscreteField.zeros(lat, mesh), grid))
    c = np.zeros((lat.size, 3, mesh.M + 1), complex)
    c[lat.index((1, 0)), 1, :] = 2.0 - 1j
    out = field_export(DiscreteField(lat, mesh, c), grid)  # (R, R, nz, 3)
    x = 2 * np.pi * np.arange(8) / 8
    dephase = np.exp(-1j * (0.2 * x[:, None] - 0.1 * x[None, :]))
    coeffs = analyze_trace(out[:, :, 2, 1] * dephase, lat).values
    expected = np.zeros(lat.size, complex)
    expected[lat.index((1, 0))] = 2.0 - 1j
    np.testing.assert_allclose(coeffs, expected, atol=1e-14)


def test_field_export_matches_direct_evaluation(example_profile, rng):
    s = source_from_angles(1.4, 0.3, 0.5, 0.2)
    H = _solve(example_profile, s, N=1, M=16)
    R, z = 12, np.linspace(0, 1, 7)
    grid = field_export(H, GridSpec(R, z))
    idx = np.stack([rng.integers(0, R, 100), rng.integers(0, R, 100), rng.integers(0, z.size, 100)], axis=1)
    pts = np.stack([2 * np.pi * idx[:, 0] / R, 2 * np.pi * idx[:, 1] / R, z[idx[:, 2]]], axis=1)
    direct = evaluate_field(H, pts)
    np.testing.assert_allclose(grid[idx[:, 0], idx[:, 1], idx[:, 2]], direct, rtol=0, atol=1e-10)


def test_export_rejects_points_outside_the_cell():
    lat = build_lattice(1, (0, 0), 1.0)
    H = DiscreteField.zeros(lat, build_mesh(1.0, 4, ()))
    with pytest.raises(ValueError):
        field_export(H, GridSpec(8, [0.5, 1.5]))
    with pytest.raises(ValueError):
        evaluate_field(H, [[0.1, 0.1, -0.2]])
    with pytest.raises(ValueError):
        field_export(H, GridSpec(2, [0.5]))
