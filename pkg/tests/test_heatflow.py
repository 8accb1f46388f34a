import math

import numpy as np
import pytest
from conftest import randers_torus

from finsler_audit import calculus, heatflow, mesh
from finsler_audit.errors import NotDensity, NotNormalized, TailNotResolved


@pytest.fixture(scope="module")
def sphere128():
    _, spec, m = mesh.make_sphere_reduction(128)
    return calculus.make_context(spec, m)


@pytest.fixture(scope="module")
def mode_run(sphere128):
    u0 = np.cos(sphere128.points[..., 0])
    return heatflow.solve_heat(sphere128, u0, 1.0, 1e-3, store_every=250)


def test_first_mode_decays_at_rate_two(sphere128, mode_run):
    th = sphere128.points[..., 0]
    assert heatflow.decay_rate(sphere128, mode_run) == pytest.approx(2.0, rel=1e-2)
    assert np.max(np.abs(mode_run.snapshots[500] - math.exp(-1.0) * np.cos(th))) < 5e-3
    assert sorted(mode_run.snapshots) == [0, 250, 500, 750, 1000]


def test_mass_and_energy(mode_run):
    assert mode_run.mass_drift() < 1e-12
    assert np.all(np.diff(mode_run.energy) < 0)
    assert mode_run.energy[0] == pytest.approx(1 / 3, rel=1e-3)


def test_phi_identities(mode_run):
    diag = heatflow.phi_diagnostics(mode_run)
    assert diag.passed
    assert diag.first_error < diag.tolerance and diag.second_error < diag.tolerance


def test_spectral_gap_sphere(sphere128):
    assert heatflow.spectral_gap(sphere128) == pytest.approx(2.0, rel=1e-3)


def test_randers_flow_conserves_mass():
    ctx = randers_torus(32)
    x, y = ctx.points[..., 0], ctx.points[..., 1]
    traj = heatflow.solve_heat(ctx, np.sin(x) + 0.5 * np.cos(y), 0.2, 1e-2, track_g=False)
    assert traj.mass_drift() < 1e-10
    assert np.all(np.diff(traj.energy) <= 1e-14)
    assert np.all(np.isnan(traj.g_integral))


def test_randers_flow_is_not_odd():
    ctx = randers_torus(32)
    u = np.sin(ctx.points[..., 0])
    a = heatflow.solve_heat(ctx, u, 0.1, 1e-2, track_g=False).final
    b = heatflow.solve_heat(ctx, -u, 0.1, 1e-2, track_g=False).final
    assert np.max(np.abs(a + b)) > 1e-4


def test_heat_step_matches_solver(sphere128):
    u0 = np.cos(sphere128.points[..., 0])
    one = heatflow.heat_step(sphere128, u0, 1e-3)
    traj = heatflow.solve_heat(sphere128, u0, 1e-3, 1e-3)
    assert np.allclose(one, traj.final, atol=1e-12)
    with pytest.raises(ValueError):
        heatflow.heat_step(sphere128, u0, 0.0)


def test_steps_must_divide_horizon(sphere128):
    with pytest.raises(ValueError):
        heatflow.solve_heat(sphere128, np.cos(sphere128.points[..., 0]), 1.0, 0.3)


def test_correction_needs_a_resolved_tail(sphere128, mode_run):
    with pytest.raises(TailNotResolved):
        heatflow.correction_integral(sphere128, mode_run)


def test_variance_and_entropy_guards():
    chart = mesh.truncated_line(2.0, 101)
    raw = mesh.lebesgue(chart, normalize=False)
    with pytest.raises(NotNormalized):
        heatflow.variance(raw, np.ones(101))
    m = mesh.lebesgue(chart)
    with pytest.raises(NotDensity):
        heatflow.entropy(m, 2 * np.ones(101))
    with pytest.raises(NotDensity):
        heatflow.entropy(m, np.linspace(-1, 3, 101))
    assert heatflow.entropy(m, np.ones(101)) == pytest.approx(0.0, abs=1e-14)


def test_trajectory_csv(tmp_path, mode_run):
    path = tmp_path / "heat.csv"
    mode_run.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,mass,energy,phi,g_integral"
    assert len(lines) == mode_run.times.size + 1


def test_nodal_and_weak_energy_agree(sphere128):
    u = np.cos(sphere128.points[..., 0]) ** 2
    assert heatflow.nodal_energy(sphere128, u) == pytest.approx(heatflow.energy(sphere128, u), rel=1e-3)
