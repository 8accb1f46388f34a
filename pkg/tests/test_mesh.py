import math

import numpy as np
import pytest

from finsler_audit import mesh


def _deriv_error(chart, f, df):
    x = chart.points[..., 0]
    return float(np.max(np.abs(chart.derivative(f(x)) - df(x))))


def test_periodic_stencil_is_fourth_order():
    errs = [_deriv_error(mesh.periodic_box([2 * math.pi], [n]), np.sin, np.cos) for n in (32, 64)]
    assert errs[0] / errs[1] == pytest.approx(16, rel=0.05)


def test_interval_stencil_is_second_order_with_closure():
    errs = [_deriv_error(mesh.weighted_interval(0.0, 2.0, n), np.exp, np.exp) for n in (64, 128)]
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_second_derivative_periodic_2d():
    chart = mesh.periodic_box([2 * math.pi, 2 * math.pi], [64, 48])
    x, y = chart.points[..., 0], chart.points[..., 1]
    f = np.sin(x) * np.cos(2 * y)
    hess = mesh.partial_derivatives(chart, f, order=2)
    assert np.allclose(hess[..., 0, 0], -f, atol=1e-5)
    # 4th-order truncation on the coarser y axis is about 2e-4 for k = 2
    assert np.allclose(hess[..., 1, 1], -4 * f, atol=5e-4)
    assert np.allclose(hess[..., 0, 1], -2 * np.cos(x) * np.sin(2 * y), atol=5e-4)


def test_parity_extension_on_cell_centred_interval():
    chart = mesh.weighted_interval(0.0, math.pi, 128)
    x = chart.points[..., 0]
    # cos is even at both ends of [0, pi]: the reflected stencil keeps the
    # interior truncation h^2/6 max|f'''| all the way to the edge
    h = chart.spacing[0]
    err = np.abs(chart.derivative(np.cos(x), parity="even") + np.sin(x))
    assert err.max() < 1.05 * h * h / 6
    assert err[0] < 1e-5 and err[-1] < 1e-5


def test_quadrature_rules():
    line = mesh.truncated_line(1.0, 101)
    lin = mesh.lebesgue(line, normalize=False)
    assert mesh.integrate(line.points[..., 0] ** 2, lin) == pytest.approx(2 / 3, rel=1e-3)
    box = mesh.periodic_box([2 * math.pi] * 2, [32, 32])
    m = mesh.lebesgue(box, normalize=False)
    assert mesh.integrate(np.sin(box.points[..., 0]) ** 2, m) == pytest.approx(2 * math.pi**2, rel=1e-12)


def test_normalized_measures_have_unit_mass():
    chart, _, m = mesh.make_gaussian_line(1.0, 801)
    assert m.mass() == pytest.approx(1.0, abs=1e-14)
    _, _, s = mesh.make_sphere_reduction(128)
    assert s.mass() == pytest.approx(1.0, abs=1e-14)


def test_gaussian_analytic_gradient():
    chart, _, m = mesh.make_gaussian_line(2.0, 801)
    assert np.allclose(m.grad_log_density()[..., 0], -2.0 * chart.points[..., 0])


def test_tail_tolerance_enforced():
    with pytest.raises(ValueError, match="tail mass"):
        mesh.make_gaussian_line(1.0, 401, half_width=3.0)


@pytest.mark.parametrize("bad", [dict(lengths=[1.0], resolution=[8]), dict(lengths=[-1.0], resolution=[32])])
def test_bad_boxes_rejected(bad):
    with pytest.raises(ValueError):
        mesh.periodic_box(**bad)


def test_sphere_nodes_avoid_poles():
    chart, _, m = mesh.make_sphere_reduction(64)
    th = chart.points[..., 0]
    assert th.min() > 0 and th.max() < math.pi
    assert chart.meta["ambient_ricci"] == 1.0
    with pytest.raises(ValueError):
        mesh.make_sphere_reduction(32)


def test_collar_mask():
    chart = mesh.truncated_line(1.0, 50)
    mask = chart.collar_mask(3)
    assert mask.sum() == 44 and not mask[:3].any() and not mask[-3:].any()
    assert mesh.periodic_box([1.0], [32]).collar_mask(3).all()


def test_field_csv_round_trip(tmp_path):
    chart = mesh.periodic_box([1.0, 2.0], [16, 20])
    vals = np.sin(chart.points[..., 0]) + chart.points[..., 1]
    path = tmp_path / "f.csv"
    mesh.write_field_csv(path, chart, "u", vals)
    header, pts, back = mesh.read_field_csv(path)
    assert header["field"] == "u" and header["shape"] == "16x20"
    assert np.array_equal(back, vals) and np.array_equal(pts, chart.points)
