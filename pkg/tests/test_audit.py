import json
import math

import numpy as np
import pytest
from conftest import randers_torus

from finsler_audit import audit, calculus, mesh
from finsler_audit.errors import HypothesisUnverified, NotPositive, OverflowRange


def test_report_sign_convention():
    r = audit._report("demo", "s", 1.0, 3.0, 0.0, 0.0)
    assert r.margin == 2.0 and r.passed
    r = audit._report("demo", "s", 3.0, 1.0, 1.5, 0.0)
    assert r.margin == -2.0 and not r.passed
    r = audit._report("demo", "s", 3.0, 1.0, 2.0, 0.0)
    assert r.passed
    with pytest.raises(ValueError):
        audit._report("demo", "s", 0.0, 0.0, -1.0, 0.0)


def test_report_serializes_non_finite_values():
    r = audit._report("demo", "s", 1.0, math.inf, 0.0, 0.0, details={"arr": np.array([1.0, np.nan])})
    d = r.to_dict()
    json.dumps(d, allow_nan=False)
    assert d["rhs"] == "inf" and d["details"]["arr"] == [1.0, "nan"] and d["divergent"]
    assert r.csv_row()[3] == "inf"


def test_error_report_fails():
    r = audit.error_report("poincare", "s", ValueError("boom"))
    assert not r.passed and r.details["message"] == "boom"


def test_certification(gaussian_line):
    assert audit.certify(gaussian_line, 1.0) == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(HypothesisUnverified):
        audit.certify(gaussian_line, 1.01)


def test_plain_bochner_implied_by_improved(sphere):
    u = np.cos(sphere.points[..., 0])
    region = calculus.regular_region(sphere, u, 0.2)
    plain = audit.check_bochner_pointwise(sphere, u, 1.0, "plain", region=region)
    improved = audit.check_bochner_pointwise(sphere, u, 1.0, "improved", region=region)
    assert plain.claim == "bochner_inf" and improved.claim == "improved_bochner"
    assert plain.worst_node_margin >= improved.worst_node_margin - 1e-12
    assert improved.details["forms_agree"]


def test_bochner_rejects_uncertified_K(sphere):
    with pytest.raises(HypothesisUnverified):
        audit.check_bochner_pointwise(sphere, np.cos(sphere.points[..., 0]), 1.5)


def test_test_function_must_vanish_on_collar(gaussian_line):
    x = gaussian_line.points[..., 0]
    with pytest.raises(ValueError, match="collar"):
        audit.check_bochner_integrated(gaussian_line, x, np.ones_like(x), 1.0)
    with pytest.raises(ValueError, match="nonnegative"):
        audit.check_bochner_integrated(gaussian_line, x, -np.exp(-x * x), 1.0)


def test_poincare_on_first_mode(sphere):
    r = audit.check_poincare(sphere, np.cos(sphere.points[..., 0]), 1.0)
    assert r.details["variance"] == pytest.approx(1 / 3, rel=1e-3)
    assert r.rhs == pytest.approx(2 / 3, rel=1e-3)


def test_poincare_with_nonpositive_K(gaussian_line):
    with pytest.raises(HypothesisUnverified):
        audit.check_poincare(gaussian_line, gaussian_line.points[..., 0], 0.0)


def test_gamma2_scaling_on_torus():
    ctx = randers_torus(64)
    x, y = ctx.points[..., 0], ctx.points[..., 1]
    h = np.sin(x) + 0.5 * np.cos(y)
    r = audit.check_gamma2_scaling(ctx, h, 0.5, region=calculus.regular_region(ctx, h, 0.5))
    assert r.lhs < 2e-3
    with pytest.raises(OverflowRange):
        audit.check_gamma2_scaling(ctx, 400 * h, 1.0)


def test_entropy_condition_needs_positive_function(sphere):
    with pytest.raises(NotPositive):
        audit.check_entropy_condition(sphere, np.cos(sphere.points[..., 0]), 1.0)


def test_duality_reports():
    ctx = randers_torus(32)
    reps = audit.check_duality(ctx, samples=200, seed=1)
    assert [r.claim for r in reps] == ["legendre_roundtrip", "norm_preservation", "dual_tensor"]
    assert all(r.passed for r in reps)


@pytest.mark.parametrize("name", audit.IDENTITIES)
def test_identity_reports(torus64, name):
    x, y = torus64.points[..., 0], torus64.points[..., 1]
    u = np.sin(x) + 0.5 * np.cos(y)
    r = audit.check_identity(torus64, name, u, np.cos(x - y), np.sin(2 * x), tol=1e-2,
                             region=calculus.regular_region(torus64, u, 0.5))
    assert r.rhs == 0.0 and r.lhs >= 0 and r.passed


def test_unknown_identity(torus64):
    with pytest.raises(ValueError):
        audit.identity_residual(torus64, "nope", np.sin(torus64.points[..., 0]))


@pytest.fixture(scope="module")
def volume_line():
    chart, spec, m = mesh.make_gaussian_line(1.0, 4001, normalize=False)
    return calculus.make_context(spec, m)


def test_volume_bound_is_audit_only(volume_line):
    r = audit.check_volume_bound(volume_line, 2000, 2.0, 1.0, [0.05])
    assert r.audit_only and r.claim == "volume_bound"
    # vol - int_{a<|x|<R} x^2 e^{-x^2/2}, integrated by parts
    a, R = 0.05, 2.0
    exact = math.sqrt(2 * math.pi) * math.erf(a / math.sqrt(2)) + 2 * R * math.exp(-R * R / 2) \
        - 2 * a * math.exp(-a * a / 2)
    assert r.details["excess"] == pytest.approx(exact, rel=1e-5)
    d = audit.check_volume_bound(volume_line, 2000, 2.0, 1.0, [0.05], distributional=True)
    assert d.divergent and d.rhs == math.inf


def test_volume_bound_rejects_tiny_cutoff(volume_line):
    with pytest.raises(ValueError, match="r_min"):
        audit.check_volume_bound(volume_line, 2000, 2.0, 1.0, [1e-4])


def test_failing_margin_with_extra_condition():
    r = audit._report("demo", "s", 2.0, 1.0, 0.0, 0.0, extra_ok=True)
    assert not r.passed
    r = audit._report("demo", "s", 1.0, 2.0, 0.0, 0.0, extra_ok=False)
    assert not r.passed


@pytest.mark.parametrize("N", [801, 1601])
def test_equality_region_error_is_second_order(N):
    # in 1D the improved inequality is an identity, so the margin is pure discretisation error
    def worst(n):
        _, spec, m = mesh.make_gaussian_line(1.0, n)
        ctx = calculus.make_context(spec, m)
        return audit.check_bochner_pointwise(ctx, np.tanh(ctx.points[..., 0]), 1.0).worst_node_margin

    coarse, fine = worst(N), worst(2 * N - 1)
    assert fine < 0 and coarse / fine == pytest.approx(4.0, rel=0.05)
