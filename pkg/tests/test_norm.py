import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finsler_audit import norm
from finsler_audit.errors import NotConvex

ANISO = np.array([[2.0, 0.3], [0.3, 0.5]])


def spatial_randers():
    return norm.randers(lambda x: np.stack([0.4 * np.cos(x[..., 1]), 0.3 * np.sin(x[..., 0])], axis=-1), 2,
                        lambda x: np.broadcast_to(ANISO, x.shape[:-1] + (2, 2)) * (1 + 0.2 * np.sin(x[..., :1, None])))


SPECS = {
    "euclidean": norm.euclidean(2),
    "riemannian": norm.riemannian(ANISO, 2),
    "randers": norm.randers(np.array([0.5, 0.0]), 2),
    "randers-spatial": spatial_randers(),
}

vec = st.tuples(st.floats(-3, 3), st.floats(-3, 3)).filter(lambda v: np.hypot(*v) > 0.05)
pt = st.tuples(st.floats(-4, 4), st.floats(-4, 4))


@pytest.mark.parametrize("name", sorted(SPECS))
@given(x=pt, y=vec, lam=st.floats(0.01, 50))
@settings(max_examples=60, deadline=None)
def test_positive_homogeneity(name, x, y, lam):
    spec = SPECS[name]
    x, y = np.array(x), np.array(y)
    assert spec(x, lam * y) == pytest.approx(lam * spec(x, y), rel=1e-12)
    assert spec(x, y) > 0


@pytest.mark.parametrize("name", sorted(SPECS))
@given(x=pt, y=vec)
@settings(max_examples=60, deadline=None)
def test_legendre_round_trip_and_dual_norm(name, x, y):
    spec = SPECS[name]
    x, y = np.array(x), np.array(y)
    xi = norm.legendre(spec, x, y)
    back = norm.legendre_inv(spec, x, xi)
    assert np.allclose(back, y, rtol=1e-10, atol=1e-10)
    assert norm.dual_norm(spec, x, xi) == pytest.approx(spec(x, y), rel=1e-10)
    # Euler: xi(y) = F(y)^2
    assert xi @ y == pytest.approx(spec(x, y) ** 2, rel=1e-10)


@pytest.mark.parametrize("name", sorted(SPECS))
def test_dual_tensor_is_inverse(name):
    rng = np.random.default_rng(4)
    spec = SPECS[name]
    for _ in range(20):
        x, y = rng.uniform(-3, 3, 2), rng.normal(size=2)
        assert norm.check_dual_tensor(spec, x, y) < 1e-5


def test_randers_tensor_matches_finite_differences():
    spec = SPECS["randers-spatial"]
    wrapped = norm.as_custom(spec)
    rng = np.random.default_rng(1)
    x, y = rng.uniform(-2, 2, (10, 2)), rng.normal(size=(10, 2))
    assert np.allclose(norm.fundamental_tensor(spec, x, y), norm.fundamental_tensor(wrapped, x, y), atol=1e-6)
    assert np.allclose(norm.legendre(spec, x, y), norm.legendre(wrapped, x, y), atol=1e-7)


def test_custom_norm_duality():
    # l^4 norm smoothed by a Euclidean part, strongly convex and non-quadratic
    spec = norm.custom(lambda x, y: (np.sum(y**4, axis=-1) + np.sum(y**2, axis=-1) ** 2) ** 0.25, 2,
                       x_independent=True)
    rng = np.random.default_rng(2)
    x, y = np.zeros((25, 2)), rng.normal(size=(25, 2))
    xi = norm.legendre(spec, x, y)
    assert np.allclose(norm.legendre_inv(spec, x, xi), y, atol=1e-7)
    assert np.allclose(norm.dual_norm(spec, x, xi), spec(x, y), rtol=1e-7)


def test_zero_covector_maps_to_zero():
    spec = SPECS["randers"]
    assert np.array_equal(norm.legendre_inv(spec, np.zeros(2), np.zeros(2)), np.zeros(2))


def test_randers_is_not_reversible():
    spec = SPECS["randers"]
    y = np.array([1.0, 0.0])
    assert spec(np.zeros(2), y) == pytest.approx(1.5)
    assert spec(np.zeros(2), -y) == pytest.approx(0.5)
    assert norm.reversibility_constant(spec, np.zeros((1, 2))) == pytest.approx(3.0, rel=1e-3)
    assert spec.reversed()(np.zeros(2), y) == pytest.approx(0.5)


def test_randers_dual_norm_closed_form():
    # for a = I, b: F*(xi) solves the quadratic dual of the Zermelo data
    spec = norm.randers(np.array([0.5, 0.0]), 2)
    xi = np.array([1.0, 0.0])
    # the maximizer of xi(y) over F(y) = 1 lies on the x-axis: y = (1/1.5, 0)
    assert norm.dual_norm(spec, np.zeros(2), xi) == pytest.approx(1 / 1.5, rel=1e-12)


def test_long_one_form_rejected():
    spec = norm.randers(np.array([1.0, 0.0]), 2)
    with pytest.raises(NotConvex):
        spec.validate(np.zeros((3, 2)))


def test_indefinite_metric_rejected():
    spec = norm.riemannian(np.array([[1.0, 0.0], [0.0, -1.0]]), 2)
    with pytest.raises(NotConvex):
        spec.validate(np.zeros((1, 2)))


def test_indicatrix_vectors_have_unit_length():
    spec = SPECS["randers-spatial"]
    x = np.array([0.3, -1.2])
    v = norm.indicatrix_directions(spec, x, 12)
    assert np.allclose(spec(np.broadcast_to(x, v.shape), v), 1.0)


def test_inv_small_matches_numpy():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(5, 2, 2)) + 3 * np.eye(2)
    assert np.allclose(norm.inv_small(a), np.linalg.inv(a))
    assert np.allclose(norm.inv_small(np.full((3, 1, 1), 4.0)), 0.25)
