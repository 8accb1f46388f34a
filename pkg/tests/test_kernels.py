"""Both kernel backends against each other and against scipy."""
import numpy as np
import pytest
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from finsler_audit import _kernels
from finsler_audit._kernels import _pykernels

try:
    from finsler_audit._kernels import _ckernels
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None

BACKENDS = [pytest.param(_pykernels, id="python"),
            pytest.param(_ckernels, id="cython",
                         marks=pytest.mark.skipif(_ckernels is None, reason="extension not built"))]


def _randers_batch(m, seed=0):
    rng = np.random.default_rng(seed)
    L = rng.normal(size=(m, 2, 2)) * 0.3 + np.eye(2)
    a = L @ np.swapaxes(L, 1, 2) + 0.2 * np.eye(2)
    ainv = np.linalg.inv(a)
    b = rng.normal(size=(m, 2))
    bn = np.sqrt(np.einsum("mi,mij,mj->m", b, ainv, b))
    b *= (rng.uniform(0.0, 0.9, m) / bn)[:, None]
    y = rng.normal(size=(m, 2))
    return a, b, y


@pytest.mark.parametrize("mod", BACKENDS)
def test_legendre_inverse(mod):
    a, b, y = _randers_batch(500)
    xi = _pykernels.randers_legendre(a, b, y)
    back, iters = mod.randers_legendre_inv(a, b, xi, 1e-14, 100)
    assert np.all(iters >= 0)
    assert np.allclose(back, y, rtol=1e-11, atol=1e-11)


def test_backends_agree_on_legendre_inverse():
    if _ckernels is None:
        pytest.skip("extension not built")
    a, b, y = _randers_batch(200, seed=3)
    xi = _pykernels.randers_legendre(a, b, y)
    yp, ip = _pykernels.randers_legendre_inv(a, b, xi)
    yc, ic = _ckernels.randers_legendre_inv(a, b, xi)
    assert np.allclose(yp, yc, rtol=1e-12, atol=1e-13)
    assert np.all(np.abs(ip - ic) <= 1)


def _spd(n, seed=1):
    rng = np.random.default_rng(seed)
    lap = sp.diags([-np.ones(n - 1), 2.0 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1])
    return (lap + sp.diags(rng.uniform(0.5, 2.0, n))).tocsr()


@pytest.mark.parametrize("mod", BACKENDS)
def test_pcg_matches_direct_solve(mod):
    A = _spd(300)
    rhs = np.random.default_rng(2).normal(size=300)
    x, iters, res = mod.pcg(A.indptr.astype(np.int64), A.indices.astype(np.int64), A.data, rhs,
                            np.zeros(300), 1e-12, 10_000)
    assert iters > 0
    assert np.allclose(x, spsolve(A.tocsc(), rhs), rtol=1e-9, atol=1e-10)


@pytest.mark.parametrize("mod", BACKENDS)
def test_pcg_reports_stall(mod):
    A = _spd(300)
    rhs = np.ones(300)
    _, iters, res = mod.pcg(A.indptr.astype(np.int64), A.indices.astype(np.int64), A.data, rhs,
                            np.zeros(300), 1e-14, 2)
    assert iters == -1 and res > 0


def test_backend_flag():
    assert _kernels.BACKEND in ("python", "cython")
    if _ckernels is not None:
        assert _kernels.BACKEND == "cython" or _kernels.pcg is _pykernels.pcg


def test_pure_fallback_selected_by_environment():
    import os
    import subprocess
    import sys

    code = "import finsler_audit; print(finsler_audit.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                         env={**os.environ, "FINSLER_AUDIT_PURE": "1"}, check=True)
    assert out.stdout.strip() == "python"
