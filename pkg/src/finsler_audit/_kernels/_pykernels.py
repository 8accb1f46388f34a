"""Pure numpy implementations of the hot kernels.

These are the reference versions; ``_ckernels.pyx`` mirrors them loop for
loop.  Every function works on flat batches (leading axis = sample index).
"""
import numpy as np


def randers_tensor(a, b, y):
    """Closed-form fundamental tensor of F = sqrt(y.a.y) + b.y.

    ``a`` has shape (M, n, n), ``b`` and ``y`` shape (M, n).
    """
    ay = np.einsum("...ij,...j->...i", a, y)
    alpha = np.sqrt(np.einsum("...i,...i->...", ay, y))
    F = alpha + np.einsum("...i,...i->...", b, y)
    ell = ay / alpha[..., None]
    w = ell + b
    g = (F / alpha)[..., None, None] * (a - ell[..., :, None] * ell[..., None, :])
    return g + w[..., :, None] * w[..., None, :]


def randers_legendre(a, b, y):
    ay = np.einsum("...ij,...j->...i", a, y)
    alpha = np.sqrt(np.einsum("...i,...i->...", ay, y))
    F = alpha + np.einsum("...i,...i->...", b, y)
    return F[..., None] * (ay / alpha[..., None] + b)


def randers_legendre_inv(a, b, xi, tol=1e-14, maxiter=100):
    """Invert the Randers Legendre map by damped Newton iteration.

    The Jacobian of y -> g(y) y is g(y) itself (Euler homogeneity), so each
    step solves g(y) dy = L(y) - xi.  The start is the Riemannian inverse
    a^{-1} xi.  Returns ``(y, iterations)`` where iterations is -1 for every
    sample that failed to converge.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    xi = np.asarray(xi, dtype=float)
    y = np.linalg.solve(a, xi[..., None])[..., 0]
    scale = np.maximum(np.linalg.norm(xi, axis=-1), 1e-300)
    iters = np.full(xi.shape[0], -1, dtype=np.int64)
    active = np.arange(xi.shape[0])
    for it in range(maxiter + 1):
        aa, bb, yy, xx = a[active], b[active], y[active], xi[active]
        r = randers_legendre(aa, bb, yy) - xx
        rn = np.linalg.norm(r, axis=-1)
        done = rn <= tol * scale[active]
        iters[active[done]] = it
        keep = ~done
        active = active[keep]
        if active.size == 0 or it == maxiter:
            break
        aa, bb, yy, r, rn = aa[keep], bb[keep], yy[keep], r[keep], rn[keep]
        step = np.linalg.solve(randers_tensor(aa, bb, yy), r[..., None])[..., 0]
        t = np.ones(active.size)
        trial = yy - step
        for _ in range(40):
            bad = np.linalg.norm(randers_legendre(aa, bb, trial) - xi[active], axis=-1) >= rn
            # quadratic convergence near the root stalls at roundoff; accept then
            bad &= rn > 10 * tol * scale[active]
            if not bad.any():
                break
            t[bad] *= 0.5
            trial[bad] = yy[bad] - t[bad, None] * step[bad]
        y[active] = trial
    return y, iters


def pcg(indptr, indices, data, rhs, x0, tol=1e-12, maxiter=10000):
    """Jacobi-preconditioned conjugate gradients for a symmetric CSR matrix.

    Stops when ||r|| <= tol * ||rhs||.  Returns ``(x, iterations, residual)``;
    iterations is -1 when maxiter was exhausted.
    """
    n = rhs.shape[0]
    rows = np.repeat(np.arange(n), np.diff(indptr))
    diag = np.zeros(n)
    on_diag = rows == indices
    diag[rows[on_diag]] = data[on_diag]

    def matvec(v):
        return np.bincount(rows, weights=data * v[indices], minlength=n)

    x = np.array(x0, dtype=float, copy=True)
    r = rhs - matvec(x)
    target = tol * max(np.linalg.norm(rhs), 1e-300)
    rnorm = np.linalg.norm(r)
    if rnorm <= target:
        return x, 0, rnorm
    z = r / diag
    p = z.copy()
    rz = r @ z
    for k in range(1, maxiter + 1):
        q = matvec(p)
        alpha = rz / (p @ q)
        x += alpha * p
        r -= alpha * q
        rnorm = np.linalg.norm(r)
        if rnorm <= target:
            return x, k, rnorm
        z = r / diag
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x, -1, rnorm
