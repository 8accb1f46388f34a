# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels in ``_pykernels``.

Only dimensions 1 and 2 are supported, which is all the charts provide.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()


cdef inline double _legendre2(double a00, double a01, double a11, double b0, double b1,
                              double y0, double y1, double *out0, double *out1) noexcept nogil:
    cdef double ay0 = a00 * y0 + a01 * y1
    cdef double ay1 = a01 * y0 + a11 * y1
    cdef double alpha = sqrt(ay0 * y0 + ay1 * y1)
    cdef double F = alpha + b0 * y0 + b1 * y1
    out0[0] = F * (ay0 / alpha + b0)
    out1[0] = F * (ay1 / alpha + b1)
    return alpha


cdef inline void _tensor2(double a00, double a01, double a11, double b0, double b1,
                          double y0, double y1, double *g00, double *g01, double *g11) noexcept nogil:
    cdef double ay0 = a00 * y0 + a01 * y1
    cdef double ay1 = a01 * y0 + a11 * y1
    cdef double alpha = sqrt(ay0 * y0 + ay1 * y1)
    cdef double F = alpha + b0 * y0 + b1 * y1
    cdef double l0 = ay0 / alpha
    cdef double l1 = ay1 / alpha
    cdef double s = F / alpha
    cdef double w0 = l0 + b0
    cdef double w1 = l1 + b1
    g00[0] = s * (a00 - l0 * l0) + w0 * w0
    g01[0] = s * (a01 - l0 * l1) + w0 * w1
    g11[0] = s * (a11 - l1 * l1) + w1 * w1


def randers_legendre_inv(a, b, xi, double tol=1e-14, int maxiter=100):
    cdef cnp.ndarray[double, ndim=3] A = np.ascontiguousarray(a, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] B = np.ascontiguousarray(b, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] X = np.ascontiguousarray(xi, dtype=np.float64)
    cdef Py_ssize_t m = X.shape[0], n = X.shape[1], k
    cdef cnp.ndarray[double, ndim=2] Y = np.empty((m, n), dtype=np.float64)
    cdef cnp.ndarray[long long, ndim=1] iters = np.full(m, -1, dtype=np.int64)
    cdef double a00, a01, a11, b0, b1, x0, x1, y0, y1, det, l0, l1, r0, r1, rn, rt
    cdef double g00, g01, g11, s0, s1, t, scale, t0, t1
    cdef int it, h
    if n == 1:
        with nogil:
            for k in range(m):
                # F(y) = sqrt(a)|y| + b y is linear on each half line
                a00 = sqrt(A[k, 0, 0])
                b0 = B[k, 0]
                x0 = X[k, 0]
                if x0 > 0:
                    Y[k, 0] = x0 / ((a00 + b0) * (a00 + b0))
                elif x0 < 0:
                    Y[k, 0] = x0 / ((a00 - b0) * (a00 - b0))
                else:
                    Y[k, 0] = 0.0
                iters[k] = 1
        return Y, iters
    with nogil:
        for k in range(m):
            a00 = A[k, 0, 0]; a01 = A[k, 0, 1]; a11 = A[k, 1, 1]
            b0 = B[k, 0]; b1 = B[k, 1]
            x0 = X[k, 0]; x1 = X[k, 1]
            scale = sqrt(x0 * x0 + x1 * x1)
            if scale < 1e-300:
                scale = 1e-300
            det = a00 * a11 - a01 * a01
            y0 = (a11 * x0 - a01 * x1) / det
            y1 = (a00 * x1 - a01 * x0) / det
            for it in range(maxiter + 1):
                _legendre2(a00, a01, a11, b0, b1, y0, y1, &l0, &l1)
                r0 = l0 - x0
                r1 = l1 - x1
                rn = sqrt(r0 * r0 + r1 * r1)
                if rn <= tol * scale:
                    iters[k] = it
                    break
                if it == maxiter:
                    break
                _tensor2(a00, a01, a11, b0, b1, y0, y1, &g00, &g01, &g11)
                det = g00 * g11 - g01 * g01
                s0 = (g11 * r0 - g01 * r1) / det
                s1 = (g00 * r1 - g01 * r0) / det
                t = 1.0
                t0 = y0 - s0
                t1 = y1 - s1
                for h in range(40):
                    _legendre2(a00, a01, a11, b0, b1, t0, t1, &l0, &l1)
                    rt = sqrt((l0 - x0) * (l0 - x0) + (l1 - x1) * (l1 - x1))
                    if rt < rn or rn <= 10 * tol * scale:
                        break
                    t *= 0.5
                    t0 = y0 - t * s0
                    t1 = y1 - t * s1
                y0 = t0
                y1 = t1
            Y[k, 0] = y0
            Y[k, 1] = y1
    return Y, iters


def pcg(indptr, indices, data, rhs, x0, double tol=1e-12, int maxiter=10000):
    cdef cnp.ndarray[long long, ndim=1] P = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef cnp.ndarray[long long, ndim=1] J = np.ascontiguousarray(indices, dtype=np.int64)
    cdef cnp.ndarray[double, ndim=1] D = np.ascontiguousarray(data, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] bvec = np.ascontiguousarray(rhs, dtype=np.float64)
    cdef Py_ssize_t n = bvec.shape[0], i, j
    cdef cnp.ndarray[double, ndim=1] x = np.array(x0, dtype=np.float64, copy=True)
    cdef cnp.ndarray[double, ndim=1] r = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] z = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] p = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] q = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] dinv = np.empty(n)
    cdef double acc, bnorm = 0.0, rnorm, rz, rz_new, alpha, pq, target
    cdef int k, result = -1
    with nogil:
        for i in range(n):
            dinv[i] = 0.0
            for j in range(P[i], P[i + 1]):
                if J[j] == i:
                    dinv[i] = 1.0 / D[j]
            bnorm += bvec[i] * bvec[i]
        bnorm = sqrt(bnorm)
        if bnorm < 1e-300:
            bnorm = 1e-300
        target = tol * bnorm
        rnorm = 0.0
        for i in range(n):
            acc = 0.0
            for j in range(P[i], P[i + 1]):
                acc += D[j] * x[J[j]]
            r[i] = bvec[i] - acc
            rnorm += r[i] * r[i]
        rnorm = sqrt(rnorm)
        if rnorm <= target:
            result = 0
        else:
            rz = 0.0
            for i in range(n):
                z[i] = r[i] * dinv[i]
                p[i] = z[i]
                rz += r[i] * z[i]
            for k in range(1, maxiter + 1):
                pq = 0.0
                for i in range(n):
                    acc = 0.0
                    for j in range(P[i], P[i + 1]):
                        acc += D[j] * p[J[j]]
                    q[i] = acc
                    pq += p[i] * acc
                alpha = rz / pq
                rnorm = 0.0
                rz_new = 0.0
                for i in range(n):
                    x[i] += alpha * p[i]
                    r[i] -= alpha * q[i]
                    rnorm += r[i] * r[i]
                rnorm = sqrt(rnorm)
                if rnorm <= target:
                    result = k
                    break
                for i in range(n):
                    z[i] = r[i] * dinv[i]
                    rz_new += r[i] * z[i]
                for i in range(n):
                    p[i] = z[i] + (rz_new / rz) * p[i]
                rz = rz_new
    return x, result, rnorm
