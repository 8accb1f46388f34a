"""Minkowski norms on tangent spaces and their Legendre duality.

All functions broadcast over leading axes: points ``x`` have shape
``(..., n)``, vectors ``y`` and covectors ``xi`` have shape ``(..., n)``.
Three norm families are supported:

* ``riemannian``: F(x, y) = sqrt(a_ij(x) y^i y^j)
* ``randers``:    F(x, y) = sqrt(a_ij(x) y^i y^j) + b_i(x) y^i
* ``custom``:     any vectorized callable ``F(x, y)``, positively 1-homogeneous
  and strongly convex in ``y``; derivatives in ``y`` come from finite differences.

Nothing here assumes F(x, -y) == F(x, y).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels
from .errors import ConvergenceFailure, DegenerateDirection, NotConvex

ZERO_THRESHOLD = 1e-12
FD_STEP = 1e-4
RANDERS_MARGIN = 1e-6
DUAL_STARTS = 8
DUAL_MAXITER = 200
DUAL_STATIONARITY = 1e-10


def _as_callable(value, n, shape):
    if value is None or callable(value):
        return value
    arr = np.asarray(value, dtype=float)
    if arr.shape != shape:
        raise ValueError(f"expected constant of shape {shape}, got {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class MinkowskiNormSpec:
    """A Finsler metric on a chart of dimension 1 or 2.

    ``metric`` and ``form`` are either constant arrays or vectorized callables
    ``x -> a(x)`` of shape (..., n, n) and ``x -> b(x)`` of shape (..., n).
    ``custom_eval(x, y)`` must broadcast over leading axes.
    """

    kind: str
    dimension: int
    metric: Callable | np.ndarray | None = None
    form: Callable | np.ndarray | None = None
    custom_eval: Callable | None = None
    x_independent: bool | None = None
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("riemannian", "randers", "custom"):
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if self.dimension not in (1, 2):
            raise ValueError("dimension must be 1 or 2")
        n = self.dimension
        if self.kind == "custom":
            if self.custom_eval is None:
                raise ValueError("custom norm needs custom_eval")
        else:
            metric = np.eye(n) if self.metric is None else self.metric
            object.__setattr__(self, "metric", _as_callable(metric, n, (n, n)))
        if self.kind == "randers":
            if self.form is None:
                raise ValueError("randers norm needs a one-form")
            object.__setattr__(self, "form", _as_callable(self.form, n, (n,)))
        if self.x_independent is None:
            indep = self.kind != "custom" and not callable(self.metric) and not callable(self.form)
            object.__setattr__(self, "x_independent", indep)

    def metric_at(self, x):
        x = np.asarray(x, dtype=float)
        if callable(self.metric):
            return np.asarray(self.metric(x), dtype=float)
        return np.broadcast_to(self.metric, x.shape[:-1] + self.metric.shape)

    def form_at(self, x):
        x = np.asarray(x, dtype=float)
        if self.form is None:
            return np.zeros(x.shape)
        if callable(self.form):
            return np.asarray(self.form(x), dtype=float)
        return np.broadcast_to(self.form, x.shape)

    def __call__(self, x, y):
        x, y = _broadcast(x, y)
        if self.kind == "custom":
            return np.asarray(self.custom_eval(x, y), dtype=float)
        a = self.metric_at(x)
        F = np.sqrt(np.maximum(np.einsum("...i,...ij,...j->...", y, a, y), 0.0))
        if self.kind == "randers":
            F = F + np.einsum("...i,...i->...", self.form_at(x), y)
        return F

    def reversed(self) -> "MinkowskiNormSpec":
        """The reverse metric F(x, -y)."""
        if self.kind == "riemannian":
            return self
        if self.kind == "randers":
            form = self.form
            neg = (lambda x: -form(x)) if callable(form) else -form
            return MinkowskiNormSpec("randers", self.dimension, self.metric, neg,
                                     x_independent=self.x_independent, name=f"reversed {self.name}")
        fn = self.custom_eval
        return MinkowskiNormSpec("custom", self.dimension, custom_eval=lambda x, y: fn(x, -np.asarray(y)),
                                 x_independent=self.x_independent, name=f"reversed {self.name}")

    def validate(self, points) -> None:
        """Check positive definiteness and the Randers bound at the given points."""
        points = np.asarray(points, dtype=float)
        if self.kind != "custom":
            a = self.metric_at(points)
            eig = np.linalg.eigvalsh(a)
            if not np.all(eig > 0):
                raise NotConvex(f"metric not positive definite (min eigenvalue {eig.min():.3g})")
        if self.kind == "randers":
            b = self.form_at(points)
            bnorm = np.sqrt(np.einsum("...i,...ij,...j->...", b, inv_small(a), b))
            if np.max(bnorm) > 1 - RANDERS_MARGIN:
                raise NotConvex(f"Randers one-form too long (alpha-norm {np.max(bnorm):.6g})")
        if self.kind == "custom":
            dirs = unit_circle(16) if self.dimension == 2 else np.array([[1.0], [-1.0]])
            pts = points.reshape(-1, self.dimension)
            idx = np.unique(np.linspace(0, len(pts) - 1, min(len(pts), 25)).astype(int))
            for p in pts[idx]:
                fundamental_tensor(self, np.broadcast_to(p, dirs.shape), dirs)


def euclidean(n: int = 2) -> MinkowskiNormSpec:
    return MinkowskiNormSpec("riemannian", n, np.eye(n), name="euclidean")


def riemannian(metric, n: int) -> MinkowskiNormSpec:
    return MinkowskiNormSpec("riemannian", n, metric, name="riemannian")


def randers(form, n: int, metric=None) -> MinkowskiNormSpec:
    return MinkowskiNormSpec("randers", n, np.eye(n) if metric is None else metric, form, name="randers")


def custom(fn: Callable, n: int, x_independent: bool = False, name: str = "custom") -> MinkowskiNormSpec:
    return MinkowskiNormSpec("custom", n, custom_eval=fn, x_independent=x_independent, name=name)


def as_custom(spec: MinkowskiNormSpec) -> MinkowskiNormSpec:
    """Wrap any spec as a custom norm so that the finite-difference paths are used."""
    return custom(spec.__call__, spec.dimension, bool(spec.x_independent), name=f"custom {spec.name}")


def unit_circle(count: int) -> np.ndarray:
    t = 2 * np.pi * np.arange(count) / count
    return np.stack([np.cos(t), np.sin(t)], axis=-1)


def _broadcast(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = np.broadcast_shapes(x.shape[:-1], y.shape[:-1]) + (y.shape[-1],)
    return np.broadcast_to(x, shape), np.broadcast_to(y, shape)


def _fd_hessian(fun, y, h):
    """Central second differences of a scalar function of the last axis."""
    n = y.shape[-1]
    out = np.empty(y.shape + (n,))
    f0 = fun(y)
    eye = np.eye(n)
    for i in range(n):
        ei = eye[i] * h[..., None]
        out[..., i, i] = (fun(y + ei) - 2 * f0 + fun(y - ei)) / h**2
        for j in range(i + 1, n):
            ej = eye[j] * h[..., None]
            val = (fun(y + ei + ej) - fun(y + ei - ej) - fun(y - ei + ej) + fun(y - ei - ej)) / (4 * h**2)
            out[..., i, j] = out[..., j, i] = val
    return out


def _fd_gradient(fun, y, h):
    """Five-point central first differences along each component."""
    n = y.shape[-1]
    out = np.empty(y.shape)
    eye = np.eye(n)
    for i in range(n):
        e = eye[i] * h[..., None]
        out[..., i] = (-fun(y + 2 * e) + 8 * fun(y + e) - 8 * fun(y - e) + fun(y - 2 * e)) / (12 * h)
    return out


def _step(v):
    return FD_STEP * np.maximum(1.0, np.linalg.norm(v, axis=-1))


def _check_pd(g):
    n = g.shape[-1]
    if n == 1:
        ok = g[..., 0, 0] > 0
    else:
        ok = (g[..., 0, 0] > 0) & (g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0] > 0)
    if not np.all(ok):
        raise NotConvex("fundamental tensor is not positive definite")


def fundamental_tensor(spec: MinkowskiNormSpec, x, y) -> np.ndarray:
    """g_ij(x, y) = (1/2) d^2 F^2 / dy^i dy^j, shape (..., n, n)."""
    x, y = _broadcast(x, y)
    if np.any(np.linalg.norm(y, axis=-1) <= ZERO_THRESHOLD):
        raise DegenerateDirection("fundamental tensor requested at y = 0")
    if spec.kind == "riemannian":
        return np.array(spec.metric_at(x), dtype=float)
    if spec.kind == "randers":
        g = _kernels.randers_tensor(spec.metric_at(x), spec.form_at(x), y)
    else:
        g = 0.5 * _fd_hessian(lambda v: spec.custom_eval(x, v) ** 2, y, _step(y))
    _check_pd(g)
    return g


def inv_small(g) -> np.ndarray:
    """Batched inverse of 1x1 or 2x2 matrices in closed form."""
    g = np.asarray(g, dtype=float)
    if g.shape[-1] == 1:
        return 1.0 / g
    a, b, c, d = g[..., 0, 0], g[..., 0, 1], g[..., 1, 0], g[..., 1, 1]
    det = a * d - b * c
    out = np.empty_like(g)
    out[..., 0, 0] = d / det
    out[..., 0, 1] = -b / det
    out[..., 1, 0] = -c / det
    out[..., 1, 1] = a / det
    return out


def inverse_fundamental_tensor(spec: MinkowskiNormSpec, x, y) -> np.ndarray:
    return inv_small(fundamental_tensor(spec, x, y))


def _randers_dual(a, b, xi):
    ainv = inv_small(a)
    bsharp = np.einsum("...ij,...j->...i", ainv, b)
    lam = 1.0 - np.einsum("...i,...i->...", bsharp, b)
    bx = np.einsum("...i,...i->...", bsharp, xi)
    q = np.einsum("...i,...ij,...j->...", xi, ainv, xi)
    return (np.sqrt(np.maximum(lam * q + bx**2, 0.0)) - bx) / lam


def dual_norm(spec: MinkowskiNormSpec, x, xi) -> np.ndarray:
    """F*(x, xi) = sup over F(x, y) = 1 of xi(y)."""
    x, xi = _broadcast(x, xi)
    if spec.kind == "riemannian":
        ainv = inv_small(spec.metric_at(x))
        return np.sqrt(np.maximum(np.einsum("...i,...ij,...j->...", xi, ainv, xi), 0.0))
    if spec.kind == "randers":
        return _randers_dual(spec.metric_at(x), spec.form_at(x), xi)
    return _dual_by_ascent(spec, x, xi)


def _dual_by_ascent(spec, x, xi):
    if spec.dimension == 1:
        plus = spec.custom_eval(x, np.ones_like(xi))
        minus = spec.custom_eval(x, -np.ones_like(xi))
        return np.maximum(xi[..., 0] / plus, -xi[..., 0] / minus)
    shape = xi.shape[:-1]
    xs = np.broadcast_to(x.reshape(-1, 1, 2), (int(np.prod(shape, dtype=int)), DUAL_STARTS, 2))
    xis = np.broadcast_to(xi.reshape(-1, 1, 2), xs.shape)
    scale = np.maximum(np.linalg.norm(xi.reshape(-1, 2), axis=-1), 1e-300)[:, None]

    def ratio(t):
        y = np.stack([np.cos(t), np.sin(t)], axis=-1)
        return np.einsum("...i,...i->...", xis, y) / spec.custom_eval(xs, y)

    d = 1e-3
    t = np.broadcast_to(2 * np.pi * np.arange(DUAL_STARTS) / DUAL_STARTS, xs.shape[:-1]).copy()
    converged = np.zeros(t.shape, dtype=bool)
    for _ in range(DUAL_MAXITER):
        f = [ratio(t + k * d) for k in (-2, -1, 0, 1, 2)]
        d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * d)
        d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * d * d)
        converged = np.abs(d1) <= DUAL_STATIONARITY * scale
        if converged.all():
            break
        newton = -d1 / np.where(d2 < 0, d2, -1.0)
        ascent = 0.25 * np.sign(d1)
        step = np.where(d2 < 0, np.clip(newton, -0.5, 0.5), ascent)
        t = np.where(converged, t, t + step)
    else:
        if not converged.all():
            raise ConvergenceFailure("dual norm ascent did not reach stationarity")
    best = ratio(t).max(axis=-1)
    return np.maximum(best, 0.0).reshape(shape)


def legendre(spec: MinkowskiNormSpec, x, y) -> np.ndarray:
    """The covector g_y(y, .); the zero vector maps to the zero covector."""
    x, y = _broadcast(x, y)
    out = np.zeros(y.shape)
    live = np.linalg.norm(y, axis=-1) > ZERO_THRESHOLD
    if not live.any():
        return out
    xl, yl = x[live], y[live]
    if spec.kind == "riemannian":
        out[live] = np.einsum("...ij,...j->...i", spec.metric_at(xl), yl)
    elif spec.kind == "randers":
        out[live] = _kernels.randers_legendre(spec.metric_at(xl), spec.form_at(xl), yl)
    else:
        out[live] = 0.5 * _fd_gradient(lambda v: spec.custom_eval(xl, v) ** 2, yl, _step(yl))
    return out


def legendre_inv(spec: MinkowskiNormSpec, x, xi, tol: float = 1e-14, maxiter: int = 100) -> np.ndarray:
    """The unique vector y with legendre(y) = xi (zero for the zero covector)."""
    x, xi = _broadcast(x, xi)
    out = np.zeros(xi.shape)
    live = np.linalg.norm(xi, axis=-1) > ZERO_THRESHOLD
    if not live.any():
        return out
    xl, xil = x[live], xi[live]
    if spec.kind == "riemannian":
        out[live] = np.linalg.solve(spec.metric_at(xl), xil[..., None])[..., 0]
        return out
    if spec.kind == "randers":
        a = np.ascontiguousarray(spec.metric_at(xl))
        b = np.ascontiguousarray(spec.form_at(xl))
        y, iters = _kernels.randers_legendre_inv(a, b, xil, tol, maxiter)
    else:
        y, iters = _custom_legendre_inv(spec, xl, xil, max(tol, 1e-11), maxiter)
    if np.any(iters < 0):
        bad = np.flatnonzero(iters < 0)
        raise ConvergenceFailure(f"Legendre inversion failed at {bad.size} samples (first index {bad[0]})")
    out[live] = y
    return out


def _custom_legendre_inv(spec, x, xi, tol, maxiter):
    y = xi.copy()
    # rescale the start so that F(y) matches F*(xi); direction is the Euclidean guess
    y *= (dual_norm(spec, x, xi) / spec.custom_eval(x, y))[..., None]
    scale = np.linalg.norm(xi, axis=-1)
    iters = np.full(xi.shape[0], -1)
    for it in range(maxiter + 1):
        r = legendre(spec, x, y) - xi
        rn = np.linalg.norm(r, axis=-1)
        done = (rn <= tol * scale) & (iters < 0)
        iters[done] = it
        if np.all(iters >= 0) or it == maxiter:
            break
        act = iters < 0
        step = np.linalg.solve(fundamental_tensor(spec, x[act], y[act]), r[act][..., None])[..., 0]
        t = np.ones(step.shape[0])
        ya = y[act]
        trial = ya - step
        for _ in range(40):
            rt = np.linalg.norm(legendre(spec, x[act], trial) - xi[act], axis=-1)
            bad = (rt >= rn[act]) & (rn[act] > 10 * tol * scale[act])
            if not bad.any():
                break
            t[bad] *= 0.5
            trial[bad] = ya[bad] - t[bad, None] * step[bad]
        y[act] = trial
    return y, iters


def check_dual_tensor(spec: MinkowskiNormSpec, x, y, step: float = FD_STEP) -> float:
    """Max entry of |(1/2) Hess_xi F*^2 - g^{-1}(y)| at xi = legendre(y)."""
    x, y = _broadcast(x, y)
    xi = legendre(spec, x, y)
    h = step * np.maximum(1.0, np.linalg.norm(xi, axis=-1))
    gstar = 0.5 * _fd_hessian(lambda v: dual_norm(spec, x, v) ** 2, xi, h)
    ginv = inverse_fundamental_tensor(spec, x, y)
    return float(np.max(np.abs(gstar - ginv)))


def reversibility_constant(spec: MinkowskiNormSpec, points, directions: int = 64) -> float:
    """Sampled sup of F(x, -y) / F(x, y) (a diagnostic number only)."""
    points = np.asarray(points, dtype=float).reshape(-1, spec.dimension)
    dirs = unit_circle(directions) if spec.dimension == 2 else np.array([[1.0], [-1.0]])
    xs = points[:, None, :]
    return float(np.max(spec(xs, -dirs[None]) / spec(xs, dirs[None])))


def indicatrix_directions(spec: MinkowskiNormSpec, x, count: int) -> np.ndarray:
    """``count`` F-unit vectors at the point ``x`` (both signs in 1D)."""
    x = np.asarray(x, dtype=float)
    dirs = unit_circle(count) if spec.dimension == 2 else np.array([[1.0], [-1.0]])
    return dirs / spec(np.broadcast_to(x, dirs.shape), dirs)[:, None]
