"""Geodesics, Ricci and S-curvature, weighted Ricci curvature and distance fields.

Spray coefficients follow the usual convention

    G^i = (1/4) g^{il} ([F^2]_{x^k y^l} y^k - [F^2]_{x^l}),

so geodesics solve x'' + 2 G(x, x') = 0.  Ricci curvature is the trace of

    R^i_k = 2 dG^i/dx^k - y^j d2G^i/dx^j dy^k + 2 G^j d2G^i/dy^j dy^k
            - dG^i/dy^j dG^j/dy^k,

assembled by nested 5-point differences.  x-independent norms short-cut to
zero spray, hence straight geodesics and vanishing Ricci curvature.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import norm
from .errors import IntegrationBlowup, UnsupportedChart

X_STEP = 1e-3        # inner x-derivatives of F^2
OUTER_STEP = 1e-2    # outer derivatives of G in the Ricci trace
SPEED_TOL = 1e-6
FLAT_PSI = 1e-8

_W5 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_W5_2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
_OFF = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])


def _d5(fun, z, axis, h):
    """5-point first derivative of ``fun`` in coordinate ``axis`` of z (shape (m, n))."""
    out = 0.0
    for w, o in zip(_W5, _OFF):
        if w == 0.0:
            continue
        zz = z.copy()
        zz[:, axis] += o * h
        out = out + w * fun(zz)
    return out / h


def _as_batch(x, v, n):
    x = np.atleast_2d(np.asarray(x, dtype=float)).reshape(-1, n)
    v = np.atleast_2d(np.asarray(v, dtype=float)).reshape(-1, n)
    x, v = np.broadcast_arrays(x, v)
    return x.copy(), v.copy()


def spray(spec: norm.MinkowskiNormSpec, x, y) -> np.ndarray:
    """G^i(x, y), shape (m, n)."""
    n = spec.dimension
    x, y = _as_batch(x, y, n)
    if spec.x_independent:
        return np.zeros_like(y)
    F2 = lambda xx: spec(xx, y) ** 2
    # [F^2]_{y^l} = 2 xi_l with xi the Legendre transform
    xi2 = lambda xx: 2.0 * norm.legendre(spec, xx, y)
    dF2dx = np.stack([_d5(F2, x, k, X_STEP) for k in range(n)], axis=-1)
    mixed = np.stack([_d5(xi2, x, k, X_STEP) for k in range(n)], axis=-2)  # [..., k, l]
    rhs = np.einsum("mk,mkl->ml", y, mixed) - dF2dx
    ginv = norm.inverse_fundamental_tensor(spec, x, y)
    return 0.25 * np.einsum("mil,ml->mi", ginv, rhs)


@dataclass
class GeodesicPath:
    x0: np.ndarray
    v0: np.ndarray
    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    speed_drift: float = 0.0


def spray_and_geodesic(spec: norm.MinkowskiNormSpec, x0, v0, eps: float = 0.02, steps: int = 16) -> GeodesicPath:
    """RK4 integration of x'' = -2 G(x, x') on [-eps, eps] with ``steps`` steps per side."""
    n = spec.dimension
    x0 = np.asarray(x0, dtype=float).reshape(n)
    v0 = np.asarray(v0, dtype=float).reshape(n)
    if np.linalg.norm(v0) <= norm.ZERO_THRESHOLD:
        raise ValueError("geodesic needs a nonzero initial velocity")

    def rhs(state):
        x, v = state[:n], state[n:]
        return np.concatenate([v, -2.0 * spray(spec, x, v)[0]])

    def sweep(sign):
        dt = sign * eps / steps
        s = np.concatenate([x0, v0])
        out = [s]
        for _ in range(steps):
            k1 = rhs(s)
            k2 = rhs(s + 0.5 * dt * k1)
            k3 = rhs(s + 0.5 * dt * k2)
            k4 = rhs(s + dt * k3)
            s = s + dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
            out.append(s)
        return np.array(out)

    fwd, bwd = sweep(1.0), sweep(-1.0)
    states = np.concatenate([bwd[:0:-1], fwd])
    times = np.linspace(-eps, eps, 2 * steps + 1)
    pos, vel = states[:, :n], states[:, n:]
    speed = spec(pos, vel)
    drift = float(np.max(np.abs(speed / speed[steps] - 1.0)))
    if drift > SPEED_TOL:
        raise IntegrationBlowup(f"geodesic speed drifted by {drift:.3g} (relative)")
    return GeodesicPath(x0, v0, times, pos, vel, drift)


def _ambient(chart, key):
    return None if chart is None else chart.meta.get(key)


def ricci(spec: norm.MinkowskiNormSpec, x, v, chart=None) -> float:
    """Ric(v) at x.  1D charts give 0 unless the chart records an ambient constant."""
    x = np.asarray(x, dtype=float).reshape(spec.dimension)
    v = np.asarray(v, dtype=float).reshape(spec.dimension)
    kappa = _ambient(chart, "ambient_ricci")
    if kappa is not None:
        return float(kappa) * float(spec(x, v)) ** 2
    if spec.dimension == 1 or spec.x_independent:
        return 0.0
    n, H = spec.dimension, OUTER_STEP
    z = np.concatenate([x, v])[None, :]
    G = lambda zz: spray(spec, zz[:, :n], zz[:, n:])
    G0 = G(z)[0]
    dGdx = np.stack([_d5(G, z, k, H)[0] for k in range(n)], axis=-1)       # [i, k]
    dGdy = np.stack([_d5(G, z, n + k, H)[0] for k in range(n)], axis=-1)   # [i, k]
    dxdy = np.empty((n, n, n))   # [i, j, k] = d2 G^i / dx^j dy^k
    dydy = np.empty((n, n, n))   # [i, j, k] = d2 G^i / dy^j dy^k
    for k in range(n):
        dGk = lambda zz, k=k: _d5(G, zz, n + k, H)
        for j in range(n):
            dxdy[:, j, k] = _d5(dGk, z, j, H)[0]
            if j <= k:
                dydy[:, j, k] = dydy[:, k, j] = _d5(dGk, z, n + j, H)[0]
    tr = (2.0 * np.trace(dGdx)
          - np.einsum("j,iji->", v, dxdy)
          + 2.0 * np.einsum("j,iji->", G0, dydy)
          - np.einsum("ij,ji->", dGdy, dGdy))
    return float(tr)


def _psi_along(spec, measure, path: GeodesicPath) -> np.ndarray:
    if measure.log_density_fn is None:
        raise ValueError("S-curvature needs an analytic log-density")
    g = norm.fundamental_tensor(spec, path.positions, path.velocities)
    logdet = np.log(np.linalg.det(g))
    return 0.5 * logdet - measure.log_density_fn(path.positions)


def s_curvature_and_psi(spec: norm.MinkowskiNormSpec, measure, x, v, eps: float = 0.02, chart=None):
    """(psi'(0), psi''(0)) for psi = (1/2) log det g(eta, eta') - Phi(eta).

    Charts whose measure is the Riemannian volume (``weight_is_volume``) have
    psi identically zero.
    """
    chart = measure.chart if chart is None else chart
    if _ambient(chart, "weight_is_volume"):
        return 0.0, 0.0
    tau = eps / 2.0
    # 4 RK4 steps per stencil spacing keeps the integration error far below roundoff
    path = spray_and_geodesic(spec, x, v, eps, steps=8)
    psi = _psi_along(spec, measure, path)[::4]
    d1 = float(np.dot(_W5, psi)) / tau
    d2 = float(np.dot(_W5_2, psi)) / tau**2
    return d1, d2


@dataclass
class WeightedRicciReport:
    x: np.ndarray
    v: np.ndarray
    ric: float
    psi1: float
    psi2: float
    ric_n: dict = field(default_factory=dict)
    ric_inf: float = 0.0
    ratio: float = 0.0

    CSV_HEADER = ("x", "v", "ric", "psi1", "psi2", "ric_inf", "ratio")

    def csv_row(self):
        vec = lambda a: " ".join(repr(float(c)) for c in np.ravel(a))
        return [vec(self.x), vec(self.v), repr(self.ric), repr(self.psi1), repr(self.psi2),
                repr(self.ric_inf), repr(self.ratio)]


def weighted_ricci(spec: norm.MinkowskiNormSpec, measure, x, v, Ns=(math.inf,), chart=None) -> WeightedRicciReport:
    chart = measure.chart if chart is None else chart
    x = np.asarray(x, dtype=float).reshape(spec.dimension)
    v = np.asarray(v, dtype=float).reshape(spec.dimension)
    ric = ricci(spec, x, v, chart)
    p1, p2 = s_curvature_and_psi(spec, measure, x, v, chart=chart)
    n = spec.dimension
    if _ambient(chart, "ambient_dimension"):
        n = int(chart.meta["ambient_dimension"])
    ric_inf = ric + p2
    out = {}
    for N in Ns:
        if math.isinf(N):
            out[N] = ric_inf
        elif N == n:
            out[N] = -math.inf if abs(p1) > FLAT_PSI else ric_inf
        else:
            out[N] = ric_inf - p1 * p1 / (N - n)
    F2 = float(spec(x, v)) ** 2
    return WeightedRicciReport(x, v, ric, p1, p2, out, ric_inf, ric_inf / F2)


def write_ricci_csv(path, reports) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(WeightedRicciReport.CSV_HEADER)
        for r in reports:
            w.writerow(r.csv_row())


def scan_samples(spec: norm.MinkowskiNormSpec, chart, samples: int = 128):
    """Evenly spread (node, F-unit direction) pairs away from the chart boundary."""
    n = spec.dimension
    ndir = 2 if n == 1 else 8
    nodes = -(-samples // ndir)
    pts = chart.points
    if not chart.periodic:
        pts = pts[3:-3]
    flat = pts.reshape(-1, n)
    if n == 2:
        side = int(math.ceil(math.sqrt(nodes)))
        ii = np.linspace(0, pts.shape[0] - 1, side + 2)[1:-1].astype(int)
        jj = np.linspace(0, pts.shape[1] - 1, side + 2)[1:-1].astype(int)
        chosen = pts[np.ix_(ii, jj)].reshape(-1, n)
    else:
        chosen = flat[np.linspace(0, len(flat) - 1, nodes).astype(int)]
    out = []
    for p in chosen:
        for d in norm.indicatrix_directions(spec, p, ndir):
            out.append((p, d))
    return out


def scan_reports(spec: norm.MinkowskiNormSpec, measure, samples: int = 128, chart=None) -> list:
    """Weighted Ricci reports over the sample set of :func:`scan_samples`."""
    if samples < 100:
        raise ValueError("curvature scan needs at least 100 samples")
    chart = measure.chart if chart is None else chart
    return [weighted_ricci(spec, measure, p, d, chart=chart) for p, d in scan_samples(spec, chart, samples)]


def ric_bound_scan(spec: norm.MinkowskiNormSpec, measure, samples: int = 128, chart=None) -> float:
    """min over sampled (x, v) of Ric_inf(v) / F^2(x, v)."""
    return float(min(r.ratio for r in scan_reports(spec, measure, samples, chart)))


@dataclass
class DistanceField:
    base: tuple
    r: np.ndarray
    grad: np.ndarray
    laplacian: np.ndarray
    excluded: np.ndarray
    eikonal_residual: float


def _node_index(chart, p):
    if isinstance(p, (int, np.integer)):
        return np.unravel_index(int(p), chart.shape)
    return tuple(int(i) for i in p)


def distance_field(ctx, p) -> DistanceField:
    """Forward distance r = d(p, .) from node ``p`` with its gradient and Laplacian.

    Supported on x-independent norms (straight minimizing geodesics) and on
    1D charts.  The gradient is the exact unit radial field; Delta r is the
    chart divergence of it, classical away from p.  The base node gets 0.
    """
    from . import calculus

    spec, chart = ctx.spec, ctx.chart
    if chart.dim == 2 and not spec.x_independent:
        raise UnsupportedChart("distance fields on 2D charts need an x-independent norm")
    idx = _node_index(chart, p)
    pts = ctx.points
    base = pts[idx]
    disp = pts - base
    if spec.x_independent:
        r = spec(pts, disp)
    else:
        x = chart.axis_coords(0)
        k = idx[0]
        fwd = spec(x[:, None], np.ones((x.size, 1)))
        bwd = spec(x[:, None], -np.ones((x.size, 1)))
        h = chart.spacing[0]
        r = np.zeros(x.size)
        r[k + 1:] = np.cumsum(0.5 * h * (fwd[k:-1] + fwd[k + 1:]))
        if k > 0:
            r[:k] = np.cumsum(0.5 * h * (bwd[k:0:-1] + bwd[k - 1::-1]))[::-1]
    excluded = np.zeros(chart.shape, dtype=bool)
    excluded[idx] = True
    dirs = np.where(excluded[..., None], 0.0, disp)
    if spec.x_independent:
        denom = np.where(excluded, 1.0, spec(pts, np.where(excluded[..., None], 1.0, dirs)))
        grad = dirs / denom[..., None]
    else:
        s = np.sign(dirs)
        denom = np.where(excluded, 1.0, spec(pts, np.where(excluded[..., None], 1.0, s)))
        grad = s / denom[..., None]
    grad[excluded] = 0.0
    lap = calculus.divergence(ctx, grad)
    lap[excluded] = 0.0
    h = max(chart.spacing)
    dr = calculus.differential(ctx, r)
    resid = np.abs(norm.dual_norm(spec, pts, dr) - 1.0)
    region = (r > 3 * h) & _interior(chart, 3)
    eik = float(resid[region].max()) if region.any() else 0.0
    return DistanceField(idx, r, grad, lap, excluded, eik)


def _interior(chart, width):
    """Nodes at least ``width`` cells from every chart edge (periodic edges included)."""
    mask = np.ones(chart.shape, dtype=bool)
    for ax in range(chart.dim):
        sl = [slice(None)] * chart.dim
        sl[ax] = slice(0, width)
        mask[tuple(sl)] = False
        sl[ax] = slice(-width, None)
        mask[tuple(sl)] = False
    return mask
