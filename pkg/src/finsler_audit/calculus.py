"""First- and second-order Finsler operators on chart fields.

Pointwise operators compose first-order chart stencils:

* ``gradient``: Legendre inverse of the differential, zero off the support set
* ``divergence``: sum_i dV^i/dx^i + V^i dPhi/dx^i
* ``laplacian``: divergence of the gradient (nonlinear)
* ``linearized_gradient`` / ``linearized_laplacian``: the same operators for the
  Riemannian metric g_V frozen at a reference field V
* ``gamma2``: the Bochner left-hand side built from the two above

The weak (flux) discretisation used by the heat solver lives at the bottom
of this module; it conserves mass exactly because cell gradients of
constants vanish identically.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import norm
from .errors import DegenerateReference
from .mesh import Chart, MeasureSpec

DEGENERATE_FRACTION = 1e-3


@dataclass(frozen=True, eq=False)
class OperatorContext:
    spec: norm.MinkowskiNormSpec
    measure: MeasureSpec
    eps_grad_rel: float = 1e-8

    def __post_init__(self):
        if self.spec.dimension != self.chart.dim:
            raise ValueError("norm dimension does not match the chart")
        if self.eps_grad_rel <= 0:
            raise ValueError("eps_grad_rel must be positive")
        self.spec.validate(self.points)
        object.__setattr__(self, "_dphi", self.measure.grad_log_density())

    @property
    def chart(self) -> Chart:
        return self.measure.chart

    @property
    def points(self) -> np.ndarray:
        pts = getattr(self, "_points", None)
        if pts is None:
            pts = self.chart.points
            object.__setattr__(self, "_points", pts)
        return pts

    @property
    def dlog_density(self) -> np.ndarray:
        return self._dphi

    def threshold(self, u) -> float:
        amp = float(np.ptp(u)) if np.size(u) else 0.0
        return self.eps_grad_rel * amp if amp > 0 else 1e-300


def make_context(spec, measure, eps_grad_rel: float = 1e-8) -> OperatorContext:
    return OperatorContext(spec, measure, eps_grad_rel)


def differential(ctx: OperatorContext, u) -> np.ndarray:
    return np.stack([ctx.chart.derivative(u, i) for i in range(ctx.chart.dim)], axis=-1)


def support_mask(ctx: OperatorContext, u, du=None) -> np.ndarray:
    """Node mask of M_u = {du != 0}, thresholded at eps_grad_rel * ptp(u)."""
    du = differential(ctx, u) if du is None else du
    return norm.dual_norm(ctx.spec, ctx.points, du) > ctx.threshold(u)


def gradient(ctx: OperatorContext, u, du=None) -> np.ndarray:
    du = differential(ctx, u) if du is None else du
    live = support_mask(ctx, u, du)
    out = np.zeros(du.shape)
    if live.any():
        out[live] = norm.legendre_inv(ctx.spec, ctx.points[live], du[live])
    return out


def norm_field(ctx: OperatorContext, V) -> np.ndarray:
    """F(x, V(x)) at every node."""
    return ctx.spec(ctx.points, V)


def pairing(xi, V) -> np.ndarray:
    """xi(V) node-wise."""
    return np.einsum("...i,...i->...", xi, V)


def divergence(ctx: OperatorContext, V) -> np.ndarray:
    V = np.asarray(V, dtype=float)
    out = pairing(V, ctx.dlog_density)
    for i in range(ctx.chart.dim):
        out = out + ctx.chart.derivative(V[..., i], i)
    return out


def laplacian(ctx: OperatorContext, u) -> np.ndarray:
    return divergence(ctx, gradient(ctx, u))


def weak_laplacian_residual(ctx: OperatorContext, u, phi, dphi=None) -> float:
    """int phi Lap(u) dm + int dphi(grad u) dm.

    ``dphi`` may be supplied analytically; by default chart stencils are used.
    """
    from .mesh import integrate

    dphi = differential(ctx, phi) if dphi is None else np.asarray(dphi, dtype=float)
    V = gradient(ctx, u)
    return integrate(np.asarray(phi) * divergence(ctx, V), ctx.measure) + integrate(pairing(dphi, V), ctx.measure)


def reference_mask(ctx: OperatorContext, V) -> np.ndarray:
    """Nodes where the reference field is usable (F(V) above eps relative to its peak)."""
    FV = np.abs(norm_field(ctx, V))
    peak = float(FV.max()) if FV.size else 0.0
    return FV > (ctx.eps_grad_rel * peak if peak > 0 else 1e-300)


def inverse_tensor_field(ctx: OperatorContext, V, live=None) -> np.ndarray:
    """g^{ij}(x, V(x)); identity where V is degenerate (those nodes are masked anyway)."""
    live = reference_mask(ctx, V) if live is None else live
    n = ctx.chart.dim
    out = np.broadcast_to(np.eye(n), V.shape[:-1] + (n, n)).copy()
    if live.any():
        out[live] = norm.inverse_fundamental_tensor(ctx.spec, ctx.points[live], V[live])
    return out


def tensor_field(ctx: OperatorContext, V, live=None) -> np.ndarray:
    live = reference_mask(ctx, V) if live is None else live
    n = ctx.chart.dim
    out = np.broadcast_to(np.eye(n), V.shape[:-1] + (n, n)).copy()
    if live.any():
        out[live] = norm.fundamental_tensor(ctx.spec, ctx.points[live], V[live])
    return out


def linearized_gradient(ctx: OperatorContext, V, f, df=None, ginv=None) -> np.ndarray:
    """g^{ij}(x, V) df_j where V is non-degenerate, zero elsewhere."""
    V = np.asarray(V, dtype=float)
    df = differential(ctx, f) if df is None else df
    live = reference_mask(ctx, V)
    dfn = np.linalg.norm(df, axis=-1)
    dscale = float(dfn.max()) if dfn.size else 0.0
    offending = (~live) & (dfn > ctx.eps_grad_rel * max(dscale, 1e-300))
    if offending.sum() > DEGENERATE_FRACTION * live.size:
        raise DegenerateReference(
            f"df != 0 on {int(offending.sum())} nodes where the reference field vanishes"
        )
    ginv = inverse_tensor_field(ctx, V, live) if ginv is None else ginv
    out = np.einsum("...ij,...j->...i", ginv, df)
    out[~live] = 0.0
    return out


def linearized_laplacian(ctx: OperatorContext, V, f, ginv=None) -> np.ndarray:
    return divergence(ctx, linearized_gradient(ctx, V, f, ginv=ginv))


def g_inner(ctx: OperatorContext, V, X, Y, g=None) -> np.ndarray:
    """g_V(X, Y) node-wise with the fundamental tensor at V."""
    g = tensor_field(ctx, V) if g is None else g
    return np.einsum("...i,...ij,...j->...", X, g, Y)


@dataclass
class BochnerTerms:
    """Node fields entering the Bochner-type inequalities for one function."""

    grad: np.ndarray
    mask: np.ndarray
    norm_sq: np.ndarray          # F^2(grad u)
    laplacian: np.ndarray        # Lap u
    gamma2: np.ndarray           # Lap^{grad u}[F^2/2] - d(Lap u)(grad u)
    lap_change: np.ndarray       # d(Lap u)(grad u)
    half_energy_flux: np.ndarray  # grad^{grad u}[F^2(grad u)/2]
    improved: np.ndarray         # dF(grad u)(grad^{grad u} F(grad u))
    g_form: np.ndarray           # g_{grad u}(grad^{grad u} F, grad^{grad u} F)


def bochner_terms(ctx: OperatorContext, u) -> BochnerTerms:
    u = np.asarray(u, dtype=float)
    du = differential(ctx, u)
    mask = support_mask(ctx, u, du)
    V = np.zeros(du.shape)
    if mask.any():
        V[mask] = norm.legendre_inv(ctx.spec, ctx.points[mask], du[mask])
    lap = divergence(ctx, V)
    FV = np.where(mask, norm_field(ctx, V), 0.0)
    ginv = inverse_tensor_field(ctx, V, mask)
    half = 0.5 * FV**2
    flux = linearized_gradient(ctx, V, half, ginv=ginv)
    lap_change = pairing(differential(ctx, lap), V)
    gamma = divergence(ctx, flux) - lap_change
    dF = differential(ctx, FV)
    X = linearized_gradient(ctx, V, FV, df=dF, ginv=ginv)
    improved = pairing(dF, X)
    g_form = g_inner(ctx, V, X, X, g=tensor_field(ctx, V, mask))
    zero = ~mask
    for arr in (gamma, improved, g_form):
        arr[zero] = 0.0
    return BochnerTerms(V, mask, FV**2, lap, gamma, lap_change, flux, improved, g_form)


def gamma2(ctx: OperatorContext, u):
    """Gamma_2(u) on the support set; returns ``(values, mask)`` with zeros off the mask."""
    t = bochner_terms(ctx, u)
    return t.gamma2, t.mask


def regular_region(ctx: OperatorContext, u, fraction: float) -> np.ndarray:
    """Nodes where F*(du) is at least ``fraction`` of its maximum.

    Pointwise stencil identities degrade next to critical points, where
    g(x, grad u) jumps with the direction of grad u.
    """
    du = differential(ctx, u)
    s = norm.dual_norm(ctx.spec, ctx.points, du)
    return s >= fraction * s.max()


# ---------------------------------------------------------------------------
# weak discretisation (heat solver)


@dataclass(frozen=True, eq=False)
class WeakOperator:
    """Cellwise gradients and quadrature for the flux form of Lap^V."""

    grads: list
    centers: np.ndarray
    cell_measure: np.ndarray
    node_measure: np.ndarray
    average: sp.csr_matrix

    def cell_gradient(self, u) -> np.ndarray:
        u = np.ravel(u)
        return np.stack([B @ u for B in self.grads], axis=-1)


def weak_operator(ctx: OperatorContext) -> WeakOperator:
    chart, measure = ctx.chart, ctx.measure
    grads, centers, w = chart.weak_cells()
    pattern = abs(grads[0])
    for B in grads[1:]:
        pattern = pattern + abs(B)
    pattern = (pattern > 0).astype(float).tocsr()
    counts = np.asarray(pattern.sum(axis=1)).ravel()
    average = sp.diags(1.0 / counts) @ pattern
    if measure.log_density_fn is not None:
        dens = measure.density_at(centers)
    else:
        dens = np.exp(average @ measure.log_density.ravel())
    node = (chart.weights * measure.density).ravel()
    return WeakOperator(grads, centers, w * dens, node, average.tocsr())


def _frozen_inverse_tensor(ctx: OperatorContext, op: WeakOperator, V) -> np.ndarray:
    n = ctx.chart.dim
    m = op.centers.shape[0]
    if ctx.spec.kind == "riemannian":
        return norm.inv_small(ctx.spec.metric_at(op.centers))
    FV = np.abs(ctx.spec(op.centers, V)) if V is not None else np.zeros(m)
    peak = FV.max() if m else 0.0
    live = FV > ctx.eps_grad_rel * peak if peak > 0 else np.zeros(m, dtype=bool)
    if ctx.spec.kind == "custom":
        out = np.broadcast_to(np.eye(n), (m, n, n)).copy()
    else:
        out = norm.inv_small(ctx.spec.metric_at(op.centers)).copy()
    if live.any():
        out[live] = norm.inverse_fundamental_tensor(ctx.spec, op.centers[live], V[live])
    return out


def weak_cell_gradient(ctx: OperatorContext, op: WeakOperator, u) -> np.ndarray:
    """Finsler gradient on weak cells: Legendre inverse of the cell differential."""
    du = op.cell_gradient(u)
    s = norm.dual_norm(ctx.spec, op.centers, du)
    live = s > ctx.threshold(u)
    V = np.zeros(du.shape)
    if live.any():
        V[live] = norm.legendre_inv(ctx.spec, op.centers[live], du[live])
    return V


def weak_stiffness(ctx: OperatorContext, op: WeakOperator, reference=None) -> sp.csr_matrix:
    """Symmetric matrix of u -> -M Lap^V u with V = weak gradient of ``reference``.

    For Riemannian metrics V is irrelevant and ``reference`` may be None.
    Where V vanishes the Riemannian part a^{-1} (identity for custom norms)
    stands in for g^{-1}(V).
    """
    V = None
    if ctx.spec.kind != "riemannian":
        V = weak_cell_gradient(ctx, op, reference)
    ginv = _frozen_inverse_tensor(ctx, op, V)
    n = ctx.chart.dim
    K = None
    for i in range(n):
        for j in range(n):
            block = op.grads[i].T @ sp.diags(op.cell_measure * ginv[:, i, j]) @ op.grads[j]
            K = block if K is None else K + block
    K = K.tocsr()
    # exact symmetry regardless of floating-point ordering in the products above
    return ((K + K.T) * 0.5).tocsr()


def weak_laplacian(ctx: OperatorContext, op: WeakOperator, u) -> np.ndarray:
    """Nonlinear Finsler Laplacian in flux form, -M^{-1} sum_i B_i^T (w V_i)."""
    V = weak_cell_gradient(ctx, op, u)
    flux = sum(B.T @ (op.cell_measure * V[:, i]) for i, B in enumerate(op.grads))
    return (-flux / op.node_measure).reshape(ctx.chart.shape)


def weak_energy(ctx: OperatorContext, op: WeakOperator, u) -> float:
    """(1/2) int F*(du)^2 dm with cellwise differentials."""
    du = op.cell_gradient(u)
    s = norm.dual_norm(ctx.spec, op.centers, du)
    return 0.5 * float(np.sum(op.cell_measure * s**2))
