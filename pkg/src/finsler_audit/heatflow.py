"""Nonlinear heat flow du/dt = Lap u and the functionals around it.

Each step freezes V = grad u at the start of the step and solves the
symmetric system (M + dt K_V) u' = M u, where K_V is the weak stiffness of
the linearized Laplacian and M the lumped mass.  Constants lie in the kernel
of every K_V, so the mass sum(M u) is preserved up to the linear-solver
tolerance.  For Riemannian norms K_V does not depend on V and is assembled
once per trajectory.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.integrate import trapezoid

from . import _kernels, calculus, norm
from .errors import NotDensity, NotNormalized, SolverStall, TailNotResolved
from .mesh import MeasureSpec, integrate

SOLVER_TOL = 1e-12
SOLVER_MAXITER = 10_000
NORMALIZATION_TOL = 1e-10
DENSITY_TOL = 1e-8
TAIL_ENERGY = 1e-8
TAIL_AGREEMENT = 0.10


def _solve(A: sp.csr_matrix, rhs, x0, tol=SOLVER_TOL, maxiter=SOLVER_MAXITER):
    A = A.tocsr()
    x, iters, res = _kernels.pcg(A.indptr.astype(np.int64), A.indices.astype(np.int64), A.data,
                                 np.ascontiguousarray(rhs, dtype=float), np.ascontiguousarray(x0, dtype=float),
                                 tol, maxiter)
    if iters < 0:
        raise SolverStall(f"PCG residual {res:.3g} after {maxiter} iterations")
    return x, iters


def heat_step(ctx: calculus.OperatorContext, u, dt: float, op=None, stiffness=None, tol: float = SOLVER_TOL):
    """One frozen-coefficient implicit step; returns the new field."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    op = calculus.weak_operator(ctx) if op is None else op
    K = calculus.weak_stiffness(ctx, op, u) if stiffness is None else stiffness
    shape = np.shape(u)
    u = np.ravel(np.asarray(u, dtype=float))
    M = op.node_measure
    A = (sp.diags(M) + dt * K).tocsr()
    x, _ = _solve(A, M * u, u, tol)
    return x.reshape(shape)


def energy(ctx: calculus.OperatorContext, u, op=None) -> float:
    """E(u) = (1/2) int F*(du)^2 dm, cellwise quadrature of the weak scheme."""
    op = calculus.weak_operator(ctx) if op is None else op
    return calculus.weak_energy(ctx, op, u)


def nodal_energy(ctx: calculus.OperatorContext, u) -> float:
    """E(u) with nodal stencils and the chart quadrature."""
    du = calculus.differential(ctx, u)
    return 0.5 * integrate(norm.dual_norm(ctx.spec, ctx.points, du) ** 2, ctx.measure)


def _require_normalized(m: MeasureSpec):
    mass = m.mass()
    if abs(mass - 1.0) > NORMALIZATION_TOL:
        raise NotNormalized(f"measure has mass {mass!r}")


def variance(m: MeasureSpec, f) -> float:
    _require_normalized(m)
    mean = integrate(f, m)
    return integrate(np.asarray(f, dtype=float) ** 2, m) - mean * mean


def entropy(m: MeasureSpec, f) -> float:
    """int f log f dm for a probability density f."""
    _require_normalized(m)
    f = np.asarray(f, dtype=float)
    if np.any(f < 0):
        raise NotDensity("density has negative values")
    total = integrate(f, m)
    if abs(total - 1.0) > DENSITY_TOL:
        raise NotDensity(f"density integrates to {total!r}")
    safe = np.where(f < 1e-300, 1.0, f)
    return integrate(np.where(f < 1e-300, 0.0, f * np.log(safe)), m)


def g_integral(ctx: calculus.OperatorContext, u) -> float:
    """int g dm with g = g_{grad u}(grad^{grad u} F, grad^{grad u} F); 0 off M_u."""
    t = calculus.bochner_terms(ctx, u)
    return integrate(np.where(t.mask, t.g_form, 0.0), ctx.measure)


@dataclass
class HeatTrajectory:
    times: np.ndarray
    snapshots: dict
    mass: np.ndarray
    energy: np.ndarray
    phi: np.ndarray
    g_integral: np.ndarray
    laplacian_sq: np.ndarray
    dt: float
    iterations: np.ndarray
    spectral_gap: float = math.nan
    ergodic: bool | None = None
    ergodicity: dict = field(default_factory=dict)

    @property
    def final(self) -> np.ndarray:
        return self.snapshots[max(self.snapshots)]

    def mass_drift(self) -> float:
        """Largest per-step change of the mass."""
        return float(np.max(np.abs(np.diff(self.mass)))) if self.mass.size > 1 else 0.0

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "mass", "energy", "phi", "g_integral"])
            for row in zip(self.times, self.mass, self.energy, self.phi, self.g_integral):
                w.writerow([f"{v:.12e}" for v in row])


def spectral_gap(ctx: calculus.OperatorContext, reference=None, op=None) -> float:
    """Smallest nonzero generalized eigenvalue of (K_V, M), V from ``reference``."""
    op = calculus.weak_operator(ctx) if op is None else op
    K = calculus.weak_stiffness(ctx, op, reference)
    M = op.node_measure
    if K.shape[0] <= 2500:
        from scipy.linalg import eigh

        vals = eigh(K.toarray(), np.diag(M), eigvals_only=True, subset_by_index=[0, 2])
    else:
        from scipy.sparse.linalg import eigsh

        shift = -1e-6 * float(K.diagonal().max() / M.max())
        vals = np.sort(eigsh(K.tocsc(), k=3, M=sp.diags(M).tocsc(), sigma=shift, which="LM",
                             return_eigenvectors=False))
    scale = max(abs(vals[-1]), 1e-300)
    pos = [v for v in vals if v > 1e-8 * scale]
    return float(pos[0]) if pos else math.nan


def solve_heat(ctx: calculus.OperatorContext, u0, T: float, dt: float | None = None,
               store_every: int = 0, tol: float = SOLVER_TOL, track_g: bool = True) -> HeatTrajectory:
    """Run the flow to time T, recording diagnostics at every step.

    ``store_every`` keeps every k-th field (0 keeps only the first and last).
    ``track_g=False`` skips the correction density (recorded as NaN), which
    dominates the cost on 2D charts.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    if dt is None:
        dt = min(1e-3, min(ctx.chart.spacing))
    steps = int(round(T / dt))
    if steps < 1 or abs(steps * dt - T) > 1e-9 * T:
        raise ValueError("T must be a whole number of steps")
    op = calculus.weak_operator(ctx)
    M = op.node_measure
    shape = np.shape(u0)
    u = np.ravel(np.asarray(u0, dtype=float)).copy()
    fixed = None
    if ctx.spec.kind == "riemannian":
        fixed = calculus.weak_stiffness(ctx, op)
        A_fixed = (sp.diags(M) + dt * fixed).tocsr()

    def diagnostics(v, K):
        Kv = K @ v
        return (float(M @ v), 0.5 * float(v @ Kv) if fixed is not None else calculus.weak_energy(ctx, op, v),
                float(M @ (v * v)), g_integral(ctx, v.reshape(shape)) if track_g else math.nan,
                float(Kv @ (Kv / M)))

    rows, iters = [], []
    snaps = {0: u.reshape(shape).copy()}
    K = fixed if fixed is not None else calculus.weak_stiffness(ctx, op, u.reshape(shape))
    for k in range(steps):
        rows.append(diagnostics(u, K))
        A = A_fixed if fixed is not None else (sp.diags(M) + dt * K).tocsr()
        u, it = _solve(A, M * u, u, tol)
        iters.append(it)
        if fixed is None:
            K = calculus.weak_stiffness(ctx, op, u.reshape(shape))
        if store_every and (k + 1) % store_every == 0:
            snaps[k + 1] = u.reshape(shape).copy()
    rows.append(diagnostics(u, K))
    snaps[steps] = u.reshape(shape).copy()
    cols = np.array(rows).T
    traj = HeatTrajectory(np.arange(steps + 1) * dt, snaps, cols[0], cols[1], cols[2], cols[3], cols[4],
                          dt, np.array(iters))
    _ergodicity(ctx, op, traj, np.ravel(u0))
    return traj


def _ergodicity(ctx, op, traj: HeatTrajectory, u0) -> None:
    """Record ||u_T - mean|| against the decay predicted by the measured gap.

    The bound uses the discrete backward-Euler factor (1 + lam dt)^(-n),
    which the implicit scheme satisfies mode by mode for Riemannian norms.
    """
    M = op.node_measure
    mean = float(M @ u0) / float(M.sum())
    dev0 = math.sqrt(float(M @ (u0 - mean) ** 2))
    devT = math.sqrt(float(M @ (np.ravel(traj.final) - mean) ** 2))
    try:
        lam = spectral_gap(ctx, traj.snapshots[0], op)
    except Exception:  # eigen-solve trouble only disables the check
        lam = math.nan
    traj.spectral_gap = lam
    T = traj.times[-1]
    info = {"deviation_initial": dev0, "deviation_final": devT, "gap": lam, "T": T}
    if not math.isfinite(lam) or T < 5.0 / lam:
        info["checked"] = False
        traj.ergodic = None
    else:
        n = traj.times.size - 1
        bound = dev0 * (1.0 + lam * traj.dt) ** (-n)
        info.update(checked=True, bound=bound)
        traj.ergodic = bool(devT <= bound * (1.0 + 1e-6) + 1e-14)
    traj.ergodicity = info


def _central(y, dt):
    return np.gradient(y, dt, edge_order=2)


@dataclass
class PhiDiagnostics:
    first_error: float
    second_error: float
    tolerance: float
    decay_rate: float
    passed: bool


def phi_diagnostics(traj: HeatTrajectory, floor: float = 1e-10) -> PhiDiagnostics:
    """Compare dPhi/dt with -4E and d2Phi/dt2 with 4||Lap u||^2.

    Relative errors are taken over interior times where the exact side is
    above ``floor`` times its initial value, so late roundoff-level samples do
    not dominate.  The decay rate is -(1/2) d log Phi / dt averaged over the run.
    """
    if traj.times.size < 5:
        raise ValueError("need at least 5 samples")
    dt = traj.dt
    d1 = _central(traj.phi, dt)
    d2 = _central(d1, dt)
    e1, e2 = -4.0 * traj.energy, 4.0 * traj.laplacian_sq
    core = slice(2, -2)
    tol = 5.0 * dt

    def rel(num, exact):
        num, exact = num[core], exact[core]
        keep = np.abs(exact) > floor * max(abs(exact[0]), 1e-300)
        if not keep.any():
            return float(np.max(np.abs(num))) if num.size else 0.0
        return float(np.max(np.abs(num[keep] - exact[keep]) / np.abs(exact[keep])))

    r1, r2 = rel(d1, e1), rel(d2, e2)
    rate = math.nan
    if traj.phi[0] > 0 and traj.phi[-1] > 0:
        rate = -0.5 * (math.log(traj.phi[-1]) - math.log(traj.phi[0])) / (traj.times[-1] - traj.times[0])
    return PhiDiagnostics(r1, r2, tol, rate, bool(r1 <= tol and r2 <= tol))


def decay_rate(ctx: calculus.OperatorContext, traj: HeatTrajectory) -> float:
    """Rate of ||u_t - mean||_{L2} from a log-linear fit over the whole run.

    Backward Euler damps a mode of eigenvalue lam by (1 + lam dt) per step;
    the fitted rate is converted back to lam through that factor.
    """
    M = ctx.chart.weights.ravel() * ctx.measure.density.ravel()
    mass = traj.mass / float(M.sum())
    dev = np.sqrt(np.maximum(traj.phi - traj.mass * mass, 0.0))
    ok = dev > 1e-12 * dev[0]
    slope = np.polyfit(traj.times[ok], np.log(dev[ok]), 1)[0]
    return float(math.expm1(-slope * traj.dt) / traj.dt)


def correction_integral(ctx: calculus.OperatorContext, traj: HeatTrajectory) -> float:
    """int_0^inf int_M g(t) dm dt: trapezoid on the run plus an exponential tail.

    The tail fits log(int g) on the last tenth of the samples; the fit is
    rejected (TailNotResolved) if rates from the two halves of that window
    differ by more than 10%.
    """
    if traj.energy[0] > 0 and traj.energy[-1] > TAIL_ENERGY * traj.energy[0]:
        raise TailNotResolved(
            f"final energy ratio {traj.energy[-1] / traj.energy[0]:.3g} above {TAIL_ENERGY:g}"
        )
    g = traj.g_integral
    t = traj.times
    body = float(trapezoid(g, t))
    peak = float(np.max(np.abs(g))) if g.size else 0.0
    if peak == 0.0 or abs(g[-1]) <= 1e-12 * peak:
        return body
    n = max(4, t.size // 10)
    tt, gg = t[-n:], g[-n:]
    if np.any(gg <= 0):
        raise TailNotResolved("correction density is not positive in the tail window")
    lg = np.log(gg)
    rate = -np.polyfit(tt, lg, 1)[0]
    half = n // 2
    r1 = -np.polyfit(tt[:half], lg[:half], 1)[0]
    r2 = -np.polyfit(tt[half:], lg[half:], 1)[0]
    if rate <= 0 or abs(r1 - r2) > TAIL_AGREEMENT * abs(rate):
        raise TailNotResolved(f"tail rates disagree ({r1:.4g} vs {r2:.4g})")
    return body + float(g[-1]) / rate
