"""Inequality and identity checkers with signed margins.

Every claim is put in the form ``lesser <= greater`` and reported with
``lhs = lesser``, ``rhs = greater`` and ``margin = rhs - lhs``; a report
passes when ``margin >= -tolerance``.  Identity checks report the residual
as ``lhs`` against ``rhs = 0``.  Tolerances are always passed in by the
caller (scenario configs); nothing here picks one.
"""
from __future__ import annotations

import math
import time
import weakref
from dataclasses import dataclass, field

import numpy as np

from . import calculus, curvature, heatflow, norm
from .errors import FinslerAuditError, HypothesisUnverified, NotPositive, OverflowRange
from .mesh import integrate

SCHEMA = "finsler-audit/1"
CERT_SLACK = 1e-6
SCAN_SAMPLES = 128
FORMS_AGREE = 1e-8
LOGSOB_FLOOR = 1e-12
POSITIVE_FLOOR = 1e-6

_scan_cache: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def _num(v):
    """JSON-safe float: non-finite values become strings."""
    if v is None:
        return None
    v = float(v)
    if math.isfinite(v):
        return v
    return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")


def _plain(v):
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_plain(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return _num(v)
    return v


@dataclass
class InequalityReport:
    claim: str
    scenario: str
    lhs: float
    rhs: float
    margin: float
    tolerance: float
    passed: bool
    runtime: float
    worst_node_margin: float | None = None
    audit_only: bool = False
    divergent: bool = False
    details: dict = field(default_factory=dict)
    artifact: object = field(default=None, repr=False)  # heat trajectory or Ricci samples, not serialized

    CSV_FIELDS = ("claim", "scenario", "lhs", "rhs", "margin", "tolerance", "pass", "audit_only")

    def to_dict(self) -> dict:
        return {
            "claim": self.claim,
            "scenario": self.scenario,
            "lhs": _num(self.lhs),
            "rhs": _num(self.rhs),
            "margin": _num(self.margin),
            "tolerance": _num(self.tolerance),
            "worst_node_margin": _num(self.worst_node_margin),
            "pass": bool(self.passed),
            "audit_only": bool(self.audit_only),
            "divergent": bool(self.divergent),
            "runtime": round(float(self.runtime), 6),
            "details": _plain(self.details),
        }

    def csv_row(self) -> list:
        fmt = lambda v: v if isinstance(v, str) else f"{v:.10g}"
        return [self.claim, self.scenario, fmt(_num(self.lhs)), fmt(_num(self.rhs)), fmt(_num(self.margin)),
                fmt(_num(self.tolerance)), "pass" if self.passed else "fail", "yes" if self.audit_only else "no"]


def _report(claim, scenario, lhs, rhs, tol, t0, **kw) -> InequalityReport:
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    divergent = kw.pop("divergent", False) or not (math.isfinite(lhs) and math.isfinite(rhs))
    margin = rhs - lhs if not (math.isinf(rhs) and math.isinf(lhs)) else math.nan
    extra_ok = bool(kw.pop("extra_ok", True))
    passed = bool(margin >= -tol) and extra_ok
    return InequalityReport(claim, scenario, float(lhs), float(rhs), float(margin), float(tol), passed,
                            time.perf_counter() - t0, divergent=divergent, **kw)


def certify(ctx: calculus.OperatorContext, K: float, certified: float | None = None,
            samples: int = SCAN_SAMPLES) -> float:
    """Check K against the sampled curvature bound; returns the bound used."""
    if certified is None:
        key = (samples,)
        cache = _scan_cache.setdefault(ctx, {})
        if key not in cache:
            cache[key] = curvature.ric_bound_scan(ctx.spec, ctx.measure, samples)
        certified = cache[key]
    if K > certified + CERT_SLACK * max(1.0, abs(certified)):
        raise HypothesisUnverified(f"K = {K:g} exceeds the sampled curvature bound {certified:.8g}")
    return float(certified)


def _evaluation_nodes(mask, region):
    return mask if region is None else (mask & np.asarray(region, dtype=bool))


_VARIANTS = {"plain": "bochner_inf", "improved": "improved_bochner", "gamma2-form": "gamma2_bochner"}


def check_bochner_pointwise(ctx, u, K: float, variant: str = "improved", tol: float = 0.0, scenario: str = "",
                            region=None, certified: float | None = None) -> InequalityReport:
    """Worst node margin of Gamma2(u) - K F^2(grad u) - correction on M_u."""
    t0 = time.perf_counter()
    if variant not in _VARIANTS:
        raise ValueError(f"variant must be one of {sorted(_VARIANTS)}")
    cert = certify(ctx, K, certified)
    t = calculus.bochner_terms(ctx, u)
    nodes = _evaluation_nodes(t.mask, region)
    claim = _VARIANTS[variant]
    if not nodes.any():
        return _report(claim, scenario, 0.0, 0.0, tol, t0, worst_node_margin=0.0,
                       details={"empty_support": True, "certified_K": cert})
    corr = {"plain": 0.0 * t.improved, "improved": t.improved, "gamma2-form": t.g_form}[variant]
    scale = max(1.0, float(np.max(np.abs(t.improved[nodes]))))
    gap = float(np.max(np.abs(t.improved - t.g_form)[nodes])) / scale
    lesser = K * t.norm_sq + corr
    node_margin = t.gamma2 - lesser
    worst = np.argmin(np.where(nodes, node_margin, np.inf))
    worst = np.unravel_index(worst, node_margin.shape)
    return _report(claim, scenario, float(lesser[worst]), float(t.gamma2[worst]), tol, t0,
                   worst_node_margin=float(node_margin[worst]), extra_ok=gap <= FORMS_AGREE,
                   details={"nodes": int(nodes.sum()), "certified_K": cert, "K": K,
                            "forms_gap": gap, "forms_agree": gap <= FORMS_AGREE,
                            "worst_point": ctx.points[worst].tolist()})


def _check_test_function(ctx, phi):
    if np.any(np.asarray(phi) < 0):
        raise ValueError("test function must be nonnegative")
    chart = ctx.chart
    if not (chart.periodic or chart.reflecting) and np.any(np.asarray(phi)[~chart.collar_mask(3)] != 0):
        raise ValueError("test function must vanish on the 3-cell boundary collar")


def check_bochner_integrated(ctx, u, phi, K: float, tol: float = 0.0, scenario: str = "", dphi=None,
                             certified: float | None = None) -> InequalityReport:
    """int phi {d(Lap u)(grad u) + K F^2 + dF(grad^{grad u} F)} <= -int dphi(grad^{grad u}[F^2/2])."""
    t0 = time.perf_counter()
    phi = np.asarray(phi, dtype=float)
    _check_test_function(ctx, phi)
    cert = certify(ctx, K, certified)
    t = calculus.bochner_terms(ctx, u)
    dphi = calculus.differential(ctx, phi) if dphi is None else np.asarray(dphi, dtype=float)
    greater = -integrate(calculus.pairing(dphi, t.half_energy_flux), ctx.measure)
    lesser = integrate(phi * np.where(t.mask, t.lap_change + K * t.norm_sq + t.improved, 0.0), ctx.measure)
    return _report("integrated_bochner", scenario, lesser, greater, tol, t0,
                   details={"certified_K": cert, "K": K, "empty_support": not t.mask.any()})


def _require_normalized(ctx):
    heatflow._require_normalized(ctx.measure)


def check_integrated_estimate(ctx, u, K: float, tol: float = 0.0, scenario: str = "",
                  certified: float | None = None) -> InequalityReport:
    """int F^2(grad u) <= (1/K) (int (Lap u)^2 - int g_{grad u}(grad F, grad F))."""
    t0 = time.perf_counter()
    _require_normalized(ctx)
    cert = certify(ctx, K, certified)
    if K <= 0:
        raise HypothesisUnverified("integrated estimate needs K > 0")
    t = calculus.bochner_terms(ctx, u)
    lesser = integrate(t.norm_sq, ctx.measure)
    lap_sq = integrate(t.laplacian**2, ctx.measure)
    gterm = integrate(np.where(t.mask, t.g_form, 0.0), ctx.measure)
    return _report("integrated_estimate", scenario, lesser, (lap_sq - gterm) / K, tol, t0,
                   details={"certified_K": cert, "K": K, "laplacian_sq": lap_sq, "g_term": gterm})


def check_poincare(ctx, f, K: float, with_correction: bool = False, tol: float = 0.0, scenario: str = "",
                   T: float = 5.0, dt: float | None = None, trajectory=None,
                   certified: float | None = None) -> InequalityReport:
    """Var(f) <= (1/K) int F^2(grad f) dm, optionally minus (2/K) times the correction integral."""
    t0 = time.perf_counter()
    _require_normalized(ctx)
    cert = certify(ctx, K, certified)
    if K <= 0:
        raise HypothesisUnverified("Poincare inequality needs K > 0")
    f = np.asarray(f, dtype=float)
    var = heatflow.variance(ctx.measure, f)
    plain = 2.0 * heatflow.nodal_energy(ctx, f) / K
    details = {"certified_K": cert, "K": K, "variance": var, "plain_rhs": plain}
    if not with_correction:
        return _report("poincare", scenario, var, plain, tol, t0, details=details)
    traj = trajectory if trajectory is not None else heatflow.solve_heat(ctx, f, T, dt)
    corr = heatflow.correction_integral(ctx, traj)
    corrected = plain - 2.0 * corr / K
    stronger = corrected <= plain
    details.update(correction=corr, corrected_rhs=corrected, stronger=stronger,
                   ergodic=traj.ergodic, spectral_gap=traj.spectral_gap, T=float(traj.times[-1]), dt=traj.dt)
    return _report("poincare_corrected", scenario, var, corrected, tol, t0, details=details,
                   extra_ok=stronger, artifact=traj)


def check_logsobolev(ctx, f, K: float, tol: float = 0.0, scenario: str = "",
                     certified: float | None = None) -> InequalityReport:
    """Ent(f m) <= (1/2K) int F^2(grad f)/f dm for a probability density f."""
    t0 = time.perf_counter()
    cert = certify(ctx, K, certified)
    if K <= 0:
        raise HypothesisUnverified("log-Sobolev inequality needs K > 0")
    f = np.asarray(f, dtype=float)
    ent = heatflow.entropy(ctx.measure, f)
    keep = f >= LOGSOB_FLOOR
    du = calculus.differential(ctx, f)
    s2 = norm.dual_norm(ctx.spec, ctx.points, du) ** 2
    fisher = integrate(np.where(keep, s2 / np.where(keep, f, 1.0), 0.0), ctx.measure)
    excluded = integrate(np.where(keep, 0.0, 1.0), ctx.measure)
    return _report("log_sobolev", scenario, ent, fisher / (2.0 * K), tol, t0,
                   details={"certified_K": cert, "K": K, "entropy": ent, "fisher": fisher,
                            "excluded_mass": excluded})


def check_gamma2_scaling(ctx, h, a: float, tol: float = 0.0, scenario: str = "", region=None) -> InequalityReport:
    """Residuals of the e^{ah} identities for gradient, Laplacian and Gamma2.

    Gamma2(e^{ah}) = a^2 e^{2ah} {Gamma2(h) + a d[F^2(grad h)](grad h) + a^2 F^4(grad h)}
    is assembled with the left side on u = e^{ah} and the right side from h.
    Residuals are relative to the largest right-hand value on the evaluation nodes.
    """
    t0 = time.perf_counter()
    if not 0 < a <= 10:
        raise ValueError("a must lie in (0, 10]")
    h = np.asarray(h, dtype=float)
    if a * float(np.max(h)) > 300:
        raise OverflowRange("e^{ah} leaves the floating-point range")
    ea = np.exp(a * h)
    th = calculus.bochner_terms(ctx, h)
    tu = calculus.bochner_terms(ctx, ea)
    nodes = _evaluation_nodes(th.mask & tu.mask, region)
    if not nodes.any():
        return _report("gamma2_scaling", scenario, 0.0, 0.0, tol, t0,
                       details={"empty_support": True, "a": a})
    dF2 = calculus.pairing(calculus.differential(ctx, th.norm_sq), th.grad)
    rhs = a * a * ea**2 * (th.gamma2 + a * dF2 + a * a * th.norm_sq**2)
    grad_rhs = a * ea[..., None] * th.grad
    lap_rhs = a * ea * (th.laplacian + a * th.norm_sq)

    def rel(lhs, ref):
        diff = np.abs(lhs - ref)
        if diff.ndim > nodes.ndim:
            diff, ref = diff.max(axis=-1), np.abs(ref).max(axis=-1)
        scale = max(float(np.max(np.abs(ref)[nodes])), 1e-300)
        return float(np.max(diff[nodes])) / scale

    r_g2 = rel(tu.gamma2, rhs)
    r_grad = rel(tu.grad, grad_rhs)
    r_lap = rel(tu.laplacian, lap_rhs)
    worst = max(r_g2, r_grad, r_lap)
    return _report("gamma2_scaling", scenario, worst, 0.0, tol, t0,
                   details={"a": a, "gamma2_residual": r_g2, "gradient_residual": r_grad,
                            "laplacian_residual": r_lap, "nodes": int(nodes.sum())})


def check_entropy_condition(ctx, u, C: float, tol: float = 0.0, scenario: str = "") -> InequalityReport:
    """int u F^2(grad log u) dm <= C int u Gamma2(log u) dm for positive u."""
    t0 = time.perf_counter()
    u = np.asarray(u, dtype=float)
    if float(np.min(u)) < POSITIVE_FLOOR:
        raise NotPositive(f"min u = {float(np.min(u)):.3g} below {POSITIVE_FLOOR:g}")
    lu = np.log(u)
    t = calculus.bochner_terms(ctx, lu)
    lesser = integrate(u * t.norm_sq, ctx.measure)
    greater = C * integrate(u * np.where(t.mask, t.gamma2, 0.0), ctx.measure)
    return _report("entropy_condition", scenario, lesser, greater, tol, t0, details={"C": C})


def _clipped_integral_1d(chart, q, r, lo, hi):
    """Integral of the piecewise-linear q over {lo < r <= hi} with r linear per cell."""
    h = chart.spacing[0]
    qa, qb, ra, rb = q[:-1], q[1:], r[:-1], r[1:]
    dr = rb - ra
    with np.errstate(divide="ignore", invalid="ignore"):
        s_lo = np.where(dr != 0, (lo - ra) / dr, np.where(ra > lo, -np.inf, np.inf))
        s_hi = np.where(dr != 0, (hi - ra) / dr, np.where(ra <= hi, np.inf, -np.inf))
    up = dr >= 0
    # r increasing: need s > s_lo and s <= s_hi; decreasing: the reverse
    start = np.where(up, s_lo, s_hi)
    stop = np.where(up, s_hi, s_lo)
    start = np.clip(np.nan_to_num(start, nan=0.0), 0.0, 1.0)
    stop = np.clip(np.nan_to_num(stop, nan=1.0), 0.0, 1.0)
    stop = np.maximum(stop, start)
    # exact integral of qa + (qb - qa) s over [start, stop]
    seg = (stop - start) * qa + 0.5 * (stop**2 - start**2) * (qb - qa)
    return float(h * np.sum(seg))


def _clipped_integral_2d(ctx, q, p_point, lo, hi, sub=8):
    chart = ctx.chart
    h1, h2 = chart.spacing
    offs = (np.arange(sub) + 0.5) / sub - 0.5
    ox, oy = np.meshgrid(offs * h1, offs * h2, indexing="ij")
    pts = ctx.points
    frac = np.zeros(chart.shape)
    for dx, dy in zip(ox.ravel(), oy.ravel()):
        sp_ = pts + np.array([dx, dy])
        rr = ctx.spec(sp_, sp_ - p_point)
        frac += (rr > lo) & (rr <= hi)
    frac /= sub * sub
    return float(np.sum(q * frac * chart.weights))


def check_volume_bound(ctx, p, R: float, K: float, r_mins, tol: float = 0.0, scenario: str = "",
                       distributional: bool = False, certified: float | None = None) -> InequalityReport:
    """vol(B_p(R)) <= (1/K) int_{B_p(R), r > r_min} (Delta r)^2 dm with classical Delta r.

    Informational (``audit_only``): the report carries the right side for
    every ``r_min``, its fitted slope against log(1/r_min), and the excess
    vol - rhs.  With ``distributional`` the point mass of Delta r at p makes
    the right side infinite and the report is flagged divergent.
    """
    t0 = time.perf_counter()
    cert = certify(ctx, K, certified)
    if K <= 0:
        raise HypothesisUnverified("volume bound needs K > 0")
    d = curvature.distance_field(ctx, p)
    chart = ctx.chart
    hmax = max(chart.spacing)
    r_mins = sorted(float(v) for v in r_mins)
    if r_mins[0] < 3 * hmax - 1e-12:
        raise ValueError(f"r_min must be at least 3h = {3 * hmax:g}")
    dens = ctx.measure.density
    p_point = ctx.points[d.base]
    if chart.dim == 2:
        edge = min(min(abs(p_point[i] - chart.lower[i]), abs(chart.lower[i] + chart.lengths[i] - p_point[i]))
                   for i in range(2))
        reach = R / max(ctx.spec(np.zeros(2), norm.unit_circle(64)).min(), 1e-300)
        if reach > edge - 4 * hmax:
            raise ValueError("geodesic ball reaches the chart edge")
        vol = _clipped_integral_2d(ctx, dens, p_point, -1.0, R)
        rhs = [_clipped_integral_2d(ctx, d.laplacian**2 * dens, p_point, rm, R) / K for rm in r_mins]
    else:
        if chart.periodic:
            raise ValueError("1D volume audits need an interval or line chart")
        vol = _clipped_integral_1d(chart, dens, d.r, -1.0, R)
        rhs = [_clipped_integral_1d(chart, d.laplacian**2 * dens, d.r, rm, R) / K for rm in r_mins]
    n = chart.dim
    logs = np.log(1.0 / np.array(r_mins))
    slope = float(np.polyfit(logs, rhs, 1)[0]) if len(r_mins) > 1 else math.nan
    expected = (n - 1) ** 2 * 2 * math.pi * float(dens[d.base]) / K
    details = {
        "certified_K": cert, "K": K, "R": R, "r_mins": r_mins, "rhs_values": rhs,
        "margins": [v - vol for v in rhs], "excess": vol - rhs[0], "volume": vol,
        "log_slope": slope, "expected_log_slope": expected,
        "density_at_p": float(dens[d.base]), "eikonal_residual": d.eikonal_residual,
        "reading": "distributional" if distributional else "classical",
    }
    if distributional:
        return _report("volume_bound", scenario, vol, math.inf, tol, t0, audit_only=True, divergent=True,
                       details=details)
    return _report("volume_bound", scenario, vol, rhs[0], tol, t0, audit_only=True, details=details)


def error_report(claim: str, scenario: str, exc: Exception) -> InequalityReport:
    """Failed report standing in for a checker that raised."""
    kind = type(exc).__name__ if isinstance(exc, (FinslerAuditError, ValueError)) else "Error"
    return InequalityReport(claim, scenario, math.nan, math.nan, math.nan, 0.0, False, 0.0,
                            details={"error": kind, "message": str(exc)})


IDENTITIES = ("gradient_consistency", "linearized_symmetry", "product_rule", "chain_rule", "weak_laplacian")


def identity_residual(ctx, name: str, u, f=None, g=None, region=None) -> float:
    """Max node residual of one operator identity on ``region`` (weak form: the scalar residual).

    gradient_consistency  grad^{grad u} u = grad u and Lap^{grad u} u = Lap u
    linearized_symmetry   df2(grad^{grad u} f1) = df1(grad^{grad u} f2)
    product_rule          div(f grad u) = f Lap u + df(grad u)
    chain_rule            Lap^{grad u} f^2 = 2 f Lap^{grad u} f + 2 g_{grad u}(grad^{grad u} f, grad^{grad u} f)
    weak_laplacian        int f Lap u dm + int df(grad u) dm = 0
    """
    u = np.asarray(u, dtype=float)
    V = calculus.gradient(ctx, u)
    mask = calculus.support_mask(ctx, u)
    nodes = _evaluation_nodes(mask, region)
    if name == "weak_laplacian":
        return abs(calculus.weak_laplacian_residual(ctx, u, f))
    if name == "gradient_consistency":
        a = np.max(np.abs(calculus.linearized_gradient(ctx, V, u) - V), axis=-1)
        b = np.abs(calculus.linearized_laplacian(ctx, V, u) - calculus.laplacian(ctx, u))
        res = np.maximum(a, b)
    elif name == "linearized_symmetry":
        lhs = calculus.pairing(calculus.differential(ctx, g), calculus.linearized_gradient(ctx, V, f))
        rhs = calculus.pairing(calculus.differential(ctx, f), calculus.linearized_gradient(ctx, V, g))
        res = np.abs(lhs - rhs)
    elif name == "product_rule":
        lhs = calculus.divergence(ctx, f[..., None] * V)
        rhs = f * calculus.divergence(ctx, V) + calculus.pairing(calculus.differential(ctx, f), V)
        res = np.abs(lhs - rhs)
    elif name == "chain_rule":
        X = calculus.linearized_gradient(ctx, V, f)
        lhs = calculus.linearized_laplacian(ctx, V, f * f)
        rhs = 2 * f * calculus.linearized_laplacian(ctx, V, f) + 2 * calculus.g_inner(ctx, V, X, X)
        res = np.abs(lhs - rhs)
    else:
        raise ValueError(f"unknown identity {name!r}")
    return float(np.max(res[nodes])) if nodes.any() else 0.0


def check_identity(ctx, name: str, u, f=None, g=None, tol: float = 0.0, scenario: str = "",
                   region=None) -> InequalityReport:
    t0 = time.perf_counter()
    res = identity_residual(ctx, name, u, f, g, region)
    return _report(name, scenario, res, 0.0, tol, t0, details={"residual": res})


def check_duality(ctx, samples: int = 1000, seed: int = 0, tol_roundtrip: float = 1e-8,
                  tol_tensor: float = 1e-5, scenario: str = "") -> list:
    """Legendre round trip, norm preservation and g* = g^{-1} on random (x, y)."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    spec = ctx.spec
    pts = ctx.points.reshape(-1, spec.dimension)
    x = pts[rng.integers(0, len(pts), samples)]
    y = rng.normal(size=(samples, spec.dimension))
    y *= rng.uniform(0.2, 3.0, size=(samples, 1)) / np.linalg.norm(y, axis=-1, keepdims=True)
    xi = norm.legendre(spec, x, y)
    back = norm.legendre_inv(spec, x, xi)
    Fy = spec(x, y)
    rt = float(np.max(spec(x, back - y) if spec.kind == "riemannian" else np.linalg.norm(back - y, axis=-1) / Fy))
    pres = float(np.max(np.abs(norm.dual_norm(spec, x, xi) - Fy) / Fy))
    sub = min(samples, 100)
    tens = max(norm.check_dual_tensor(spec, x[i], y[i]) for i in range(sub))
    return [
        _report("legendre_roundtrip", scenario, rt, 0.0, tol_roundtrip, t0, details={"samples": samples}),
        _report("norm_preservation", scenario, pres, 0.0, tol_roundtrip, t0, details={"samples": samples}),
        _report("dual_tensor", scenario, tens, 0.0, tol_tensor, t0, details={"samples": sub}),
    ]


def check_heat_diagnostics(ctx, u0, T: float, dt: float, scenario: str = "", tol_mass: float = 1e-10,
                           trajectory=None) -> list:
    """Phi' = -4E and Phi'' = 4||Lap u||^2 (relative, tolerance 5 dt) and per-step mass drift."""
    t0 = time.perf_counter()
    traj = trajectory if trajectory is not None else heatflow.solve_heat(ctx, u0, T, dt, track_g=False)
    diag = heatflow.phi_diagnostics(traj)
    rate = heatflow.decay_rate(ctx, traj)
    common = {"decay_rate": rate, "spectral_gap": traj.spectral_gap, "ergodic": traj.ergodic}
    return [
        _report("heat_phi_first", scenario, diag.first_error, 0.0, diag.tolerance, t0, details=common,
                artifact=traj),
        _report("heat_phi_second", scenario, diag.second_error, 0.0, diag.tolerance, t0, details=common),
        _report("heat_mass", scenario, traj.mass_drift(), 0.0, tol_mass, t0, details=common),
    ]


def check_curvature_scan(ctx, expected: float, tol: float = 0.0, samples: int = SCAN_SAMPLES,
                         scenario: str = "") -> InequalityReport:
    """|K_est - expected| for the sampled bound."""
    t0 = time.perf_counter()
    reports = curvature.scan_reports(ctx.spec, ctx.measure, samples)
    K_est = float(min(r.ratio for r in reports))
    rep = _report("curvature_bound", scenario, abs(K_est - expected), 0.0, tol, t0,
                  details={"K_est": K_est, "expected": expected, "samples": len(reports)})
    rep.artifact = reports
    return rep
