"""Scenario runner.

A scenario file is an INI text file with these sections:

``[scenario]``   name, description, claims, runtime (expected seconds)
``[chart]``      kind = sphere | gaussian-line | periodic-box | interval | line, plus parameters
``[metric]``     kind = euclidean | riemannian | randers; metric = "a11 a12; a21 a22"; form = "b1 b2"
``[measure]``    kind = volume | lebesgue | gaussian | trig, K, center, amplitude, normalize
``[functions]``  name = library expression, e.g. ``gaussian-tilt t=0.5``
``[check NAME]`` checker = ..., checker arguments, tol

Usage::

    finsler-audit list [--json]
    finsler-audit run scenario.cfg [--output DIR] [--seed S] [--jobs N] [--svg] [--json]
    finsler-audit verify-all [--output DIR] [--seed S] [--jobs N] [--svg] [--json]
"""
from __future__ import annotations

import argparse
import configparser
import csv
import json
import math
import os
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from importlib import resources

import numpy as np

from . import audit, calculus, curvature, mesh, norm
from .errors import ConfigError, FinslerAuditError

SUMMARY_FIELDS = ("check", "claim", "scenario", "lhs", "rhs", "margin", "tolerance", "pass", "audit_only")

CHART_KEYS = {
    "sphere": {"resolution"},
    "gaussian-line": {"resolution", "K", "half_width", "normalize"},
    "periodic-box": {"lengths", "resolution", "origin"},
    "interval": {"a", "b", "resolution", "reflecting"},
    "line": {"half_width", "resolution"},
}
METRIC_KEYS = {"kind", "metric", "form"}
MEASURE_KEYS = {"kind", "K", "center", "amplitude", "normalize"}
CHECK_KEYS = {
    "duality": {"samples", "tol", "tol_tensor"},
    "identity": {"identity", "u", "f", "g", "region", "tol"},
    "bochner_pointwise": {"u", "K", "variant", "region", "collar", "tol"},
    "bochner_integrated": {"u", "test_function", "K", "tol"},
    "integrated_estimate": {"u", "K", "tol"},
    "poincare": {"f", "K", "with_correction", "T", "dt", "tol"},
    "logsobolev": {"f", "K", "tol"},
    "gamma2_scaling": {"h", "a", "region", "collar", "tol"},
    "entropy_condition": {"u", "C", "tol"},
    "volume_bound": {"p", "R", "K", "r_min", "r_min_cells", "distributional", "reference_excess", "tol"},
    "heat_diagnostics": {"u", "T", "dt", "tol_mass"},
    "curvature_scan": {"expected", "samples", "tol"},
}


# ---------------------------------------------------------------------------
# config parsing


class Scenario:
    def __init__(self, path, cp: configparser.ConfigParser, text: str):
        self.path = str(path)
        self.cp = cp
        self.text = text
        sc = self.section("scenario")
        self.name = sc.get("name") or os.path.splitext(os.path.basename(path))[0]
        self.description = sc.get("description", "")
        self.claims = [c.strip() for c in sc.get("claims", "").split(",") if c.strip()]
        self.runtime = sc.get("runtime", "")
        self.checks = [s.split(None, 1)[1].strip() for s in cp.sections() if s.startswith("check ")]

    def line_of(self, section, key=None) -> int:
        lines = self.text.splitlines()
        in_sec = False
        for i, line in enumerate(lines, 1):
            s = line.strip()
            if s.startswith("["):
                in_sec = s == f"[{section}]"
                if in_sec and key is None:
                    return i
                continue
            if in_sec and key is not None and re.match(rf"{re.escape(key)}\s*[=:]", s, re.I):
                return i
        return 0

    def error(self, section, key, msg):
        line = self.line_of(section, key)
        where = f"{self.path}:{line}" if line else self.path
        loc = f"[{section}]" + (f" {key}" if key else "")
        return ConfigError(f"{where}: {loc}: {msg}")

    def section(self, name):
        return self.cp[name] if self.cp.has_section(name) else {}

    def require_keys(self, section, allowed):
        for key in self.cp[section] if self.cp.has_section(section) else ():
            if key not in {k.lower() for k in allowed}:
                raise self.error(section, key, "unknown key")


def load_scenario(path) -> Scenario:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    cp.optionxform = str.lower
    try:
        cp.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    sc = Scenario(path, cp, text)
    known = {"scenario", "chart", "metric", "measure", "functions"}
    for sec in cp.sections():
        if sec not in known and not sec.startswith("check "):
            raise sc.error(sec, None, "unknown section")
    sc.require_keys("scenario", {"name", "description", "claims", "runtime"})
    return sc


def _floats(text, n=None):
    vals = [float(v) for v in re.split(r"[\s,]+", str(text).strip()) if v]
    if n is not None and len(vals) != n:
        raise ValueError(f"expected {n} numbers, got {len(vals)}")
    return vals


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "yes", "true", "on"):
        return True
    if t in ("0", "no", "false", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# ---------------------------------------------------------------------------
# building charts, norms, measures and functions


def build_context(sc: Scenario) -> calculus.OperatorContext:
    chart_sec = sc.section("chart")
    kind = chart_sec.get("kind", "")
    if kind not in CHART_KEYS:
        raise sc.error("chart", "kind", f"unknown chart kind {kind!r}")
    sc.require_keys("chart", CHART_KEYS[kind] | {"kind"})
    sc.require_keys("metric", METRIC_KEYS)
    sc.require_keys("measure", MEASURE_KEYS)
    get = lambda key, default=None: chart_sec.get(key, default)
    try:
        measure = None
        if kind == "sphere":
            chart, _, measure = mesh.make_sphere_reduction(int(get("resolution", 256)))
        elif kind == "gaussian-line":
            hw = get("half_width")
            chart, _, measure = mesh.make_gaussian_line(
                float(get("K", 1.0)), int(get("resolution", 1601)), None if hw is None else float(hw),
                normalize=_bool(get("normalize", "yes")))
        elif kind == "periodic-box":
            lengths = _floats(get("lengths", str(2 * math.pi)))
            origin = get("origin")
            chart = mesh.periodic_box(lengths, _floats(get("resolution", "128")),
                                      None if origin is None else _floats(origin, len(lengths)), name=sc.name)
        elif kind == "interval":
            chart = mesh.weighted_interval(float(get("a", 0.0)), float(get("b", 1.0)), int(get("resolution", 256)),
                                           _bool(get("reflecting", "yes")))
        else:
            chart = mesh.truncated_line(float(get("half_width", 8.0)), int(get("resolution", 1601)))
    except ValueError as exc:
        raise sc.error("chart", None, str(exc)) from None
    spec = _build_metric(sc, chart.dim)
    if sc.cp.has_section("measure") or measure is None:
        measure = _build_measure(sc, chart, measure)
    try:
        return calculus.make_context(spec, measure)
    except (ValueError, FinslerAuditError) as exc:
        raise sc.error("metric", None, str(exc)) from None


def _build_metric(sc, n):
    sec = sc.section("metric")
    kind = sec.get("kind", "euclidean")
    try:
        if kind == "euclidean":
            return norm.euclidean(n)
        metric = None
        if "metric" in sec:
            rows = [_floats(r, n) for r in sec["metric"].split(";")]
            metric = np.array(rows)
        if kind == "riemannian":
            return norm.riemannian(np.eye(n) if metric is None else metric, n)
        if kind == "randers":
            return norm.randers(np.array(_floats(sec.get("form", ""), n)), n, metric)
    except ValueError as exc:
        raise sc.error("metric", None, str(exc)) from None
    raise sc.error("metric", "kind", f"unknown metric kind {kind!r}")


def _build_measure(sc, chart, default):
    sec = sc.section("measure")
    kind = sec.get("kind", "lebesgue" if default is None else "default")
    normalize = _bool(sec.get("normalize", "yes"))
    try:
        if kind in ("default", "volume"):
            if default is None:
                raise ValueError("this chart has no built-in measure")
            return default
        if kind == "lebesgue":
            return mesh.lebesgue(chart, normalize)
        if kind == "gaussian":
            center = sec.get("center")
            return mesh.gaussian(chart, float(sec.get("K", 1.0)), normalize,
                                 None if center is None else _floats(center, chart.dim))
        if kind == "trig":
            amp = float(sec.get("amplitude", 0.3))
            if chart.dim == 1:
                fn = lambda x: amp * np.sin(x[..., 0])
                gr = lambda x: (amp * np.cos(x[..., 0]))[..., None]
            else:
                fn = lambda x: amp * np.sin(x[..., 0]) * np.cos(x[..., 1])
                gr = lambda x: amp * np.stack([np.cos(x[..., 0]) * np.cos(x[..., 1]),
                                               -np.sin(x[..., 0]) * np.sin(x[..., 1])], axis=-1)
            return mesh.make_measure(chart, fn, gr, normalize, "trig")
    except ValueError as exc:
        raise sc.error("measure", None, str(exc)) from None
    raise sc.error("measure", "kind", f"unknown measure kind {kind!r}")


def _params(tokens):
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise ValueError(f"expected key=value, got {tok!r}")
        k, v = tok.split("=", 1)
        out[k] = v
    return out


def library_function(expr: str, ctx: calculus.OperatorContext, seed: int) -> np.ndarray:
    """Evaluate a function-library expression on the chart nodes.

    Terms joined by `` + `` are summed.  Known names: linear, cos-theta,
    one-plus-cos, gaussian-tilt, exp-linear, trig, bump, random-smooth, constant.
    """
    pts = ctx.points
    chart = ctx.chart
    total = np.zeros(chart.shape)
    for term in expr.split(" + "):
        words = term.split()
        if not words:
            raise ValueError("empty function expression")
        name, p = words[0], _params(words[1:])
        fl = lambda key, default: float(p.pop(key, default))
        if name == "linear":
            axis = int(p.pop("axis", 0))
            val = fl("scale", 1.0) * pts[..., axis]
        elif name == "cos-theta":
            val = np.cos(pts[..., 0])
        elif name == "one-plus-cos":
            val = 1.0 + fl("eps", 0.01) * np.cos(pts[..., 0])
        elif name == "gaussian-tilt":
            t = fl("t", 0.5)
            val = np.exp(t * pts[..., 0])
            val = val / mesh.integrate(val, ctx.measure)
        elif name == "exp-linear":
            val = np.exp(fl("a", 1.0) * pts[..., 0])
        elif name == "trig":
            amp, kx, ky, ph = fl("a", 1.0), fl("kx", 1.0), fl("ky", 0.0), fl("phase", 0.0)
            arg = kx * pts[..., 0] + (ky * pts[..., 1] if chart.dim == 2 else 0.0) + ph
            val = amp * np.sin(arg)
        elif name == "bump":
            center = np.array(_floats(p.pop("center", "0"), chart.dim))
            width = fl("width", 1.0)
            rr = np.linalg.norm(pts - center, axis=-1) / width
            val = np.where(rr < 1, np.cos(0.5 * np.pi * rr) ** 2, 0.0)
        elif name == "random-smooth":
            rng = np.random.default_rng([seed, int(p.pop("seed", 0))])
            modes = int(p.pop("modes", 3))
            amp = fl("amplitude", 1.0)
            val = np.zeros(chart.shape)
            if chart.periodic:
                ks = [(i, j) for i in range(-modes, modes + 1) for j in (range(-modes, modes + 1) if chart.dim == 2 else [0])
                      if (i, j) != (0, 0)]
                for kx, ky in ks:
                    c = rng.normal(size=2) / (1.0 + kx * kx + ky * ky)
                    arg = 2 * np.pi * kx * (pts[..., 0] - chart.lower[0]) / chart.lengths[0]
                    if chart.dim == 2:
                        arg = arg + 2 * np.pi * ky * (pts[..., 1] - chart.lower[1]) / chart.lengths[1]
                    val = val + c[0] * np.cos(arg) + c[1] * np.sin(arg)
            else:
                s = (pts[..., 0] - chart.lower[0]) / chart.lengths[0]
                for k in range(1, modes + 1):
                    val = val + rng.normal() / (1.0 + k * k) * np.cos(np.pi * k * s)
            val = amp * val
        elif name == "constant":
            val = np.full(chart.shape, fl("value", 1.0))
        elif name == "one":
            val = np.ones(chart.shape)
        else:
            raise ValueError(f"unknown function {name!r}")
        if p:
            raise ValueError(f"unknown parameter(s) {sorted(p)} for {name!r}")
        total = total + val
    return total


# ---------------------------------------------------------------------------
# running checks


def _resolve_K(ctx, value):
    if str(value).strip().lower() == "scan":
        return audit.certify(ctx, -math.inf)
    return float(value)


def _region(ctx, sec, u):
    region = None
    if "region" in sec:
        region = calculus.regular_region(ctx, u, float(sec["region"]))
    if "collar" in sec:
        c = ctx.chart.collar_mask(int(sec["collar"]))
        region = c if region is None else region & c
    return region


def _node(ctx, text):
    text = str(text).strip()
    chart = ctx.chart
    if text == "center":
        return tuple(n // 2 for n in chart.shape)
    idx = tuple(int(v) for v in _floats(text))
    return idx if len(idx) == chart.dim else np.unravel_index(idx[0], chart.shape)


def run_check(sc: Scenario, ctx, name: str, funcs: dict, seed: int):
    sec = sc.cp[f"check {name}"]
    checker = sec.get("checker", "")
    if checker not in CHECK_KEYS:
        raise sc.error(f"check {name}", "checker", f"unknown checker {checker!r}")
    sc.require_keys(f"check {name}", CHECK_KEYS[checker] | {"checker"})

    def fn(key, default=None):
        ref = sec.get(key, default)
        if ref is None:
            raise sc.error(f"check {name}", key, "missing function reference")
        if ref not in funcs:
            raise sc.error(f"check {name}", key, f"unresolved function {ref!r}")
        return funcs[ref]

    tol = float(sec.get("tol", 0.0))
    if tol < 0:
        raise sc.error(f"check {name}", "tol", "tolerance must be nonnegative")
    s = sc.name
    if checker == "duality":
        return audit.check_duality(ctx, int(sec.get("samples", 1000)), seed, tol,
                                   float(sec.get("tol_tensor", 1e-5)), s)
    if checker == "identity":
        u = fn("u")
        f = fn("f") if "f" in sec else None
        g = fn("g") if "g" in sec else None
        return [audit.check_identity(ctx, sec.get("identity", ""), u, f, g, tol, s, _region(ctx, sec, u))]
    if checker == "bochner_pointwise":
        u = fn("u")
        return [audit.check_bochner_pointwise(ctx, u, _resolve_K(ctx, sec.get("K", 0)), sec.get("variant", "improved"),
                                              tol, s, _region(ctx, sec, u))]
    if checker == "bochner_integrated":
        return [audit.check_bochner_integrated(ctx, fn("u"), fn("test_function"), _resolve_K(ctx, sec.get("K", 0)),
                                               tol, s)]
    if checker == "integrated_estimate":
        return [audit.check_integrated_estimate(ctx, fn("u"), _resolve_K(ctx, sec.get("K", 1)), tol, s)]
    if checker == "poincare":
        dt = sec.get("dt")
        return [audit.check_poincare(ctx, fn("f"), _resolve_K(ctx, sec.get("K", 1)),
                                     _bool(sec.get("with_correction", "no")), tol, s, float(sec.get("T", 5.0)),
                                     None if dt is None else float(dt))]
    if checker == "logsobolev":
        return [audit.check_logsobolev(ctx, fn("f"), _resolve_K(ctx, sec.get("K", 1)), tol, s)]
    if checker == "gamma2_scaling":
        h = fn("h")
        return [audit.check_gamma2_scaling(ctx, h, float(sec.get("a", 1.0)), tol, s, _region(ctx, sec, h))]
    if checker == "entropy_condition":
        return [audit.check_entropy_condition(ctx, fn("u"), float(sec.get("C", 1.0)), tol, s)]
    if checker == "volume_bound":
        if "r_min" in sec:
            r_mins = _floats(sec["r_min"])
        else:
            r_mins = [c * max(ctx.chart.spacing) for c in _floats(sec.get("r_min_cells", "3 6 12"))]
        rep = audit.check_volume_bound(ctx, _node(ctx, sec.get("p", "center")), float(sec.get("R", 1.0)),
                                       _resolve_K(ctx, sec.get("K", 1)), r_mins, tol, s,
                                       _bool(sec.get("distributional", "no")))
        if "reference_excess" in sec:
            ref = float(sec["reference_excess"])
            rep.details["reference_excess"] = ref
            rep.details["excess_rel_error"] = abs(rep.details["excess"] - ref) / abs(ref)
        return [rep]
    if checker == "heat_diagnostics":
        dt = float(sec.get("dt", 1e-3))
        return audit.check_heat_diagnostics(ctx, fn("u"), float(sec.get("T", 1.0)), dt, s,
                                            float(sec.get("tol_mass", 1e-10)))
    # curvature_scan
    return [audit.check_curvature_scan(ctx, float(sec.get("expected", 0.0)), tol,
                                       int(sec.get("samples", audit.SCAN_SAMPLES)), s)]


def _safe(name):
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name)


def run_scenario(path, seed: int, outdir: str, svg: bool = False) -> dict:
    """Run every check of one scenario file; checker errors become failed reports."""
    t0 = time.perf_counter()
    sc = load_scenario(path)
    out = {"scenario": sc.name, "path": sc.path, "reports": [], "files": []}
    try:
        ctx = build_context(sc)
        funcs = {}
        for key, expr in sc.section("functions").items():
            try:
                funcs[key] = library_function(expr, ctx, seed)
            except ValueError as exc:
                raise sc.error("functions", key, str(exc)) from None
    except ConfigError:
        raise
    for check in sc.checks:
        try:
            reports = run_check(sc, ctx, check, funcs, seed)
        except ConfigError:
            raise
        except Exception as exc:  # recorded per scenario, the batch goes on
            reports = [audit.error_report(check, sc.name, exc)]
        for rep in reports:
            row = rep.to_dict()
            row["check"] = check
            out["reports"].append(row)
            art = rep.artifact
            if hasattr(art, "write_csv"):
                fname = f"heat_{_safe(sc.name)}_{_safe(check)}.csv"
                art.write_csv(os.path.join(outdir, fname))
                out["files"].append(fname)
                for step, field_values in sorted(art.snapshots.items()):
                    snap = f"field_{_safe(sc.name)}_{_safe(check)}_{step:06d}.csv"
                    mesh.write_field_csv(os.path.join(outdir, snap), ctx.chart, f"u(t={step * art.dt:.6g})",
                                         field_values)
                    out["files"].append(snap)
                if svg:
                    out["files"].extend(_plot_decay(art, outdir, f"heat_{_safe(sc.name)}_{_safe(check)}"))
            elif isinstance(art, list) and art and isinstance(art[0], curvature.WeightedRicciReport):
                fname = f"ricci_{_safe(sc.name)}_{_safe(check)}.csv"
                curvature.write_ricci_csv(os.path.join(outdir, fname), art)
                out["files"].append(fname)
    out["runtime"] = round(time.perf_counter() - t0, 3)
    return out


def _plot_decay(traj, outdir, stem):
    """SVG decay plot; silently skipped without a plotting backend."""
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except Exception:
        return []
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for label, y in (("energy", traj.energy), ("phi", traj.phi), ("g integral", traj.g_integral)):
        pos = y > 0
        if pos.any():
            ax.semilogy(traj.times[pos], y[pos], label=label)
    ax.set_xlabel("t")
    ax.legend()
    fig.tight_layout()
    name = f"{stem}.svg"
    fig.savefig(os.path.join(outdir, name), metadata={"Date": None})
    plt.close(fig)
    return [name]


def write_outputs(results: list, outdir: str, seed: int, configs: list) -> None:
    rows = [r for res in results for r in res["reports"]]
    doc = {"schema": audit.SCHEMA, "seed": seed, "configs": configs, "scenarios": results}
    with open(os.path.join(outdir, "report.json"), "w") as fh:
        json.dump(doc, fh, indent=2, allow_nan=False)
        fh.write("\n")
    with open(os.path.join(outdir, "summary.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_FIELDS)
        for r in rows:
            fmt = lambda v: v if isinstance(v, str) else f"{v:.10g}"
            w.writerow([r["check"], r["claim"], r["scenario"], fmt(r["lhs"]), fmt(r["rhs"]), fmt(r["margin"]),
                        fmt(r["tolerance"]), "pass" if r["pass"] else "fail", "yes" if r["audit_only"] else "no"])


def execute(paths, outdir, seed, jobs=1, svg=False, as_json=False) -> int:
    os.makedirs(outdir, exist_ok=True)
    for p in paths:
        load_scenario(p)  # fail fast on syntax errors before any work
    if jobs > 1 and len(paths) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_scenario, paths, [seed] * len(paths), [outdir] * len(paths),
                                    [svg] * len(paths)))
    else:
        results = [run_scenario(p, seed, outdir, svg) for p in paths]
    write_outputs(results, outdir, seed, [os.path.basename(p) for p in paths])
    rows = [r for res in results for r in res["reports"]]
    failed = [r for r in rows if not r["audit_only"] and not r["pass"]]
    if as_json:
        keys = ("check", "claim", "scenario", "lhs", "rhs", "margin", "tolerance", "pass", "audit_only")
        print(json.dumps({"schema": audit.SCHEMA, "seed": seed, "output": outdir, "failed": len(failed),
                          "reports": [{k: r[k] for k in keys} for r in rows]}, indent=2))
    else:
        for r in rows:
            flag = "audit" if r["audit_only"] else ("pass" if r["pass"] else "FAIL")
            print(f"{flag:5s} {r['scenario']:18s} {r['check']:24s} {r['claim']:22s} margin={r['margin']}")
        print(f"{len(rows)} reports, {len(failed)} failed; outputs in {outdir}")
    return 1 if failed else 0


def bundled_scenarios() -> list:
    root = resources.files("finsler_audit") / "scenarios"
    return sorted(str(p) for p in root.iterdir() if p.name.endswith(".cfg"))


def catalog() -> list:
    out = []
    for path in bundled_scenarios():
        sc = load_scenario(path)
        out.append({"name": sc.name, "file": os.path.basename(path), "description": sc.description,
                    "claims": sc.claims, "checks": sc.checks, "expected_runtime_s": sc.runtime})
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="finsler-audit", description="Finsler calculus audits on model charts")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", default="finsler-audit-out", help="output directory")
    common.add_argument("--seed", type=int, default=0, help="seed for random-smooth data and sampling")
    common.add_argument("--jobs", type=int, default=1, help="scenarios run in parallel")
    common.add_argument("--svg", action="store_true", help="also write SVG decay plots")
    common.add_argument("--json", action="store_true", help="print the report rows as JSON")
    p_run = sub.add_parser("run", parents=[common], help="run one scenario file")
    p_run.add_argument("config")
    sub.add_parser("verify-all", parents=[common], help="run every bundled scenario")
    p_list = sub.add_parser("list", help="list bundled scenarios")
    p_list.add_argument("--json", action="store_true", help="machine-readable catalog")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "list":
            cat = catalog()
            if args.json:
                print(json.dumps(cat, indent=2))
            else:
                for entry in cat:
                    print(f"{entry['name']:18s} ~{entry['expected_runtime_s']:>4s}s  {', '.join(entry['claims'])}")
                    if entry["description"]:
                        print(f"{'':18s} {entry['description']}")
            return 0
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        paths = [args.config] if args.command == "run" else bundled_scenarios()
        return execute(paths, args.output, args.seed, args.jobs, args.svg, args.json)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
