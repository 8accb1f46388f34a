"""Model charts, measures, stencils and quadrature.

Scalar fields are plain arrays shaped like ``chart.shape``; vector fields
carry a trailing axis of length ``chart.dim``.  Three chart kinds exist:

``periodic_box``
    uniform vertex grid on a 1D or 2D torus, 4th-order central stencils and
    the periodic rectangle rule.
``weighted_interval``
    cell-centred grid on [a, b] (nodes at a + (k + 1/2) h), 2nd-order central
    stencils with one-sided closure, midpoint rule.  The weight lives in the
    measure.
``truncated_line``
    vertex grid on [-A, A] standing in for the real line, 2nd-order stencils,
    trapezoid rule.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.special import erfc

from . import norm

MIN_RESOLUTION = 16


@dataclass(frozen=True, eq=False)
class Chart:
    kind: str
    shape: tuple[int, ...]
    lower: tuple[float, ...]
    lengths: tuple[float, ...]
    spacing: tuple[float, ...]
    reflecting: bool = False
    tail_tolerance: float | None = None
    name: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def periodic(self) -> bool:
        return self.kind == "periodic_box"

    @property
    def cell_centered(self) -> bool:
        return self.kind == "weighted_interval"

    @property
    def order(self) -> int:
        return 4 if self.periodic else 2

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def axis_coords(self, axis: int) -> np.ndarray:
        h, n, lo = self.spacing[axis], self.shape[axis], self.lower[axis]
        offset = 0.5 if self.cell_centered else 0.0
        return lo + (np.arange(n) + offset) * h

    @property
    def points(self) -> np.ndarray:
        grids = np.meshgrid(*[self.axis_coords(i) for i in range(self.dim)], indexing="ij")
        return np.stack(grids, axis=-1)

    @property
    def weights(self) -> np.ndarray:
        w = np.full(self.shape, float(np.prod(self.spacing)))
        if self.kind == "truncated_line":
            w[0] *= 0.5
            w[-1] *= 0.5
        return w

    def derivative(self, f, axis: int = 0, parity: str | None = None) -> np.ndarray:
        """First derivative along ``axis``.

        ``parity`` ("even"/"odd") extends the field by reflection across the
        ends of an interval chart instead of using one-sided closure.
        """
        f = np.asarray(f, dtype=float)
        h = self.spacing[axis]
        if self.periodic:
            r = lambda k: np.roll(f, -k, axis=axis)
            return (-r(2) + 8 * r(1) - 8 * r(-1) + r(-2)) / (12 * h)
        f = np.moveaxis(f, axis, 0)
        out = np.empty_like(f)
        out[1:-1] = (f[2:] - f[:-2]) / (2 * h)
        if parity is None:
            out[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h)
            out[-1] = (3 * f[-1] - 4 * f[-2] + f[-3]) / (2 * h)
        else:
            sign = 1.0 if parity == "even" else -1.0
            m = 0 if self.cell_centered else 1
            out[0] = (f[1] - sign * f[m]) / (2 * h)
            out[-1] = (sign * f[-1 - m] - f[-2]) / (2 * h)
        return np.moveaxis(out, 0, axis)

    def second_derivative(self, f, axis: int = 0) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        h = self.spacing[axis]
        if self.periodic:
            r = lambda k: np.roll(f, -k, axis=axis)
            return (-r(2) + 16 * r(1) - 30 * f + 16 * r(-1) - r(-2)) / (12 * h * h)
        f = np.moveaxis(f, axis, 0)
        out = np.empty_like(f)
        out[1:-1] = (f[2:] - 2 * f[1:-1] + f[:-2]) / h**2
        out[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / h**2
        out[-1] = (2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]) / h**2
        return np.moveaxis(out, 0, axis)

    def collar_mask(self, width: int = 3) -> np.ndarray:
        """True away from a ``width``-cell collar at non-periodic boundaries."""
        mask = np.ones(self.shape, dtype=bool)
        if not self.periodic:
            mask[:width] = False
            mask[-width:] = False
        return mask

    def weak_cells(self):
        """Cells of the weak (flux) discretisation.

        Returns ``(grads, centers, cell_weights)``: a list of ``dim`` sparse
        matrices mapping node values to the cellwise gradient component, the
        cell reference points and their quadrature weights.  1D cells are the
        faces between neighbouring nodes; 2D cells are the two triangles of
        every grid square (piecewise-linear elements).
        """
        if self.dim == 1:
            n, h = self.shape[0], self.spacing[0]
            x = self.axis_coords(0)
            m = n if self.periodic else n - 1
            rows = np.arange(m)
            right = (rows + 1) % n
            D = sp.csr_matrix(
                (np.concatenate([-np.ones(m), np.ones(m)]) / h, (np.concatenate([rows, rows]), np.concatenate([rows, right]))),
                shape=(m, n),
            )
            centers = (x[rows] + 0.5 * h)[:, None]
            return [D], centers, np.full(m, h)
        n1, n2 = self.shape
        h1, h2 = self.spacing
        idx = np.arange(n1 * n2).reshape(n1, n2)
        i0, j0 = idx, idx
        ip = np.roll(idx, -1, axis=0)
        jp = np.roll(idx, -1, axis=1)
        ipjp = np.roll(ip, -1, axis=1)
        m = n1 * n2
        cells = np.arange(m)

        def diff(plus, minus, h, offset):
            r = np.concatenate([cells + offset, cells + offset])
            c = np.concatenate([plus.ravel(), minus.ravel()])
            v = np.concatenate([np.ones(m), -np.ones(m)]) / h
            return r, c, v

        # lower triangles (i,j),(i+1,j),(i,j+1); upper (i+1,j),(i+1,j+1),(i,j+1)
        r1, c1, v1 = diff(ip, i0, h1, 0)
        r2, c2, v2 = diff(ipjp, jp, h1, m)
        gx = sp.csr_matrix((np.concatenate([v1, v2]), (np.concatenate([r1, r2]), np.concatenate([c1, c2]))), shape=(2 * m, m))
        r1, c1, v1 = diff(jp, j0, h2, 0)
        r2, c2, v2 = diff(ipjp, ip, h2, m)
        gy = sp.csr_matrix((np.concatenate([v1, v2]), (np.concatenate([r1, r2]), np.concatenate([c1, c2]))), shape=(2 * m, m))
        pts = self.points.reshape(m, 2)
        lower = pts + np.array([h1, h2]) / 3
        upper = pts + 2 * np.array([h1, h2]) / 3
        centers = np.concatenate([lower, upper])
        return [gx, gy], centers, np.full(2 * m, 0.5 * h1 * h2)


def periodic_box(lengths, resolution, origin=None, name: str = "") -> Chart:
    lengths = tuple(float(v) for v in np.atleast_1d(lengths))
    res = tuple(int(v) for v in np.broadcast_to(resolution, (len(lengths),)))
    if len(lengths) not in (1, 2):
        raise ValueError("periodic box must be 1D or 2D")
    if min(res) < MIN_RESOLUTION or min(lengths) <= 0:
        raise ValueError(f"need positive periods and resolution >= {MIN_RESOLUTION}")
    lower = tuple(np.zeros(len(lengths)) if origin is None else np.broadcast_to(origin, (len(lengths),)).astype(float))
    spacing = tuple(L / n for L, n in zip(lengths, res))
    return Chart("periodic_box", res, lower, lengths, spacing, name=name or f"torus{len(lengths)}d")


def weighted_interval(a: float, b: float, resolution: int, reflecting: bool = True, name: str = "") -> Chart:
    if resolution < MIN_RESOLUTION or not b > a:
        raise ValueError(f"need b > a and resolution >= {MIN_RESOLUTION}")
    h = (b - a) / resolution
    return Chart("weighted_interval", (resolution,), (a,), (b - a,), (h,), reflecting=reflecting, name=name or "interval")


def truncated_line(half_width: float, resolution: int, tail_tolerance: float = 1e-12, name: str = "") -> Chart:
    if resolution < MIN_RESOLUTION or half_width <= 0:
        raise ValueError(f"need positive half-width and resolution >= {MIN_RESOLUTION}")
    h = 2 * half_width / (resolution - 1)
    return Chart("truncated_line", (resolution,), (-half_width,), (2 * half_width,), (h,),
                 tail_tolerance=tail_tolerance, name=name or "line")


@dataclass(frozen=True, eq=False)
class MeasureSpec:
    """dm = exp(log_density) dx, optionally with analytic log-density and gradient."""

    chart: Chart
    log_density: np.ndarray
    normalized: bool
    log_density_fn: Callable | None = None
    log_density_grad: Callable | None = None
    name: str = ""

    @property
    def density(self) -> np.ndarray:
        return np.exp(self.log_density)

    def density_at(self, x) -> np.ndarray:
        if self.log_density_fn is None:
            raise ValueError("measure has no analytic log-density")
        return np.exp(self.log_density_fn(np.asarray(x, dtype=float)))

    def grad_log_density(self) -> np.ndarray:
        """d(log density) at the nodes; analytic when available."""
        if self.log_density_grad is not None:
            return np.asarray(self.log_density_grad(self.chart.points), dtype=float)
        return np.stack([self.chart.derivative(self.log_density, i) for i in range(self.chart.dim)], axis=-1)

    def mass(self) -> float:
        return float(np.sum(self.chart.weights * self.density))


def make_measure(chart: Chart, log_density_fn: Callable, grad_fn: Callable | None = None,
                 normalize: bool = True, name: str = "") -> MeasureSpec:
    """Sample an analytic log-density; if ``normalize``, shift it so the discrete mass is 1."""
    phi = np.asarray(log_density_fn(chart.points), dtype=float)
    shift = 0.0
    if normalize:
        top = phi.max()
        shift = -(top + math.log(float(np.sum(chart.weights * np.exp(phi - top)))))
        phi = phi + shift
    fn = (lambda x, f=log_density_fn, s=shift: f(x) + s)
    return MeasureSpec(chart, phi, normalize, fn, grad_fn, name)


def lebesgue(chart: Chart, normalize: bool = True) -> MeasureSpec:
    return make_measure(chart, lambda x: np.zeros(x.shape[:-1]), lambda x: np.zeros(x.shape), normalize, "lebesgue")


def gaussian(chart: Chart, K: float = 1.0, normalize: bool = True, center=None) -> MeasureSpec:
    """Phi = -K |x - center|^2 / 2."""
    c = np.zeros(chart.dim) if center is None else np.asarray(center, dtype=float)
    return make_measure(
        chart,
        lambda x: -0.5 * K * np.sum((x - c) ** 2, axis=-1),
        lambda x: -K * (x - c),
        normalize,
        f"gaussian K={K:g}",
    )


def partial_derivatives(chart: Chart, field_values, order: int = 1, parity: str | None = None) -> np.ndarray:
    """Gradient (order 1, shape (..., n)) or Hessian (order 2, shape (..., n, n))."""
    f = np.asarray(field_values, dtype=float)
    if order == 1:
        return np.stack([chart.derivative(f, i, parity) for i in range(chart.dim)], axis=-1)
    if order != 2:
        raise ValueError("order must be 1 or 2")
    n = chart.dim
    out = np.empty(f.shape + (n, n))
    for i in range(n):
        out[..., i, i] = chart.second_derivative(f, i)
        for j in range(i + 1, n):
            out[..., i, j] = out[..., j, i] = chart.derivative(chart.derivative(f, i), j)
    return out


def integrate(field_values, measure: MeasureSpec) -> float:
    """Quadrature of field * exp(Phi) with the chart's fixed rule."""
    chart = measure.chart
    vals = np.asarray(field_values, dtype=float) * chart.weights * measure.density
    return float(np.sum(vals.ravel()))


def gaussian_tail_mass(half_width: float, K: float) -> float:
    """Mass of the normalised Gaussian exp(-K x^2/2) outside [-A, A]."""
    return float(erfc(half_width * math.sqrt(K / 2)))


def make_gaussian_line(K: float = 1.0, resolution: int = 2001, half_width: float | None = None,
                       tail_tolerance: float = 1e-12, normalize: bool = True):
    """Truncated line with the Gaussian measure; returns (chart, spec, measure)."""
    A = 8.0 / math.sqrt(K) if half_width is None else float(half_width)
    tail = gaussian_tail_mass(A, K)
    if tail > tail_tolerance:
        raise ValueError(f"half-width {A} leaves tail mass {tail:.3g} > {tail_tolerance:g}")
    chart = truncated_line(A, resolution, tail_tolerance, name=f"gaussian-line K={K:g}")
    chart.meta.update(tail_mass=tail, curvature_constant=K)
    return chart, norm.euclidean(1), gaussian(chart, K, normalize)


def make_sphere_reduction(resolution: int = 256):
    """Rotationally symmetric functions on the unit 2-sphere as a weighted interval.

    Nodes sit at theta_k = (k + 1/2) pi / N, so the poles are never nodes.
    The chart metadata records the ambient facts (Ric = 1 times F^2, measure
    equal to the normalised volume, Laplacian u'' + cot(theta) u').
    """
    if resolution < 64:
        raise ValueError("sphere reduction needs resolution >= 64")
    chart = weighted_interval(0.0, math.pi, resolution, reflecting=True, name="sphere-reduction")
    chart.meta.update(
        ambient_ricci=1.0,
        ambient_dimension=2,
        weight_is_volume=True,
        laplacian="u'' + cot(theta) u'",
    )
    measure = make_measure(
        chart,
        lambda x: np.log(np.abs(np.sin(x[..., 0]))) - math.log(2.0),
        lambda x: (np.cos(x[..., 0]) / np.sin(x[..., 0]))[..., None],
        normalize=True,
        name="sphere volume",
    )
    return chart, norm.euclidean(1), measure


def write_field_csv(path, chart: Chart, name: str, values) -> None:
    """Node coordinates and values; the first row names the chart and field."""
    values = np.asarray(values, dtype=float)
    pts = chart.points.reshape(-1, chart.dim)
    vals = values.reshape(pts.shape[0], -1)
    coord_cols = [f"x{i}" for i in range(chart.dim)]
    value_cols = [name] if vals.shape[1] == 1 else [f"{name}[{i}]" for i in range(vals.shape[1])]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"chart={chart.name}", f"kind={chart.kind}", f"field={name}", f"shape={'x'.join(map(str, chart.shape))}"])
        w.writerow(coord_cols + value_cols)
        for p, v in zip(pts, vals):
            w.writerow([repr(float(c)) for c in p] + [repr(float(c)) for c in v])


def read_field_csv(path):
    """Inverse of :func:`write_field_csv`; returns (header dict, points, values)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = dict(item.split("=", 1) for item in rows[0])
    cols = rows[1]
    ndim = sum(c.startswith("x") and c[1:].isdigit() for c in cols)
    data = np.array([[float(v) for v in r] for r in rows[2:]])
    shape = tuple(int(s) for s in header["shape"].split("x"))
    pts = data[:, :ndim].reshape(shape + (ndim,))
    vals = data[:, ndim:]
    vals = vals.reshape(shape) if vals.shape[1] == 1 else vals.reshape(shape + (vals.shape[1],))
    return header, pts, vals
