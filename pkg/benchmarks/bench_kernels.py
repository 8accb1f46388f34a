"""Compare the compiled and numpy kernels on the two hot paths.

    python benchmarks/bench_kernels.py [--samples 20000] [--grid 128] [--repeat 5]

Legendre inversion is timed on a batch of random Randers data; PCG on the
heat-step matrix (M + dt K) of the sphere reduction and a Randers torus.
"""
import argparse
import math
import timeit

import numpy as np
import scipy.sparse as sp

from finsler_audit import calculus, mesh, norm
from finsler_audit._kernels import _pykernels

try:
    from finsler_audit._kernels import _ckernels
except ImportError:
    _ckernels = None


def randers_batch(m, seed=0):
    rng = np.random.default_rng(seed)
    L = rng.normal(size=(m, 2, 2)) * 0.3 + np.eye(2)
    a = np.ascontiguousarray(L @ np.swapaxes(L, 1, 2) + 0.2 * np.eye(2))
    b = rng.normal(size=(m, 2))
    bn = np.sqrt(np.einsum("mi,mij,mj->m", b, np.linalg.inv(a), b))
    b = np.ascontiguousarray(b * (rng.uniform(0.0, 0.9, m) / bn)[:, None])
    xi = _pykernels.randers_legendre(a, b, rng.normal(size=(m, 2)))
    return a, b, xi


def heat_matrix(ctx, dt):
    op = calculus.weak_operator(ctx)
    u = np.sum(np.sin(ctx.points), axis=-1)
    K = calculus.weak_stiffness(ctx, op, u)
    A = (sp.diags(op.node_measure) + dt * K).tocsr()
    return A, op.node_measure * np.ravel(u), np.ravel(u)


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=20000)
    ap.add_argument("--grid", type=int, default=128)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = {"python": _pykernels}
    if _ckernels is not None:
        backends["cython"] = _ckernels
    else:
        print("compiled kernels not built; timing the numpy versions only")

    a, b, xi = randers_batch(args.samples)
    rows = []
    for name, mod in backends.items():
        rows.append(("legendre_inv", f"{args.samples} samples", name,
                     best(lambda: mod.randers_legendre_inv(a, b, xi, 1e-14, 100), args.repeat)))

    _, spec, m = mesh.make_sphere_reduction(4096)
    sphere = calculus.make_context(spec, m)
    box = mesh.periodic_box([2 * math.pi] * 2, [args.grid] * 2)
    torus = calculus.make_context(norm.randers(np.array([0.5, 0.0]), 2), mesh.lebesgue(box))
    for label, ctx, dt in (("sphere N=4096", sphere, 1e-3), (f"torus {args.grid}^2", torus, 1e-2)):
        A, rhs, x0 = heat_matrix(ctx, dt)
        ip, ix = A.indptr.astype(np.int64), A.indices.astype(np.int64)
        for name, mod in backends.items():
            rows.append(("pcg", label, name,
                         best(lambda: mod.pcg(ip, ix, A.data, rhs, np.zeros_like(rhs), 1e-12, 10000), args.repeat)))

    print(f"{'kernel':14s} {'problem':18s} {'backend':8s} {'seconds':>10s} {'speedup':>8s}")
    ref = {(k, p): t for k, p, n, t in rows if n == "python"}
    for k, p, n, t in rows:
        print(f"{k:14s} {p:18s} {n:8s} {t:10.5f} {ref[(k, p)] / t:8.1f}x")


if __name__ == "__main__":
    main()
