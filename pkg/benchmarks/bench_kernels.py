"""Backend benchmark: pure-NumPy vs compiled singular-value kernels.

Times the per-shift cost of the three s_min kernels on representative
workloads (a finite-difference tridiagonal section, a Schur-reduced dense
section) for both backends, plus the full-SVD reference.  Run manually:

    python benchmarks/bench_kernels.py [--n-tridiag 2000] [--n-dense 600]
                                       [--shifts 200]
"""

import argparse
import time

import numpy as np
import scipy.linalg as sla

from nonherm import discretize
from nonherm._kernels import _smin_py

try:
    from nonherm._kernels import _smin_cy
except ImportError:
    _smin_cy = None


def _time_per_call(fn, args_list, repeat=3):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        for args in args_list:
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / len(args_list))
    return best


def _row(label, t_py, t_cy, t_ref=None):
    cy = f"{t_cy * 1e3:9.3f}" if t_cy is not None else "      n/a"
    speed = f"{t_py / t_cy:6.1f}x" if t_cy else "    -  "
    ref = f"   svd {t_ref * 1e3:9.3f} ms" if t_ref is not None else ""
    print(f"{label:28s} py {t_py * 1e3:9.3f} ms   cy {cy} ms  {speed}{ref}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n-tridiag", type=int, default=2000)
    ap.add_argument("--n-dense", type=int, default=600)
    ap.add_argument("--shifts", type=int, default=200)
    args = ap.parse_args()

    p = discretize.parse_potential("i*x^3")
    shifts = np.linspace(0.5, 25.0, args.shifts) + 1j * np.linspace(
        0.2, 12.0, args.shifts)

    d = discretize.Discretization("fd", args.n_tridiag, half_width=12.0)
    a = discretize.build_matrix(p, d).matrix
    dl = np.ascontiguousarray(a.diagonal(-1))
    dm = np.ascontiguousarray(a.diagonal())
    du = np.ascontiguousarray(a.diagonal(1))
    calls = [(dl, dm - z, du) for z in shifts]
    t_py = _time_per_call(_smin_py.smin_tridiag, calls)
    t_cy = (_time_per_call(_smin_cy.smin_tridiag, calls)
            if _smin_cy else None)
    _row(f"tridiag n={args.n_tridiag}", t_py, t_cy)

    d = discretize.Discretization("hermite", args.n_dense, hermite_scale=2.5)
    a = discretize.build_matrix(p, d).matrix
    t = np.asfortranarray(sla.schur(a, output="complex")[0])
    idx = np.arange(args.n_dense)

    def shifted(z):
        tz = t.copy(order="F")
        tz[idx, idx] -= z
        return tz

    calls = [(shifted(z),) for z in shifts[:: max(1, args.shifts // 40)]]
    t_py = _time_per_call(_smin_py.smin_triangular, calls)
    t_cy = (_time_per_call(_smin_cy.smin_triangular, calls)
            if _smin_cy else None)
    t_ref = _time_per_call(
        lambda m: np.linalg.svd(m, compute_uv=False)[-1], calls)
    _row(f"triangular n={args.n_dense}", t_py, t_cy, t_ref)

    calls = [(np.asfortranarray(a - z * np.eye(args.n_dense)),)
             for z in shifts[:: max(1, args.shifts // 10)]]
    t_py = _time_per_call(_smin_py.smin_dense, calls)
    t_cy = (_time_per_call(_smin_cy.smin_dense, calls)
            if _smin_cy else None)
    t_ref = _time_per_call(
        lambda m: np.linalg.svd(m, compute_uv=False)[-1], calls)
    _row(f"dense n={args.n_dense}", t_py, t_cy, t_ref)


if __name__ == "__main__":
    main()
