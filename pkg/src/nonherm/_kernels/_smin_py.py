"""NumPy/LAPACK fallback backend for the smallest-singular-value kernels.

Each kernel factors the matrix once and runs power iteration on
(A A^H)^{-1} through forward/adjoint solves; the iterate norm converges to
1/s_min^2.  Exactly singular input returns 0.0; stagnation returns the
sentinel -1.0 and the caller falls back to a full SVD.
"""

import numpy as np
from scipy.linalg import lapack as _lapack
from scipy.linalg import solve_triangular

RTOL = 1e-12
MAXIT = 60


def _start_vector(n):
    j = np.arange(n)
    v = np.cos(0.7 * j + 0.3) + 1j * np.sin(1.3 * j + 0.1)
    return v / np.linalg.norm(v)


def _iterate(n, solve_n, solve_c):
    v = _start_vector(n)
    s_prev = -1.0
    for _ in range(MAXIT):
        w = solve_c(solve_n(v))
        nw = np.linalg.norm(w)
        if not np.isfinite(nw) or nw == 0.0:
            return 0.0
        s = 1.0 / np.sqrt(nw)
        if abs(s - s_prev) <= RTOL * s:
            return s
        s_prev = s
        v = w / nw
    return -1.0


def smin_tridiag(dl, d, du):
    n = d.shape[0]
    if n == 1:
        return abs(d[0])
    dlf, df, duf, du2, ipiv, info = _lapack.zgttrf(dl, d, du)
    if info > 0:
        return 0.0
    if info < 0:
        raise ValueError(f"zgttrf: illegal argument {-info}")

    def solve_n(b):
        x, _ = _lapack.zgttrs(dlf, df, duf, du2, ipiv, b, trans="N")
        return x

    def solve_c(b):
        x, _ = _lapack.zgttrs(dlf, df, duf, du2, ipiv, b, trans="C")
        return x

    return _iterate(n, solve_n, solve_c)


def smin_triangular(t):
    n = t.shape[0]
    diag = np.abs(np.diag(t))
    if diag.min() == 0.0:
        return 0.0
    if n == 1:
        return diag[0]

    def solve_n(b):
        return solve_triangular(t, b, trans="N", check_finite=False)

    def solve_c(b):
        return solve_triangular(t, b, trans="C", check_finite=False)

    return _iterate(n, solve_n, solve_c)


def smin_dense(a):
    n = a.shape[0]
    if n == 1:
        return abs(a[0, 0])
    lu, piv, info = _lapack.zgetrf(a)
    if info > 0:
        return 0.0
    if info < 0:
        raise ValueError(f"zgetrf: illegal argument {-info}")

    def solve_n(b):
        x, _ = _lapack.zgetrs(lu, piv, b, trans=0)
        return x

    def solve_c(b):
        x, _ = _lapack.zgetrs(lu, piv, b, trans=2)
        return x

    return _iterate(n, solve_n, solve_c)
