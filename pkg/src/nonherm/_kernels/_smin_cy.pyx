# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled backend for the smallest-singular-value kernels.

Same contract as ``_smin_py``: factor once, power-iterate on (A A^H)^{-1}
via forward/adjoint solves, return 0.0 for singular input and the sentinel
-1.0 on stagnation.  Dense/triangular kernels expect Fortran-ordered input
(the package wrapper coerces); the solve loops run without the GIL so grid
scans parallelize across threads.
"""

import numpy as np

from libc.math cimport cos, isfinite, sin, sqrt
from scipy.linalg.cython_blas cimport dznrm2, zdscal, ztrsv
from scipy.linalg.cython_lapack cimport zgetrf, zgetrs, zgttrf, zgttrs

ctypedef double complex zcomplex

cdef double RTOL = 1e-12
cdef int MAXIT = 60


cdef void _fill_start(zcomplex* v, int n) noexcept nogil:
    cdef int j
    cdef int one = 1
    cdef double nrm, inv
    for j in range(n):
        v[j] = cos(0.7 * j + 0.3) + 1j * sin(1.3 * j + 0.1)
    nrm = dznrm2(&n, v, &one)
    inv = 1.0 / nrm
    zdscal(&n, &inv, v, &one)


cdef double _loop_tridiag(int n, zcomplex* dl, zcomplex* d, zcomplex* du,
                          zcomplex* du2, int* piv,
                          zcomplex* w) noexcept nogil:
    cdef int one = 1, it, info = 0
    cdef char cn = b'N', cc = b'C'
    cdef double nw, s, inv, s_prev = -1.0
    _fill_start(w, n)
    for it in range(MAXIT):
        zgttrs(&cn, &n, &one, dl, d, du, du2, piv, w, &n, &info)
        zgttrs(&cc, &n, &one, dl, d, du, du2, piv, w, &n, &info)
        nw = dznrm2(&n, w, &one)
        if not isfinite(nw) or nw == 0.0:
            return 0.0
        s = 1.0 / sqrt(nw)
        if s - s_prev <= RTOL * s and s_prev - s <= RTOL * s:
            return s
        s_prev = s
        inv = 1.0 / nw
        zdscal(&n, &inv, w, &one)
    return -1.0


cdef double _loop_triangular(int n, zcomplex* t, zcomplex* w) noexcept nogil:
    cdef int one = 1, it
    cdef char cu = b'U', cn = b'N', cc = b'C'
    cdef double nw, s, inv, s_prev = -1.0
    _fill_start(w, n)
    for it in range(MAXIT):
        ztrsv(&cu, &cn, &cn, &n, t, &n, w, &one)
        ztrsv(&cu, &cc, &cn, &n, t, &n, w, &one)
        nw = dznrm2(&n, w, &one)
        if not isfinite(nw) or nw == 0.0:
            return 0.0
        s = 1.0 / sqrt(nw)
        if s - s_prev <= RTOL * s and s_prev - s <= RTOL * s:
            return s
        s_prev = s
        inv = 1.0 / nw
        zdscal(&n, &inv, w, &one)
    return -1.0


cdef double _loop_dense(int n, zcomplex* lu, int* piv,
                        zcomplex* w) noexcept nogil:
    cdef int one = 1, it, info = 0
    cdef char cn = b'N', cc = b'C'
    cdef double nw, s, inv, s_prev = -1.0
    _fill_start(w, n)
    for it in range(MAXIT):
        zgetrs(&cn, &n, &one, lu, &n, piv, w, &n, &info)
        zgetrs(&cc, &n, &one, lu, &n, piv, w, &n, &info)
        nw = dznrm2(&n, w, &one)
        if not isfinite(nw) or nw == 0.0:
            return 0.0
        s = 1.0 / sqrt(nw)
        if s - s_prev <= RTOL * s and s_prev - s <= RTOL * s:
            return s
        s_prev = s
        inv = 1.0 / nw
        zdscal(&n, &inv, w, &one)
    return -1.0


def smin_tridiag(zcomplex[::1] dl, zcomplex[::1] d, zcomplex[::1] du):
    """s_min of the tridiagonal matrix with bands (dl, d, du)."""
    cdef int n = d.shape[0]
    if n == 1:
        return abs(d[0])

    dlf = np.array(dl, dtype=np.complex128, copy=True)
    df = np.array(d, dtype=np.complex128, copy=True)
    duf = np.array(du, dtype=np.complex128, copy=True)
    du2 = np.empty(max(n - 2, 1), dtype=np.complex128)
    ipiv = np.empty(n, dtype=np.int32)
    work = np.empty(n, dtype=np.complex128)

    cdef zcomplex[::1] dlv = dlf, dv = df, duv = duf, du2v = du2, wv = work
    cdef int[::1] pv = ipiv
    cdef int info = 0
    cdef double s

    with nogil:
        zgttrf(&n, &dlv[0], &dv[0], &duv[0], &du2v[0], &pv[0], &info)
    if info > 0:
        return 0.0
    if info < 0:
        raise ValueError(f"zgttrf: illegal argument {-info}")

    with nogil:
        s = _loop_tridiag(n, &dlv[0], &dv[0], &duv[0], &du2v[0],
                          &pv[0], &wv[0])
    return s


def smin_triangular(zcomplex[::1, :] t):
    """s_min of an upper-triangular matrix (Fortran order)."""
    cdef int n = t.shape[0]
    cdef int j
    for j in range(n):
        if t[j, j] == 0:
            return 0.0
    if n == 1:
        return abs(t[0, 0])

    work = np.empty(n, dtype=np.complex128)
    cdef zcomplex[::1] wv = work
    cdef double s

    with nogil:
        s = _loop_triangular(n, &t[0, 0], &wv[0])
    return s


def smin_dense(zcomplex[::1, :] a):
    """s_min of a general square matrix (Fortran order; copied internally)."""
    cdef int n = a.shape[0]
    if n == 1:
        return abs(a[0, 0])

    lu = np.array(a, dtype=np.complex128, copy=True, order="F")
    ipiv = np.empty(n, dtype=np.int32)
    work = np.empty(n, dtype=np.complex128)
    cdef zcomplex[::1, :] luv = lu
    cdef zcomplex[::1] wv = work
    cdef int[::1] pv = ipiv
    cdef int info = 0
    cdef double s

    with nogil:
        zgetrf(&n, &n, &luv[0, 0], &n, &pv[0], &info)
    if info > 0:
        return 0.0
    if info < 0:
        raise ValueError(f"zgetrf: illegal argument {-info}")

    with nogil:
        s = _loop_dense(n, &luv[0, 0], &pv[0], &wv[0])
    return s
