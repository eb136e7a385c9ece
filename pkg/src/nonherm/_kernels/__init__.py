"""Smallest-singular-value kernels with compiled/fallback backend selection.

The compiled backend (`_smin_cy`, Cython over LAPACK) is used when the
extension built; otherwise the NumPy backend (`_smin_py`) is selected.
``NONHERM_KERNEL=py`` forces the fallback.  Both backends run the same
iteration from the same deterministic start vector; a stagnation sentinel
(-1.0) triggers a full-SVD fallback here, so callers always get a value.
"""

import os

import numpy as np

if os.environ.get("NONHERM_KERNEL", "").lower() in ("py", "python"):
    from . import _smin_py as _backend

    BACKEND = "python"
else:
    try:
        from . import _smin_cy as _backend

        BACKEND = "cython"
    except ImportError:
        from . import _smin_py as _backend

        BACKEND = "python"


def _svd_smin(a):
    return float(np.linalg.svd(a, compute_uv=False)[-1])


def smin_tridiag(dl, d, du):
    """s_min of the tridiagonal matrix with sub/main/super diagonals."""
    dl = np.ascontiguousarray(dl, dtype=np.complex128)
    d = np.ascontiguousarray(d, dtype=np.complex128)
    du = np.ascontiguousarray(du, dtype=np.complex128)
    s = _backend.smin_tridiag(dl, d, du)
    if s >= 0.0:
        return float(s)
    a = np.diag(d) + np.diag(dl, -1) + np.diag(du, 1)
    return _svd_smin(a)


def smin_triangular(t):
    """s_min of an upper-triangular matrix."""
    tf = np.asfortranarray(t, dtype=np.complex128)
    s = _backend.smin_triangular(tf)
    if s >= 0.0:
        return float(s)
    return _svd_smin(t)


def smin_dense(a):
    """s_min of a general square matrix."""
    af = np.asfortranarray(a, dtype=np.complex128)
    s = _backend.smin_dense(af)
    if s >= 0.0:
        return float(s)
    return _svd_smin(a)
