"""Dense complex linear-algebra kernels.

Everything else in the package reduces to three operations on square
complex matrices: full eigendecomposition, smallest singular value, and a
pivoted linear solve.  All are pure functions of immutable inputs and safe
to call concurrently.

Matrices are plain complex128 ndarrays validated at entry (square, finite).
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack as _lapack

from . import _kernels
from .errors import ConvergenceError, InputError, SingularMatrixError

DEFAULT_TOL = 1e-10
SVD_CUTOVER = 256


def validate_matrix(a, name="matrix"):
    """Coerce to a square, finite complex128 array."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"{name} must be square, got shape {a.shape}")
    if a.shape[0] < 1:
        raise InputError(f"{name} must have dim >= 1")
    if not np.all(np.isfinite(a)):
        raise InputError(f"{name} contains NaN or Inf entries")
    return a


def norm_estimate(a):
    """Cheap spectral-norm upper bound sqrt(norm1 * norminf)."""
    a = np.asarray(a)
    n1 = np.abs(a).sum(axis=0).max()
    ninf = np.abs(a).sum(axis=1).max()
    return float(np.sqrt(n1 * ninf))


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues sorted by (Re, Im) with unit-norm right eigenvectors.

    ``right_vectors[:, i]`` belongs to ``eigenvalues[i]``;
    ``residuals[i] = ||A v_i - lambda_i v_i||``.
    """

    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    residuals: np.ndarray


def _is_hermitian(a):
    return np.array_equal(a, a.conj().T)


def eig_dense(a, tol=DEFAULT_TOL):
    """Full eigendecomposition of a dense complex matrix.

    Hermitian input dispatches to the symmetric solver (exactly real
    eigenvalues, orthonormal vectors); the general path is QR iteration.
    Raises ConvergenceError naming the stalled deflation index if the QR
    iteration fails, or if any residual exceeds ``tol`` times a
    spectral-norm estimate.
    """
    a = validate_matrix(a)
    n = a.shape[0]
    if _is_hermitian(a):
        w, v = sla.eigh(a)
        lam = w.astype(np.complex128)
        vec = v.astype(np.complex128)
    else:
        lwork, _ = _lapack.zgeev_lwork(n, compute_vl=0, compute_vr=1)
        lam, _, vec, info = _lapack.zgeev(
            a, compute_vl=0, compute_vr=1, lwork=int(lwork.real)
        )
        if info > 0:
            raise ConvergenceError(
                f"eigenvalue QR iteration stalled at deflation index {info}",
                index=info,
            )
        if info < 0:
            raise InputError(f"zgeev: illegal argument {-info}")
    order = np.lexsort((lam.imag, lam.real))
    lam = lam[order]
    vec = vec[:, order]
    vec = vec / np.linalg.norm(vec, axis=0, keepdims=True)
    resid = np.linalg.norm(a @ vec - vec * lam, axis=0)
    scale = norm_estimate(a)
    worst = int(np.argmax(resid))
    if resid[worst] > tol * max(scale, 1e-300):
        raise ConvergenceError(
            f"eigenpair {worst} residual {resid[worst]:.3e} exceeds "
            f"{tol:.1e} * ||A||",
            index=worst,
        )
    return EigenDecomposition(lam, vec, resid)


def eigvals_dense(a):
    """Eigenvalues only, sorted by (Re, Im); no residual certificate."""
    a = validate_matrix(a)
    if _is_hermitian(a):
        lam = sla.eigvalsh(a).astype(np.complex128)
    else:
        lam, _, _, info = _lapack.zgeev(a, compute_vl=0, compute_vr=0)
        if info > 0:
            raise ConvergenceError(
                f"eigenvalue QR iteration stalled at deflation index {info}",
                index=info,
            )
        if info < 0:
            raise InputError(f"zgeev: illegal argument {-info}")
    order = np.lexsort((lam.imag, lam.real))
    return lam[order]


def smallest_singular_value(a):
    """s_min(A) via full SVD for small matrices, LU inverse iteration above.

    Relative accuracy ~1e-10 for well-scaled input; exactly singular input
    returns 0.0.  The iteration falls back to a full SVD on stagnation.
    """
    a = validate_matrix(a)
    if a.shape[0] <= SVD_CUTOVER:
        return float(np.linalg.svd(a, compute_uv=False)[-1])
    return _kernels.smin_dense(a)


def solve(a, b):
    """Solve A x = b by pivoted LU with growth monitoring.

    Raises SingularMatrixError (with the failing pivot index) when a pivot
    is exactly zero or below working precision relative to the matrix
    scale.
    """
    a = validate_matrix(a)
    b = np.asarray(b, dtype=np.complex128)
    if b.shape[0] != a.shape[0]:
        raise InputError(
            f"right-hand side length {b.shape[0]} != dim {a.shape[0]}"
        )
    if not np.all(np.isfinite(b)):
        raise InputError("right-hand side contains NaN or Inf entries")
    lu, piv, info = _lapack.zgetrf(a)
    if info > 0:
        raise SingularMatrixError(
            f"matrix singular: zero pivot at elimination step {info - 1}",
            pivot_index=info - 1,
        )
    if info < 0:
        raise InputError(f"zgetrf: illegal argument {-info}")
    upiv = np.abs(np.diag(lu))
    amax = np.abs(a).max()
    worst = int(np.argmin(upiv))
    if upiv[worst] <= 1e-14 * amax:
        raise SingularMatrixError(
            f"matrix singular to working precision: pivot {worst} is "
            f"{upiv[worst]:.3e} against scale {amax:.3e}",
            pivot_index=worst,
        )
    x, _ = _lapack.zgetrs(lu, piv, b)
    growth = float(np.abs(np.triu(lu)).max() / max(amax, 1e-300))
    if growth > 1e8:
        # one refinement step guards against rare pivot-growth blowup
        r = b - a @ x
        dx, _ = _lapack.zgetrs(lu, piv, r)
        x = x + dx
    return x
