"""Eigenpairs, biorthogonal systems, and the quantitative basis diagnostics.

The central objects are paired right/left eigenvector families of a finite
section and its adjoint.  With unit-norm vectors the overlap reciprocal
kappa_n = 1 / |<phi_n, psi_n>| is the eigenvalue condition number; its
growth along the spectrum, together with widening frame bounds of the
right-vector family, is the finite-dimensional witness that the eigenbasis
is complete but not a Riesz basis.
"""

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg as sla

from . import _csvio, lacore
from .discretize import SCHEME_FD, adjoint_matrix, build_matrix, refined
from .errors import (
    InputError,
    NearDefectError,
    PairingError,
    ResolventError,
)

#: eigenvalue-grade gate: certifies the values themselves
CONVERGENCE_RTOL = 1e-7

#: vector-grade gate for kappa/frame/metric work on high modes, whose
#: eigenvalues sit above the dense-solver noise floor kappa_n * eps * ||H||
#: at every resolution while their condition numbers and eigenvectors stay
#: stable to far better than this tolerance
VECTOR_GATE_RTOL = 1e-2

OVERLAP_FLOOR = 1e-14


@dataclass(frozen=True, eq=False)
class BiorthogonalSystem:
    """Paired eigensystem of a section and its adjoint.

    Columns of ``right_vectors``/``left_vectors`` are unit eigenvectors of
    H and H^dagger, paired so left eigenvalue = conj(right eigenvalue).
    ``converged`` is filled by the two-resolution gate (None if ungated).
    """

    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray
    overlaps: np.ndarray
    condition_numbers: np.ndarray
    max_cross_overlap: float
    grid: np.ndarray = None
    converged: np.ndarray = None
    gate_eigenvalues: np.ndarray = None

    @property
    def k(self):
        return len(self.eigenvalues)

    def converged_count(self):
        if self.converged is None:
            return self.k
        return int(np.sum(self.converged))


def _phase_fix(v):
    """Rotate so the largest-magnitude entry is positive real."""
    i = int(np.argmax(np.abs(v)))
    piv = v[i]
    if piv == 0:
        return v
    return v * (np.conj(piv) / abs(piv))


def eigenvalues_of(hm, k=None):
    """Eigenvalues of a finite section, cheapest applicable algorithm.

    Hermitian sections use the symmetric solvers (tridiagonal one for the
    finite-difference scheme); general sections use the dense QR path.
    Sorted by (Re, Im); first k if requested.
    """
    a = hm.matrix
    if np.array_equal(a, a.conj().T):
        if hm.is_tridiagonal and np.all(a.imag == 0):
            d = a.diagonal().real.copy()
            e = a.diagonal(1).real.copy()
            if k is not None:
                w = sla.eigh_tridiagonal(
                    d, e, eigvals_only=True, select="i", select_range=(0, k - 1)
                )
            else:
                w = sla.eigh_tridiagonal(d, e, eigvals_only=True)
        else:
            w = np.linalg.eigvalsh(a)
        lam = w.astype(np.complex128)
    else:
        lam = lacore.eigvals_dense(a)
    return lam[:k] if k is not None else lam


def biorthogonal_system(hm, k, pairing_tol=None, offdiag_tol=1e-4):
    """First k eigenpairs of H paired with eigenpairs of H^dagger.

    Pairing matches each eigenvalue lambda of H against conj(mu) over the
    adjoint eigenvalues mu within ``pairing_tol`` (default 1e-8 * ||H||);
    failure raises PairingError naming the index.  Overlaps below 1e-14
    raise NearDefectError (Jordan-like degeneracy).
    """
    n = hm.dim
    if k < 1:
        raise InputError("k must be >= 1")
    if k > n // 4:
        raise InputError(
            f"k = {k} exceeds N/4 = {n // 4}; only the lower quarter of a "
            "finite section is trustworthy"
        )
    dec_r = lacore.eig_dense(hm.matrix)
    dec_l = lacore.eig_dense(adjoint_matrix(hm).matrix)
    lam = dec_r.eigenvalues[:k]
    psi = dec_r.right_vectors[:, :k].copy()
    mu_conj = np.conj(dec_l.eigenvalues)
    tol = pairing_tol if pairing_tol is not None else 1e-8 * lacore.norm_estimate(hm.matrix)

    phi = np.empty((n, k), dtype=np.complex128)
    taken = np.zeros(len(mu_conj), dtype=bool)
    for i in range(k):
        dist = np.abs(mu_conj - lam[i])
        dist[taken] = np.inf
        j = int(np.argmin(dist))
        if dist[j] > tol:
            raise PairingError(
                f"no adjoint eigenvalue within {tol:.3e} of eigenvalue "
                f"{i} ({lam[i]:.12g}); nearest at distance {dist[j]:.3e}",
                index=i,
            )
        taken[j] = True
        phi[:, i] = dec_l.right_vectors[:, j]

    for i in range(k):
        psi[:, i] = _phase_fix(psi[:, i])
        phi[:, i] = _phase_fix(phi[:, i])

    cross = phi.conj().T @ psi
    overlaps = np.diag(cross).copy()
    for i in range(k):
        if abs(overlaps[i]) < OVERLAP_FLOOR:
            raise NearDefectError(
                f"left/right overlap {abs(overlaps[i]):.3e} at index {i}: "
                "near-defective pair",
                index=i,
            )
    off = cross - np.diag(np.diag(cross))
    max_off = float(np.max(np.abs(off))) if k > 1 else 0.0
    if max_off > offdiag_tol:
        worst = np.unravel_index(np.argmax(np.abs(off)), off.shape)
        raise PairingError(
            f"biorthogonality violated: |<phi_{worst[0]}, psi_{worst[1]}>| "
            f"= {max_off:.3e} > {offdiag_tol:.1e}",
            index=int(worst[0]),
        )
    kappa = 1.0 / np.abs(overlaps)
    return BiorthogonalSystem(lam, psi, phi, overlaps, kappa, max_off,
                              grid=hm.grid)


def converged_system(p, d, k, rel_tol=CONVERGENCE_RTOL, factor=2, **kwargs):
    """Biorthogonal system at resolution N with two-resolution gating.

    An eigenpair is converged when its eigenvalue moves less than
    ``rel_tol`` relatively between N and factor*N.  Gate eigenvalues are
    attached for diagnostics.
    """
    sys_n = biorthogonal_system(build_matrix(p, d), k, **kwargs)
    lam2 = eigenvalues_of(build_matrix(p, refined(d, factor)))
    gate = np.empty(k, dtype=np.complex128)
    flags = np.zeros(k, dtype=bool)
    for i, lam in enumerate(sys_n.eigenvalues):
        j = int(np.argmin(np.abs(lam2 - lam)))
        gate[i] = lam2[j]
        flags[i] = abs(lam - lam2[j]) <= rel_tol * abs(lam2[j])
    return replace(sys_n, converged=flags, gate_eigenvalues=gate)


def select_converged(system, count):
    """Compact a gated system to its first ``count`` converged pairs.

    Unconverged slots (under-resolved or spurious truncation modes that
    the two-resolution gate rejected) are dropped; the survivors keep
    their (Re, Im) eigenvalue order.  Raises when fewer than ``count``
    pairs survive the gate.
    """
    if system.converged is None:
        raise InputError("system was not gated; use converged_system")
    idx = np.flatnonzero(system.converged)[:count]
    if idx.size < count:
        raise InputError(
            f"only {idx.size} of the requested {count} eigenpairs pass the "
            f"two-resolution gate; raise N or widen the request")
    return BiorthogonalSystem(
        system.eigenvalues[idx],
        system.right_vectors[:, idx],
        system.left_vectors[:, idx],
        system.overlaps[idx],
        system.condition_numbers[idx],
        system.max_cross_overlap,
        grid=system.grid,
        converged=system.converged[idx],
        gate_eigenvalues=system.gate_eigenvalues[idx],
    )


def kappa_complex_symmetric(hm, k):
    """Condition numbers via the complex-symmetric shortcut.

    For a complex symmetric section the left eigenvector is the conjugate
    of the right one, so kappa_n = 1 / |<conj(psi_n), psi_n>| = 1/|psi_n^T
    psi_n| without touching the adjoint.  Consistency oracle for
    biorthogonal_system.
    """
    a = hm.matrix
    if not np.array_equal(a, a.T):
        raise InputError("matrix is not complex symmetric")
    dec = lacore.eig_dense(a)
    psi = dec.right_vectors[:, :k]
    overlaps = np.einsum("ij,ij->j", psi, psi)
    return dec.eigenvalues[:k], 1.0 / np.abs(overlaps)


@dataclass(frozen=True)
class CompletenessRecord:
    rank: int
    min_singular_value_of_eigenvector_matrix: float


def completeness_rank(hm):
    """Rank of the full right-eigenvector matrix (discrete completeness).

    Full rank means the section is diagonalizable; the recorded smallest
    singular value quantifies how far from defective the basis is.
    """
    dec = lacore.eig_dense(hm.matrix)
    sv = np.linalg.svd(dec.right_vectors, compute_uv=False)
    n = hm.dim
    rank = int(np.sum(sv > n * np.finfo(float).eps * sv[0]))
    return CompletenessRecord(rank, float(sv[-1]))


@dataclass(frozen=True)
class FrameBounds:
    lower: float
    upper: float
    sampled_min: float
    sampled_max: float


def frame_bounds(vectors, samples=200, seed=0):
    """Extremal frame constants of a finite vector family.

    ``vectors`` is an (N, k) array of columns or a sequence of vectors.
    The bounds are the extreme eigenvalues of the k x k Gram matrix (equal
    to the frame-operator spectrum on the span), cross-checked against
    seeded random unit vectors drawn inside the span.
    """
    v = np.asarray(vectors, dtype=np.complex128)
    if v.ndim != 2:
        raise InputError("vectors must form a 2-D array")
    if v.shape[1] > v.shape[0]:
        v = v.T
    if v.shape[1] < 2:
        raise InputError("need at least 2 vectors")
    if samples < 100:
        raise InputError("samples must be >= 100")
    norms = np.linalg.norm(v, axis=0)
    if np.any(norms < 1e-300):
        raise InputError("zero vector in input family")
    v = v / norms
    gram = v.conj().T @ v
    w = np.linalg.eigvalsh((gram + gram.conj().T) / 2.0)
    lower, upper = float(w[0]), float(w[-1])

    rng = np.random.default_rng(seed)
    k = v.shape[1]
    smin, smax = np.inf, -np.inf
    for _ in range(samples):
        c = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        psi = v @ c
        nrm = np.linalg.norm(psi)
        if nrm == 0.0:
            continue
        psi /= nrm
        val = float(np.linalg.norm(v.conj().T @ psi) ** 2)
        smin = min(smin, val)
        smax = max(smax, val)
    return FrameBounds(lower, upper, smin, smax)


def dissipativity_form_check(hm, xi):
    """Smallest eigenvalue of the imaginary part of the resolvent of -iH.

    For xi < 0 in the resolvent set, (1/2i)[(-iH - xi)^{-1} - adjoint]
    equals R (H + H^dagger)/2 R^dagger, so it is positive semidefinite for
    an accretive section; the returned minimum should only be rounding-level
    negative.
    """
    if not (xi < 0):
        raise InputError("xi must be negative")
    a = hm.matrix
    n = hm.dim
    b = -1j * a - xi * np.eye(n)
    smin = lacore.smallest_singular_value(b)
    if smin <= 1e-14 * lacore.norm_estimate(b):
        raise ResolventError(f"xi = {xi} lies in the spectrum of -iH")
    r = sla.inv(b)
    f = (r - r.conj().T) / 2j
    w = np.linalg.eigvalsh((f + f.conj().T) / 2.0)
    return float(w[0])


def write_eigs_csv(path, system, config=None):
    """One row per eigenpair: n, Re lambda, Im lambda, kappa, converged."""
    with _csvio.open_out(path) as fh:
        _csvio.write_lines(fh, _csvio.header_lines("eigs", config))
        fh.write("n,re_lambda,im_lambda,kappa,converged\n")
        for i in range(system.k):
            lam = system.eigenvalues[i]
            conv = "" if system.converged is None else int(system.converged[i])
            fh.write(
                f"{i},{float(lam.real)!r},{float(lam.imag)!r},"
                f"{float(system.condition_numbers[i])!r},{conv}\n"
            )
