"""Truncated metric operators for quasi-Hermitian sections.

A non-normal section with a complete biorthogonal system admits positive
operators Theta with Theta H = H^dag Theta on the spanned subspace.  Here
Theta is assembled from the first K left eigenvectors with summable
positive weights, so it is bounded by construction; the interesting
physics is that its smallest range eigenvalue collapses as K grows, which
is the finite-dimensional shadow of an unbounded inverse.  The module
also carries the similarity transform to a Hermitian section where the
metric allows it, and a 2x2 defective example where no metric exists.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import _csvio, lacore
from .errors import (GridMismatchError, InputError, ResolventError,
                     SingularMetricError)

WEIGHT_RULES = ("geometric", "kappa_scaled")

#: relative eigenvalue floor below which the metric does not define a
#: similarity transform to working precision
RANGE_CONDITION_FLOOR = 1e-12

#: relative clip for discarding null-space eigenvalues of a rank-K metric
NULL_CLIP = 1e-14


@dataclass(frozen=True)
class TruncatedMetric:
    """Rank-K truncated metric Theta = sum_n c_n phi_n phi_n^dag."""

    order: int
    weight_rule: str
    weights: np.ndarray
    theta: np.ndarray
    subspace_projector: np.ndarray
    grid: np.ndarray = None

    @property
    def dim(self):
        return self.theta.shape[0]


def _weights(sys, order, weight_rule):
    n = np.arange(order)
    if weight_rule == "geometric":
        return 0.5 ** n
    if weight_rule == "kappa_scaled":
        return 0.5 ** n / sys.condition_numbers[:order]
    raise InputError(
        f"unknown weight rule {weight_rule!r}, expected one of {WEIGHT_RULES}")


def build_metric(sys, order, weight_rule="kappa_scaled"):
    """Assemble the rank-``order`` metric from a biorthogonal system.

    Weights are positive and summable: ``geometric`` uses 2^-n, while
    ``kappa_scaled`` divides by the eigenvector condition number so each
    rank-1 term contributes a uniformly bounded operator norm.  The
    result is Hermitized to kill rounding skew and ships with the
    orthogonal projector onto the spanned right-eigenvector subspace.
    """
    k = sys.eigenvalues.shape[0]
    if not 1 <= order <= k:
        raise InputError(f"metric order {order} outside [1, {k}]")
    if sys.converged is not None and not np.all(sys.converged[:order]):
        bad = int(np.argmin(sys.converged[:order]))
        raise InputError(
            f"eigenpair {bad} failed the two-resolution convergence gate; "
            f"refuse to build a metric on unconverged data")
    c = _weights(sys, order, weight_rule)
    phi = sys.left_vectors[:, :order]
    theta = (phi * c) @ phi.conj().T
    theta = 0.5 * (theta + theta.conj().T)
    q = np.linalg.qr(sys.right_vectors[:, :order])[0]
    proj = q @ q.conj().T
    return TruncatedMetric(order, weight_rule, c, theta,
                           0.5 * (proj + proj.conj().T), grid=sys.grid)


def _check_grid(t, hm):
    if t.grid is not None and hm.grid is not None:
        if t.grid.shape != hm.grid.shape or not np.allclose(
                t.grid, hm.grid, rtol=0.0, atol=1e-12):
            raise GridMismatchError(
                "metric and operator were built on different grids")


@dataclass(frozen=True)
class QuasiHermiticityResidual:
    raw: float
    subspace: float
    resolvent_form: float


def quasi_hermiticity_residual(t, hm, z0=-1.0):
    """Residuals of Theta H = H^dag Theta in three norms.

    ``raw`` tests the identity on the whole section, which mixes in the
    truncated tail; ``subspace`` compresses both sides onto the spanned
    eigenvector subspace where the identity should hold to rounding;
    ``resolvent_form`` tests the bounded variant Theta (H-z0)^-1 =
    (H-z0)^-dag Theta at a point z0 away from the spectrum.
    """
    _check_grid(t, hm)
    a = hm.matrix
    theta = t.theta
    scale = np.linalg.norm(theta) * np.linalg.norm(a)
    c = theta @ a - a.conj().T @ theta
    raw = float(np.linalg.norm(c) / scale)
    p = t.subspace_projector
    subspace = float(np.linalg.norm(p @ c @ p) / scale)

    shifted = a - z0 * np.eye(hm.dim)
    smin = lacore.smallest_singular_value(shifted)
    if smin <= 1e-14 * hm.norm_estimate():
        raise ResolventError(f"z0 = {z0} is numerically in the spectrum")
    r = lacore.solve(shifted, np.eye(hm.dim, dtype=np.complex128))
    cr = theta @ r - r.conj().T @ theta
    res_form = float(np.linalg.norm(cr) /
                     (np.linalg.norm(theta) * np.linalg.norm(r)))
    return QuasiHermiticityResidual(raw, subspace, res_form)


@dataclass(frozen=True)
class ConditioningRecord:
    order: int
    lam_min: float
    lam_max: float
    ratio: float
    subspace_residual: float


def metric_range_eigenvalues(t):
    """Eigenvalues of Theta restricted to its rank-K range (descending)."""
    w = sla.eigvalsh(t.theta)
    return w[::-1][:t.order]


def conditioning_sweep(sys, orders, weight_rule="kappa_scaled", hm=None):
    """Spectral conditioning of Theta as the truncation order grows.

    For each K the record carries the extreme range eigenvalues and their
    ratio; the ratio collapsing with K is the signature of a metric whose
    inverse is unbounded in the limit.  When the operator section is
    supplied the subspace quasi-Hermiticity residual is attached, else it
    is NaN.
    """
    records = []
    for order in orders:
        t = build_metric(sys, order, weight_rule)
        w = metric_range_eigenvalues(t)
        sub = np.nan
        if hm is not None:
            sub = quasi_hermiticity_residual(t, hm).subspace
        records.append(ConditioningRecord(
            int(order), float(w[-1]), float(w[0]),
            float(w[-1] / w[0]), float(sub)))
    return records


@dataclass(frozen=True)
class SimilarityReport:
    h_matrix: np.ndarray
    range_basis: np.ndarray
    rank: int
    hermiticity_residual: float


def similarity_transform(t, hm):
    """Hermitian section h = Omega H Omega^-1 with Omega = Theta^(1/2).

    Everything happens on the range of Theta: with eigenpairs Theta u_i =
    w_i u_i (w_i > 0 on the range), h = W^(1/2) U^dag H U W^(-1/2) is
    similar to the compression of H onto that subspace and Hermitian
    exactly when the quasi-Hermiticity identity holds there.  Raises when
    the range eigenvalue spread is too large to invert stably.
    """
    _check_grid(t, hm)
    w, u = sla.eigh(t.theta)
    w, u = w[::-1], u[:, ::-1]
    lam_max = w[0]
    if lam_max <= 0.0:
        raise SingularMetricError("metric has no positive eigenvalues")
    if w[t.order - 1] / lam_max < RANGE_CONDITION_FLOOR:
        raise SingularMetricError(
            f"metric range conditioning {w[t.order - 1] / lam_max:.3e} "
            f"below {RANGE_CONDITION_FLOOR:.1e}; similarity transform "
            f"would amplify rounding beyond working precision")
    keep = w > NULL_CLIP * lam_max
    w, u = w[keep], u[:, keep]
    rank = int(w.shape[0])
    root = np.sqrt(w)
    core = u.conj().T @ hm.matrix @ u
    h = (root[:, None] * core) / root[None, :]
    herm = float(np.linalg.norm(h - h.conj().T) / np.linalg.norm(h))
    return SimilarityReport(h, u, rank, herm)


@dataclass(frozen=True)
class JordanDemo:
    matrix: np.ndarray
    eigenvalue: float
    right_vector: np.ndarray
    left_vector: np.ndarray
    candidate_theta: np.ndarray
    intertwining_residual: float
    theta_determinant: float
    theta_min_eigenvalue: float
    resolvent_norm_nonnormal: float
    resolvent_norm_normal: float
    resolvent_ratio: float
    probe_point: complex

    def text(self):
        lines = [
            "2x2 Jordan block demonstration",
            f"  matrix                  [[1, 1], [0, 1]]",
            f"  eigenvalue              {self.eigenvalue} (algebraic "
            f"multiplicity 2, geometric multiplicity 1)",
            f"  intertwining residual   {self.intertwining_residual:.3e}  "
            f"(Theta H - H^dag Theta, Theta = phi phi^dag)",
            f"  det Theta               {self.theta_determinant:.3e}",
            f"  min eig Theta           {self.theta_min_eigenvalue:.3e}  "
            f"(no positive invertible metric exists)",
            f"  resolvent norm at z = {self.probe_point}:",
            f"    defective section     {self.resolvent_norm_nonnormal:.6e}",
            f"    normal comparison     {self.resolvent_norm_normal:.6e}",
            f"    ratio                 {self.resolvent_ratio:.3f}",
        ]
        return "\n".join(lines)


def jordan_demo(probe_point=1.1 + 0.0j):
    """Why diagonalizability is not enough without bounds: the 2x2 block.

    H = [[1, 1], [0, 1]] has real spectrum but a defective eigenvalue.
    The unique (up to scale) positive-semidefinite solution of the
    intertwining identity is Theta = phi phi^dag built on the left
    eigenvector, which is singular: no bounded-with-bounded-inverse
    metric exists, and the resolvent norm detects this as a pseudospectral
    blowup a normal section with the same spectrum cannot show.
    """
    a = np.array([[1.0, 1.0], [0.0, 1.0]], dtype=np.complex128)
    psi = np.array([1.0, 0.0], dtype=np.complex128)
    phi = np.array([0.0, 1.0], dtype=np.complex128)
    theta = np.outer(phi, phi.conj())
    inter = float(np.linalg.norm(theta @ a - a.conj().T @ theta))
    det = float(np.linalg.det(theta).real)
    min_eig = float(sla.eigvalsh(theta)[0])
    z = complex(probe_point)
    eye = np.eye(2, dtype=np.complex128)
    rn_bad = 1.0 / lacore.smallest_singular_value(a - z * eye)
    rn_good = 1.0 / lacore.smallest_singular_value(eye - z * eye)
    return JordanDemo(a, 1.0, psi, phi, theta, inter, det, min_eig,
                      float(rn_bad), float(rn_good),
                      float(rn_bad / rn_good), z)


def write_metric_csv(path, records, weight_rule, config=None):
    """One row per truncation order: conditioning extremes plus residual."""
    with _csvio.open_out(path) as fh:
        _csvio.write_lines(fh, _csvio.header_lines("metric", config))
        fh.write("order,lam_min,lam_max,ratio,subspace_residual,"
                 "weight_rule\n")
        for r in records:
            fh.write(f"{r.order},{r.lam_min!r},{r.lam_max!r},{r.ratio!r},"
                     f"{r.subspace_residual!r},{weight_rule}\n")
