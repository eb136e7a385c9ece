"""Resolvent norms, pseudospectrum grids, and the resolvent-bound scans.

The resolvent norm at a shift z is 1/s_min(H - z).  Grids factor the work
once per section: tridiagonal finite-difference sections refactor per shift
in O(N), dense sections are reduced to Schur form once so every shift costs
two triangular solves per iteration.  Grid evaluation is embarrassingly
parallel and statically partitioned, so results are bitwise independent of
the worker count.

The scan utilities quantify how far the section is from normal: kappa(sigma)
= ||(H - sigma z)^{-1}|| * |Im(sigma z)| grows without bound along rays
0 < arg z < pi/2 for the imaginary cubic oscillator, violating the bound
const/|Im z| that any bounded similarity to a self-adjoint operator would
impose, and the semiclassical rescaling identity links that growth to the
small-h resolvent divergence certified by pseudomodes.
"""

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg as sla

from . import _csvio, _kernels, lacore
from .discretize import SCHEME_FD, build_matrix
from .errors import GridScalingError, InputError

GRID_CAP = 250_000
INFINITY_MARKER_RTOL = 1e-14
RBOUND_SLOPE_THRESHOLD = 0.3


@dataclass(frozen=True)
class GridSpec:
    """Rectangle in the complex plane with an nx-by-ny sample lattice."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise InputError("grid rectangle is empty")
        if self.nx < 2 or self.ny < 2:
            raise InputError("grid needs nx, ny >= 2")
        if self.nx * self.ny > GRID_CAP:
            raise InputError(f"grid size {self.nx}x{self.ny} exceeds cap {GRID_CAP}")

    @property
    def re_axis(self):
        return np.linspace(self.re_min, self.re_max, self.nx)

    @property
    def im_axis(self):
        return np.linspace(self.im_min, self.im_max, self.ny)

    @property
    def cell(self):
        dre = (self.re_max - self.re_min) / (self.nx - 1)
        dim = (self.im_max - self.im_min) / (self.ny - 1)
        return float(np.hypot(dre, dim))

    def halved(self):
        return GridSpec(
            self.re_min,
            self.re_max,
            self.im_min,
            self.im_max,
            max(self.nx // 2, 2),
            max(self.ny // 2, 2),
        )


@dataclass(frozen=True, eq=False)
class PseudospectrumField:
    """Resolvent norms sampled on a grid; values[iy, ix], +inf at spectrum."""

    grid: GridSpec
    values: np.ndarray


def _shifted_smin(hm, z):
    a = hm.matrix
    n = a.shape[0]
    if hm.is_tridiagonal:
        return _kernels.smin_tridiag(
            a.diagonal(-1), a.diagonal() - z, a.diagonal(1)
        )
    if n <= lacore.SVD_CUTOVER:
        shifted = a - z * np.eye(n, dtype=np.complex128)
        return float(np.linalg.svd(shifted, compute_uv=False)[-1])
    return _kernels.smin_dense(a - z * np.eye(n, dtype=np.complex128))


def resolvent_norm(hm, z):
    """||(H - z)^{-1}|| = 1/s_min(H - z); +inf when z is numerically
    indistinguishable from the spectrum (s_min below 1e-14 ||H||)."""
    s = _shifted_smin(hm, complex(z))
    if s < INFINITY_MARKER_RTOL * hm.norm_estimate():
        return np.inf
    return 1.0 / s


def pseudospectrum_grid(hm, g, workers=None):
    """Field of resolvent norms over the grid.

    Deterministic: the lattice is split into contiguous row blocks, one per
    worker, and every sample is an independent pure evaluation, so the
    result is bitwise identical for any worker count.
    """
    if workers is None:
        workers = int(os.environ.get("NONHERM_WORKERS", "1"))
    workers = max(1, min(int(workers), g.ny))
    re = g.re_axis
    im = g.im_axis
    scale = hm.norm_estimate()
    values = np.empty((g.ny, g.nx), dtype=np.float64)

    tridiag = hm.is_tridiagonal
    if tridiag:
        dl = np.ascontiguousarray(hm.matrix.diagonal(-1))
        dm = np.ascontiguousarray(hm.matrix.diagonal())
        du = np.ascontiguousarray(hm.matrix.diagonal(1))

        def smin_at(z):
            return _kernels.smin_tridiag(dl, dm - z, du)

    else:
        t = sla.schur(hm.matrix, output="complex")[0]
        t = np.asfortranarray(t)
        n = hm.dim
        idx = np.arange(n)

        def smin_at(z):
            tz = t.copy(order="F")
            tz[idx, idx] -= z
            return _kernels.smin_triangular(tz)

    def fill_rows(rows):
        for iy in rows:
            zrow = re + 1j * im[iy]
            for ix in range(g.nx):
                s = smin_at(zrow[ix])
                values[iy, ix] = np.inf if s < INFINITY_MARKER_RTOL * scale else 1.0 / s

    blocks = np.array_split(np.arange(g.ny), workers)
    if workers == 1:
        fill_rows(blocks[0])
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill_rows, blocks))
    return PseudospectrumField(g, values)


@dataclass(frozen=True, eq=False)
class DeviationReport:
    """Cross-resolution validation: cells deviating beyond ``rel``."""

    flags: np.ndarray
    max_rel_dev: float
    flagged_fraction: float


def deviation_flags(field, coarse, rel=0.05):
    """Flag cells of ``field`` deviating more than ``rel`` from a coarser
    (or otherwise re-resolved) field interpolated onto the fine lattice.

    Non-finite samples on either side are excluded from the comparison.
    """
    from scipy.interpolate import RegularGridInterpolator

    cg = coarse.grid
    cv = np.array(coarse.values, dtype=float)
    finite_cv = np.isfinite(cv)
    big = 1.0 / INFINITY_MARKER_RTOL
    cv[~finite_cv] = big
    interp = RegularGridInterpolator(
        (cg.im_axis, cg.re_axis), cv, bounds_error=False, fill_value=None
    )
    g = field.grid
    mesh_im, mesh_re = np.meshgrid(g.im_axis, g.re_axis, indexing="ij")
    approx = interp(np.stack([mesh_im.ravel(), mesh_re.ravel()], axis=1)).reshape(
        g.ny, g.nx
    )
    fine = field.values
    comparable = np.isfinite(fine) & (approx < big / 2)
    dev = np.zeros_like(fine)
    dev[comparable] = np.abs(fine[comparable] - approx[comparable]) / fine[comparable]
    flags = comparable & (dev > rel)
    max_dev = float(dev[comparable].max()) if comparable.any() else 0.0
    return DeviationReport(flags, max_dev, float(flags.mean()))


@dataclass(frozen=True)
class InclusionReport:
    checked: int
    violations: int
    worst_margin: float


def epsilon_inclusion_check(field, eigenvalues, eps):
    """Verify the eps-neighborhood inclusion on a sampled field.

    Every grid point lying deeper than two grid cells inside the
    eps-neighborhood of a listed eigenvalue must carry resolvent norm
    > 1/eps.  Returns counts and the worst margin (min over required
    points of norm - 1/eps; +inf markers satisfy trivially).
    """
    g = field.grid
    lam = np.asarray(eigenvalues, dtype=np.complex128).ravel()
    mesh_im, mesh_re = np.meshgrid(g.im_axis, g.re_axis, indexing="ij")
    zs = mesh_re + 1j * mesh_im
    dist = np.min(np.abs(zs[..., None] - lam[None, None, :]), axis=2)
    slack = 2.0 * g.cell
    must = dist < eps - slack
    ok = field.values > 1.0 / eps
    violations = must & ~ok
    if must.any():
        margins = np.where(
            np.isinf(field.values[must]), np.inf, field.values[must] - 1.0 / eps
        )
        worst = float(np.min(margins))
    else:
        worst = np.inf
    return InclusionReport(int(must.sum()), int(violations.sum()), worst)


@dataclass(frozen=True)
class RboundSample:
    sigma: float
    z: complex
    norm: float
    kappa: float
    flagged: bool


def rbound_scan(hm, z, sigmas, eigenvalues=None, proximity=1e-8):
    """kappa(sigma) = ||(H - sigma z)^{-1}|| * |Im(sigma z)| along a ray.

    Requires 0 < arg z < pi/2.  A sample is flagged (excluded from growth
    assessment) when sigma z is numerically on the spectrum: resolvent at
    the infinity marker, or within ``proximity`` (relative) of one of the
    optionally supplied computed eigenvalues.
    """
    z = complex(z)
    arg = np.angle(z)
    if not (0.0 < arg < np.pi / 2):
        raise InputError(f"need 0 < arg z < pi/2, got arg z = {arg:.4f}")
    sigmas = [float(s) for s in sigmas]
    if any(s <= 0 for s in sigmas) or any(
        a >= b for a, b in zip(sigmas, sigmas[1:])
    ):
        raise InputError("sigmas must be positive and strictly increasing")
    lam = None
    if eigenvalues is not None:
        lam = np.asarray(eigenvalues, dtype=np.complex128).ravel()
    out = []
    for sigma in sigmas:
        zs = sigma * z
        norm = resolvent_norm(hm, zs)
        flagged = bool(np.isinf(norm))
        if lam is not None and lam.size:
            flagged = flagged or bool(
                np.min(np.abs(lam - zs)) < proximity * max(1.0, abs(zs))
            )
        out.append(RboundSample(sigma, zs, norm, norm * abs(zs.imag), flagged))
    return out


@dataclass(frozen=True)
class RboundVerdict:
    slope: float
    violated: bool


def rbound_violation(samples):
    """Secant slope of log kappa vs log sigma over unflagged samples.

    A slope above 0.3 is the declared violation of the const/|Im z|
    resolvent bound (robust to single-point noise; the true growth is
    super-polynomial).
    """
    clean = [s for s in samples if not s.flagged and np.isfinite(s.kappa)]
    if len(clean) < 2:
        raise InputError("need at least two unflagged samples")
    slope = (np.log(clean[-1].kappa) - np.log(clean[0].kappa)) / (
        np.log(clean[-1].sigma) - np.log(clean[0].sigma)
    )
    return RboundVerdict(float(slope), bool(slope > RBOUND_SLOPE_THRESHOLD))


@dataclass(frozen=True)
class RescaleReport:
    lhs: float
    rhs: float
    rel_dev: float
    h: float


def semiclassical_rescale_check(p, z, sigma, d, hm=None, hm_scaled=None):
    """Check ||(H - sigma z)^{-1}|| = sigma^{-1} ||(H_h - z)^{-1}||, h = sigma^{-5/6}.

    ``d`` describes the h = 1 section of H; the rescaled section lives on
    the sigma^{1/3}-contracted grid (box L sigma^{-1/3}, or Hermite scale
    alpha sigma^{1/3}) with h = sigma^{-5/6}, which is the image of the
    same discretization under the dilation behind the identity.  Matrices
    may be passed in explicitly; their grids must then satisfy
    grid_H = sigma^{1/3} * grid_{H_h} or the check refuses.
    """
    z = complex(z)
    if z.imag == 0:
        raise InputError("need Im z != 0")
    sigma = float(sigma)
    if sigma <= 0:
        raise InputError("sigma must be positive")
    if d.h != 1.0:
        raise InputError("reference discretization must have h = 1")
    h_small = sigma ** (-5.0 / 6.0)
    if hm is None:
        hm = build_matrix(p, d)
    if hm_scaled is None:
        if d.scheme == SCHEME_FD:
            d2 = replace(d, half_width=d.half_width * sigma ** (-1.0 / 3.0), h=h_small)
        else:
            d2 = replace(d, hermite_scale=d.hermite_scale * sigma ** (1.0 / 3.0), h=h_small)
        hm_scaled = build_matrix(p, d2)
    ratio = sigma ** (1.0 / 3.0)
    if hm.dim != hm_scaled.dim:
        raise GridScalingError("sections have different dimensions")
    if not np.allclose(hm.grid, ratio * hm_scaled.grid, rtol=1e-12, atol=0.0):
        raise GridScalingError(
            "grids are not sigma^(1/3)-scaled images of each other"
        )
    if abs(hm_scaled.disc.h - h_small) > 1e-12 * h_small:
        raise GridScalingError(
            f"rescaled section has h = {hm_scaled.disc.h}, expected {h_small}"
        )
    lhs = resolvent_norm(hm, sigma * z)
    rhs = resolvent_norm(hm_scaled, z) / sigma
    if np.isinf(lhs) and np.isinf(rhs):
        rel = 0.0
    elif np.isinf(lhs) or np.isinf(rhs):
        rel = np.inf
    else:
        rel = abs(lhs - rhs) / lhs
    return RescaleReport(lhs, rhs, float(rel), h_small)


def contour_polylines(field, level):
    """Level-set polylines of the resolvent-norm field at ``level``.

    Marching-squares contours in (Re z, Im z) coordinates; +inf samples are
    clamped far above any meaningful level first.
    """
    from skimage import measure

    g = field.grid
    v = np.array(field.values, dtype=float)
    v[~np.isfinite(v)] = 1.0 / INFINITY_MARKER_RTOL
    dre = (g.re_max - g.re_min) / (g.nx - 1)
    dim = (g.im_max - g.im_min) / (g.ny - 1)
    polylines = []
    for contour in measure.find_contours(v, level):
        pts = np.empty_like(contour)
        pts[:, 0] = g.re_min + contour[:, 1] * dre
        pts[:, 1] = g.im_min + contour[:, 0] * dim
        polylines.append(pts.tolist())
    return polylines


def write_grid_csv(path, field, config=None):
    """Header with the grid spec, then nx*ny rows (Re z, Im z, norm)."""
    g = field.grid
    meta = dict(config or {})
    meta.update(
        grid=f"{g.re_min},{g.re_max},{g.im_min},{g.im_max},{g.nx},{g.ny}"
    )
    with _csvio.open_out(path) as fh:
        _csvio.write_lines(fh, _csvio.header_lines("pseudospectrum", meta))
        fh.write("re_z,im_z,norm\n")
        re = g.re_axis
        im = g.im_axis
        for iy in range(g.ny):
            for ix in range(g.nx):
                fh.write(f"{float(re[ix])!r},{float(im[iy])!r},"
                         f"{float(field.values[iy, ix])!r}\n")


def write_contours_json(path, field, levels, config=None):
    """JSON polyline export of one or more resolvent-norm level sets."""
    payload = {
        "schema": f"nonherm.contours/{_csvio.SCHEMA_VERSION}",
        "config": {k: _csvio.fmt(v) for k, v in sorted((config or {}).items())},
        "levels": [
            {"level": float(level), "polylines": contour_polylines(field, level)}
            for level in levels
        ],
    }
    with _csvio.open_out(path) as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def write_rbound_csv(path, samples, config=None):
    """One row per scan sample: sigma, Re/Im of sigma z, norm, kappa, flag."""
    with _csvio.open_out(path) as fh:
        _csvio.write_lines(fh, _csvio.header_lines("rbound", config))
        fh.write("sigma,re_z,im_z,norm,kappa,flagged\n")
        for s in samples:
            fh.write(
                f"{float(s.sigma)!r},{float(s.z.real)!r},{float(s.z.imag)!r},"
                f"{float(s.norm)!r},{float(s.kappa)!r},{int(s.flagged)}\n"
            )
