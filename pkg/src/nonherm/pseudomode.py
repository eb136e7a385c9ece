"""WKB pseudomodes: explicit approximate eigenstates certifying resolvent
lower bounds.

For a shift z = eta^2 + i a^3 (Re z > 0, Im z != 0) the imaginary cubic
potential has a real turning point a where Im V(a) = Im z, and the
leading-order JWKB ansatz

    psi(x) = chi(x) (z - V(x))^{-1/4} exp((i/h) int_a^x sqrt(z - V(t)) dt)

localized there by a smooth bump chi is an O(h^2) quasimode of
H_h = -h^2 d^2/dx^2 + V.  Its relative residual r certifies
||(H_h - z)^{-1}|| >= 1/r, and the scan over decreasing h measures the
certified divergence rate.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import _csvio
from .discretize import PolynomialPotential, build_matrix, grid_of
from .errors import (
    BranchError,
    GridMismatchError,
    InputError,
    PseudomodeError,
    ScanError,
)

CUBIC = PolynomialPotential((0.0, 0.0, 1j))
PHASE_TOL = 1e-10
RBOUND_EXPONENT = 6.0 / 5.0


@dataclass(frozen=True)
class TurningPoint:
    a: float
    eta: float
    im_v_prime: float


def turning_point(z):
    """Real turning point of the imaginary cubic at z = eta^2 + i a^3.

    a = cbrt(Im z), eta = sqrt(Re z), Im V'(a) = 3 a^2.  Requires
    Re z > 0 and Im z != 0 (otherwise a = 0 and the construction
    degenerates).
    """
    z = complex(z)
    if z.imag == 0:
        raise InputError("Im z = 0: turning point degenerates to a = 0")
    if z.real <= 0:
        raise InputError("need Re z > 0")
    a = float(np.cbrt(z.imag))
    eta = float(np.sqrt(z.real))
    return TurningPoint(a, eta, 3.0 * a * a)


@dataclass(frozen=True, eq=False)
class Pseudomode:
    """Constructed mode sampled on a discretization grid (function values)."""

    grid_values: np.ndarray
    z: complex
    h: float
    a: float
    cutoff_center: float
    cutoff_width: float
    grid: np.ndarray
    im_phase_at_edges: tuple


def _turning_center(p, z):
    """Real solution of Im V(a) = Im z, preferring the least degenerate."""
    if p.coefficients == CUBIC.coefficients:
        return float(np.cbrt(z.imag))
    im_coeffs = [c.imag for c in p.coefficients]
    if not any(im_coeffs):
        raise InputError("potential has no imaginary part; no turning point")
    poly = np.array([0.0] + im_coeffs)
    poly[0] = -z.imag
    roots = np.polynomial.polynomial.polyroots(poly)
    real = [r.real for r in roots if abs(r.imag) <= 1e-9 * (1 + abs(r))]
    if not real:
        raise InputError(f"no real turning point for Im z = {z.imag}")
    dpoly = np.polynomial.polynomial.polyder(poly)

    def strength(a):
        return abs(np.polynomial.polynomial.polyval(a, dpoly))

    a = max(real, key=lambda r: (strength(r), r))
    if strength(a) == 0.0:
        raise InputError(f"turning point at {a} is degenerate (Im V' = 0)")
    return float(a)


def _adaptive_simpson(f, x0, x1, eps, depth=30):
    fa = f(x0)
    fb = f(x1)
    xm = 0.5 * (x0 + x1)
    fm = f(xm)
    whole = (x1 - x0) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, s, eps, depth):
        m = 0.5 * (a + b)
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm = f(lm)
        frm = f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        if depth <= 0:
            raise PseudomodeError(
                f"phase quadrature failed to converge on [{a}, {b}]"
            )
        if abs(left + right - s) <= 15.0 * eps:
            return left + right + (left + right - s) / 15.0
        return recurse(a, m, fa, flm, fm, left, eps / 2.0, depth - 1) + recurse(
            m, b, fm, frm, fb, right, eps / 2.0, depth - 1
        )

    if x0 == x1:
        return 0.0 + 0.0j
    return recurse(x0, x1, fa, fm, fb, whole, eps, depth)


class _BranchTracker:
    """Continuity-tracked square root of q(x) = z - V(x) along the real line.

    The principal branch cuts along the negative real axis; whenever the
    path of q crosses it the sign of sqrt(q) flips (and the quarter-power
    amplitude factor rotates by -i) to keep the functions continuous.
    Crossings are located on a dense sample of the support; a crossing with
    |q| too small to resolve the side is ambiguous and raises BranchError.
    """

    def __init__(self, p, z, lo, hi, samples=4096):
        self.p = p
        self.z = z
        ts = np.linspace(lo, hi, samples)
        q = z - p.evaluate(ts)
        scale = float(np.max(np.abs(q)))
        neg = q.real < 0
        cross = neg[:-1] & neg[1:] & (np.sign(q.imag[:-1]) != np.sign(q.imag[1:]))
        self.flip_points = []
        for i in np.flatnonzero(cross):
            t = self._bisect(ts[i], ts[i + 1])
            qq = z - complex(p.evaluate(t))
            if abs(qq) < 1e-12 * scale:
                raise BranchError(
                    f"branch ambiguous: z - V({t:.6g}) = {qq:.3e} sits on the cut",
                    x=float(t),
                )
            self.flip_points.append(float(t))
        self.flip_points = np.array(self.flip_points)

    def _bisect(self, t0, t1):
        f = lambda t: (self.z - complex(self.p.evaluate(t))).imag
        f0 = f(t0)
        for _ in range(80):
            tm = 0.5 * (t0 + t1)
            fm = f(tm)
            if f0 * fm <= 0:
                t1 = tm
            else:
                t0, f0 = tm, fm
        return 0.5 * (t0 + t1)

    def _parity(self, t):
        return (-1.0) ** np.searchsorted(self.flip_points, t)

    def sqrt_q(self, t):
        q = self.z - self.p.evaluate(t)
        return self._parity(t) * np.sqrt(q)

    def amp(self, t):
        """Continuity-tracked (z - V)^{-1/4}; principal at parity +1."""
        q = self.z - self.p.evaluate(t)
        rot = np.where(self._parity(t) > 0, 1.0, -1.0j)
        return rot * q ** (-0.25)


def _bump(s):
    """C-infinity bump profile exp(1 - 1/(1 - s^2)) on |s| < 1, 0 outside."""
    s = np.abs(np.asarray(s, dtype=float))
    out = np.zeros(s.shape)
    inner = s < 1.0
    out[inner] = np.exp(1.0 - 1.0 / (1.0 - s[inner] ** 2))
    return out


def build_wkb_pseudomode(p, z, h, d, cutoff_width=None):
    """Leading-order WKB mode for H_h = -h^2 d^2/dx^2 + V at shift z.

    The square-root branch makes Im of the phase integral increase away
    from the turning point on both sides (the mode decays in both
    directions); the amplitude quarter power is principal at the center.
    The cutoff is 1 on [a - w/2, a + w/2] and vanishes outside [a - w, a + w]
    (default w = |a|/2, shrunk if the truncation box requires it).
    """
    z = complex(z)
    if h <= 0:
        raise InputError("h must be positive")
    if not isinstance(p, PolynomialPotential):
        p = PolynomialPotential(tuple(p))
    a = _turning_center(p, z)
    x, _ = grid_of(d)
    # default support reaches 2|a| so the WKB decay exp(-Im phi / h) has
    # already flattened the mode at the edges; a tight cutoff would leak a
    # chi-commutator term of order h/width into the residual
    w = 2.0 * abs(a) if cutoff_width is None else float(cutoff_width)
    if w <= 0:
        raise InputError("cutoff width must be positive")
    room = min(a - x[0], x[-1] - a)
    if room <= 0:
        raise InputError(
            f"turning point {a:.4g} lies outside the grid [{x[0]:.4g}, {x[-1]:.4g}]"
        )
    w = min(w, 0.999 * room)
    if w < 1e-2 * max(abs(a), 1.0):
        raise InputError(
            "cutoff support cannot fit inside the truncation box; "
            "enlarge the box or the basis scale"
        )

    tracker = _BranchTracker(p, z, a - 1.001 * w, a + 1.001 * w)
    support = np.flatnonzero(np.abs(x - a) <= w)
    if support.size < 8:
        raise InputError("fewer than 8 grid points inside the cutoff support")
    xs = x[support]

    # cumulative phase integral from a, adaptive Simpson segment by segment
    anchors = np.concatenate([xs, [a]])
    anchors.sort()
    ai = int(np.searchsorted(anchors, a))
    phase_at = {}
    acc = 0.0 + 0.0j
    prev = a
    for t in anchors[ai:]:
        acc += _adaptive_simpson(
            tracker.sqrt_q, prev, t, PHASE_TOL * max(1.0, abs(acc))
        )
        phase_at[t] = acc
        prev = t
    acc = 0.0 + 0.0j
    prev = a
    for t in anchors[:ai][::-1]:
        acc += _adaptive_simpson(
            tracker.sqrt_q, prev, t, PHASE_TOL * max(1.0, abs(acc))
        )
        phase_at[t] = acc
        prev = t
    phi = np.array([phase_at[t] for t in xs])

    # decaying branch: Im of the phase must grow on both sides
    sign = 1.0
    if phi[-1].imag < 0:
        sign = -1.0
    left_im = sign * phi[0].imag
    right_im = sign * phi[-1].imag
    if left_im < 0 or right_im < 0:
        raise BranchError(
            "no single branch decays on both sides of the turning point "
            f"(Im phase at edges: {left_im:.3e}, {right_im:.3e})",
            x=float(xs[0] if left_im < 0 else xs[-1]),
        )

    amp = tracker.amp(xs)
    s = np.clip((np.abs(xs - a) - 0.5 * w) / (0.5 * w), 0.0, None)
    chi = _bump(s)
    mode = chi * amp * np.exp(1j * sign * phi / h)

    values = np.zeros(x.shape, dtype=np.complex128)
    values[support] = mode
    mags = np.abs(values)
    peak = int(np.argmax(mags))
    if mags[peak] == 0.0:
        raise PseudomodeError("constructed mode vanished identically")
    if abs(x[peak] - a) > w:
        raise PseudomodeError(
            f"mode peaks at x = {x[peak]:.4g}, outside the cutoff around {a:.4g}"
        )
    edge = max(mags[support[0]], mags[support[-1]])
    if edge > 0.5 * mags[peak]:
        raise PseudomodeError(
            f"mode does not decay at the cutoff edges: edge/max = "
            f"{edge / mags[peak]:.3e}"
        )
    return Pseudomode(
        values, z, float(h), a, a, w, x, (float(left_im), float(right_im))
    )


@dataclass(frozen=True)
class ResidualCertificate:
    """Relative residual r and the resolvent lower bound 1/r it certifies."""

    residual: float
    lower_bound: float


def residual(hm, z, mode):
    """r = ||(H_h - z) psi|| / ||psi|| in the discrete quadrature norm."""
    if not np.array_equal(hm.grid, mode.grid):
        raise GridMismatchError("mode and matrix grids differ")
    if hm.disc.h != mode.h:
        raise GridMismatchError(
            f"matrix has h = {hm.disc.h}, mode was built for h = {mode.h}"
        )
    v = np.sqrt(hm.quadrature_weights) * mode.grid_values
    nv = np.linalg.norm(v)
    if nv == 0.0:
        raise InputError("mode has zero norm")
    r = float(np.linalg.norm(hm.matrix @ v - complex(z) * v) / nv)
    return ResidualCertificate(r, 1.0 / r)


@dataclass(frozen=True, eq=False)
class ExponentScan:
    """log-log growth of the certified bound 1/r against 1/h."""

    hs: np.ndarray
    residuals: np.ndarray
    certified_lower_bounds: np.ndarray
    slopes: np.ndarray
    fitted_slope: float
    exceeds_rbound_threshold: bool


def lbound_exponent_scan(z, hs, d, p=CUBIC, cutoff_width=None):
    """Residual scan over decreasing h with the certified growth exponent.

    Certified lower bounds 1/r(h) are fit in log-log against 1/h; the flag
    reports whether the measured exponent exceeds 6/5, the rate at which
    the rescaling sigma = h^{-6/5} turns the small-h divergence into
    unbounded growth of ||(H - sigma z)^{-1}|| * |Im(sigma z)| along the
    ray, contradicting any const/|Im z| resolvent bound.
    """
    hs = np.asarray([float(h) for h in hs])
    if hs.size < 2 or np.any(np.diff(hs) >= 0):
        raise InputError("hs must be strictly decreasing with >= 2 entries")
    res = []
    for h in hs:
        dh = replace(d, h=float(h))
        hm = build_matrix(p, dh)
        mode = build_wkb_pseudomode(p, z, float(h), dh, cutoff_width)
        res.append(residual(hm, z, mode).residual)
    res = np.asarray(res)
    if np.any(np.diff(res) >= 0):
        raise ScanError(
            "residuals are not strictly decreasing in h; spatial resolution "
            f"is insufficient for this h range (r = {res.tolist()})"
        )
    logs = np.log(1.0 / res)
    logh = np.log(1.0 / hs)
    slopes = np.diff(logs) / np.diff(logh)
    fitted = float(np.polyfit(logh, logs, 1)[0])
    return ExponentScan(
        hs, res, 1.0 / res, slopes, fitted, bool(fitted > RBOUND_EXPONENT)
    )


def sigma_for_h(h):
    """The ray scale equivalent to a semiclassical parameter: sigma = h^{-6/5}."""
    return float(h) ** (-6.0 / 5.0)


def write_scan_csv(path, scan, config=None):
    """One row per h: h, residual, certified lower bound."""
    with _csvio.open_out(path) as fh:
        _csvio.write_lines(fh, _csvio.header_lines("pseudomode", config))
        fh.write("h,residual,lower_bound\n")
        for h, r, b in zip(scan.hs, scan.residuals, scan.certified_lower_bounds):
            fh.write(f"{float(h)!r},{float(r)!r},{float(b)!r}\n")


def write_mode_csv(path, mode, config=None):
    """Mode dump for plotting: x, Re psi, Im psi."""
    with _csvio.open_out(path) as fh:
        _csvio.write_lines(fh, _csvio.header_lines("mode", config))
        fh.write("x,re_psi,im_psi\n")
        for x, v in zip(mode.grid, mode.grid_values):
            fh.write(f"{float(x)!r},{float(v.real)!r},{float(v.imag)!r}\n")
