"""Finite sections of H = -h^2 d^2/dx^2 + V(x) for complex polynomial V.

Two schemes, both producing complex symmetric matrices on grids symmetric
about the origin:

* finite_difference: second-order central stencil with Dirichlet cutoff at
  +-L, potential evaluated pointwise on the uniform grid.
* hermite_collocation: exact second-derivative action on the span of the
  first N scaled Hermite functions, potential applied diagonally at the
  Gauss-Hermite nodes (a discrete-variable representation).  Vectors in
  this representation are sqrt(w_i) * psi(x_i) with the Christoffel
  quadrature weights w_i.

No attempt is made to model operator-domain subtleties beyond the
truncation itself; the box/scale is the only domain control.
"""

import re
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.special import roots_hermite

from .errors import InputError

SCHEME_FD = "finite_difference"
SCHEME_HERMITE = "hermite_collocation"
_SCHEME_ALIASES = {
    "fd": SCHEME_FD,
    "finite_difference": SCHEME_FD,
    "hermite": SCHEME_HERMITE,
    "hermite_collocation": SCHEME_HERMITE,
}

MAX_DEGREE = 12


@dataclass(frozen=True)
class PolynomialPotential:
    """V(x) = sum_{m>=1} coefficients[m-1] * x^m.

    There is no constant term; an empty tuple is the zero potential.
    """

    coefficients: tuple

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.coefficients)
        if len(coeffs) > MAX_DEGREE:
            raise InputError(f"potential degree > {MAX_DEGREE}")
        if not all(np.isfinite(c.real) and np.isfinite(c.imag) for c in coeffs):
            raise InputError("potential coefficients must be finite")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def degree(self):
        deg = 0
        for m, c in enumerate(self.coefficients, start=1):
            if c != 0:
                deg = m
        return deg

    @property
    def pt_symmetric(self):
        """V(-x) = conj(V(x)): even powers real, odd powers imaginary."""
        for m, c in enumerate(self.coefficients, start=1):
            if m % 2 == 0 and c.imag != 0.0:
                return False
            if m % 2 == 1 and c.real != 0.0:
                return False
        return True

    @property
    def davies_sectorial(self):
        """Even top degree with leading coefficient in the open quadrant."""
        deg = self.degree
        if deg == 0 or deg % 2 != 0:
            return False
        top = self.coefficients[deg - 1]
        return top.real > 0.0 and top.imag > 0.0

    def evaluate(self, x):
        x = np.asarray(x)
        v = np.zeros(x.shape, dtype=np.complex128)
        for m in range(len(self.coefficients), 0, -1):
            v = (v + self.coefficients[m - 1]) * x
        return v

    def conjugate(self):
        return PolynomialPotential(tuple(np.conj(self.coefficients)))

    def text(self):
        if self.degree == 0:
            return "0"
        parts = []
        for m, c in enumerate(self.coefficients, start=1):
            if c.real != 0:
                parts.append(f"{c.real:g}*x^{m}")
            if c.imag != 0:
                parts.append(f"{c.imag:g}i*x^{m}")
        return " + ".join(parts).replace("+ -", "- ")


_TERM = re.compile(
    r"""\s*(?P<sign>[+-])?\s*
        (?P<coef>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)?
        \s*(?P<imag>i)?
        \s*\*?\s*
        x
        (?:\s*\^\s*(?P<power>\d+))?""",
    re.VERBOSE,
)


def parse_potential(text):
    """Parse "i*x^3", "x^2 + 0.5i*x^3", ... into a PolynomialPotential.

    Grammar: sum of signed complex coefficients times x^m with 1 <= m <= 12.
    """
    if text.strip() == "0":
        return PolynomialPotential(())
    coeffs = {}
    pos = 0
    first = True
    while pos < len(text) and text[pos:].strip():
        mobj = _TERM.match(text, pos)
        if mobj is None or mobj.end() == pos:
            raise InputError(
                f"cannot parse potential at position {pos}: {text[pos:]!r}"
            )
        sign, coef, imag, power = (
            mobj.group("sign"),
            mobj.group("coef"),
            mobj.group("imag"),
            mobj.group("power"),
        )
        if not first and sign is None:
            raise InputError(
                f"missing +/- between terms near position {pos} in {text!r}"
            )
        value = float(coef) if coef is not None else 1.0
        value = value * (1j if imag else 1.0)
        if sign == "-":
            value = -value
        m = int(power) if power is not None else 1
        if m < 1 or m > MAX_DEGREE:
            raise InputError(f"power x^{m} outside 1..{MAX_DEGREE}")
        coeffs[m] = coeffs.get(m, 0.0) + value
        pos = mobj.end()
        first = False
    if not coeffs:
        raise InputError(f"no terms found in potential {text!r}")
    top = max(coeffs)
    return PolynomialPotential(tuple(coeffs.get(m, 0.0) for m in range(1, top + 1)))


@dataclass(frozen=True)
class Discretization:
    """Scheme plus size/box/scale and the semiclassical parameter h."""

    scheme: str
    n: int
    half_width: float = None
    hermite_scale: float = None
    h: float = 1.0

    def __post_init__(self):
        scheme = _SCHEME_ALIASES.get(self.scheme)
        if scheme is None:
            raise InputError(f"unknown scheme {self.scheme!r}")
        object.__setattr__(self, "scheme", scheme)
        if self.n < 8:
            raise InputError(f"N = {self.n} < 8")
        if scheme == SCHEME_FD:
            if self.half_width is None or self.half_width <= 0:
                raise InputError("finite_difference needs half_width L > 0")
        else:
            if self.hermite_scale is None:
                object.__setattr__(self, "hermite_scale", 1.0)
            if self.hermite_scale <= 0:
                raise InputError("hermite_collocation needs scale alpha > 0")
        if self.h <= 0:
            raise InputError("semiclassical h must be > 0")


def refined(d, factor=2):
    """Same discretization with N scaled by an integer factor."""
    return replace(d, n=int(d.n * factor))


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Finite section: matrix, grid, quadrature weights, and provenance."""

    matrix: np.ndarray
    grid: np.ndarray
    quadrature_weights: np.ndarray
    potential: PolynomialPotential
    disc: Discretization
    warnings: tuple = ()

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def is_tridiagonal(self):
        return self.disc.scheme == SCHEME_FD

    def norm_estimate(self):
        cached = self.__dict__.get("_norm_est")
        if cached is None:
            from .lacore import norm_estimate

            cached = norm_estimate(self.matrix)
            self.__dict__["_norm_est"] = cached
        return cached


@lru_cache(maxsize=8)
def _hermite_nodes_transform(n):
    """Symmetrized Gauss-Hermite nodes, Christoffel weights, and the
    orthogonal basis-to-grid transform.

    The Hermite-function recurrence underflows/overflows past N ~ 700 in
    double precision, so each node column carries a power-of-two exponent
    that is rescaled on the fly and folded back into the weights.
    """
    u = roots_hermite(n)[0]
    u = 0.5 * (u - u[::-1])
    ln2 = np.log(2.0)
    t0 = -u * u / 2.0 - 0.25 * np.log(np.pi)
    g = np.ceil(t0 / ln2)
    hf = np.zeros((n, n))
    hf[0] = np.exp(t0 - g * ln2)
    if n > 1:
        hf[1] = np.sqrt(2.0) * u * hf[0]
    for k in range(1, n - 1):
        nxt = np.sqrt(2.0 / (k + 1)) * u * hf[k] - np.sqrt(k / (k + 1)) * hf[k - 1]
        big = np.abs(nxt) > 2.0**500
        if np.any(big):
            hf[: k + 1, big] *= 2.0**-512
            nxt[big] *= 2.0**-512
            g[big] += 512
        hf[k + 1] = nxt
    colsum = np.einsum("ij,ij->j", hf, hf)
    lam = np.exp(-np.log(colsum) - 2.0 * g * ln2)
    t = hf / np.sqrt(colsum)[None, :]
    return u, lam, t


def _hermite_kinetic_basis(n):
    """Matrix of -d^2/du^2 on the first n Hermite functions (exact)."""
    k = np.arange(n)
    m = np.diag(2.0 * k + 1.0) - _usq_basis(n)
    return m


def _usq_basis(n):
    """Matrix of multiplication by u^2 on the first n Hermite functions."""
    k = np.arange(n)
    m = np.diag((2.0 * k + 1.0) / 2.0)
    j = np.arange(n - 2)
    off = np.sqrt((j + 1.0) * (j + 2.0)) / 2.0
    m[j, j + 2] = off
    m[j + 2, j] = off
    return m


def grid_of(d):
    """Grid abscissae and quadrature weights without building the matrix."""
    n = d.n
    if d.scheme == SCHEME_FD:
        length = d.half_width
        dx = 2.0 * length / (n + 1)
        x = -length + dx * np.arange(1, n + 1)
        x = 0.5 * (x - x[::-1])
        return x, np.full(n, dx)
    u, lam, _ = _hermite_nodes_transform(n)
    return u / d.hermite_scale, lam / d.hermite_scale


def build_matrix(p, d, spectral_window=None):
    """Finite section of -h^2 d^2/dx^2 + V(x) for the given discretization.

    ``spectral_window`` (largest eigenvalue magnitude of interest) triggers
    a warning record on the output when |V| at the grid edge is too small
    to confine states at that energy.
    """
    if not isinstance(p, PolynomialPotential):
        p = PolynomialPotential(tuple(p))
    n, h = d.n, d.h
    warnings = ()
    if d.scheme == SCHEME_FD:
        x, weights = grid_of(d)
        dx = weights[0]
        c = h * h / (dx * dx)
        m = np.zeros((n, n), dtype=np.complex128)
        idx = np.arange(n)
        m[idx, idx] = 2.0 * c + p.evaluate(x)
        m[idx[:-1], idx[:-1] + 1] = -c
        m[idx[:-1] + 1, idx[:-1]] = -c
    else:
        alpha = d.hermite_scale
        u, lam, t = _hermite_nodes_transform(n)
        x = u / alpha
        kin = (h * h * alpha * alpha) * (t.T @ _hermite_kinetic_basis(n) @ t)
        kin = 0.5 * (kin + kin.T)  # exact symmetry; matmul rounding breaks it
        m = kin.astype(np.complex128)
        m[np.arange(n), np.arange(n)] += p.evaluate(x)
        weights = lam / alpha
    if spectral_window is not None:
        edge = float(x[-1])
        vmag = abs(complex(p.evaluate(edge)))
        if vmag < 10.0 * abs(spectral_window):
            warnings += (
                f"truncation box may be too small for the requested window: "
                f"|V({edge:.4g})| = {vmag:.4g} < 10 * {abs(spectral_window):.4g}",
            )
    return OperatorMatrix(m, x, weights, p, d, warnings)


def adjoint_matrix(m):
    """Finite section of the adjoint: conjugated potential, same grid.

    For these symmetric-grid schemes the result equals m.matrix.conj().T
    entrywise exactly (real symmetric kinetic part, diagonal potential).
    """
    out = build_matrix(m.potential.conjugate(), m.disc)
    return replace(out, warnings=m.warnings)


@dataclass(frozen=True)
class SymmetryResiduals:
    """Relative Frobenius residuals of the parity/conjugation identities."""

    pt_commutator: float
    p_selfadjoint: float
    t_selfadjoint: float
    numerical_range_real_min: float


def symmetry_residuals(m):
    """Residuals of the PT-commutator, parity-adjoint, and
    conjugation-adjoint identities, plus the smallest eigenvalue of the
    Hermitian part.

    Parity acts by index reversal on the symmetric grid, time reversal by
    entrywise conjugation.
    """
    x = m.grid
    if np.max(np.abs(x + x[::-1])) != 0.0:
        raise InputError("grid is not symmetric about 0")
    a = m.matrix
    na = np.linalg.norm(a)
    # antilinear PT commutation: H P conj = P conj H  <=>  H@P = P@conj(H)
    pt = np.linalg.norm(a[:, ::-1] - np.conj(a)[::-1, :]) / na
    ad = a.conj().T
    p_res = np.linalg.norm(ad - a[::-1, ::-1]) / na
    t_res = np.linalg.norm(ad - np.conj(a)) / na
    herm_min = float(np.linalg.eigvalsh((a + ad) / 2.0)[0])
    return SymmetryResiduals(float(pt), float(p_res), float(t_res), herm_min)


def default_half_width(p, spectral_window):
    """Smallest box with |V(L)| >= 10 * window, by geometric search."""
    if p.degree == 0:
        raise InputError("zero potential does not confine any window")
    target = 10.0 * abs(spectral_window)
    length = 1.0
    for _ in range(200):
        if abs(complex(p.evaluate(length))) >= target:
            return length
        length *= 1.1
    raise InputError("no confining half-width below the search cap")


def default_hermite_scale(p, n=64, candidates=None):
    """Scale minimizing the lowest-eigenvalue drift between N/2 and N.

    Deterministic ladder search; near-ties (within a factor 2 of the best
    drift, or below the 1e-12 roundoff floor) resolve toward alpha = 1.
    """
    from .lacore import eig_dense

    if candidates is None:
        candidates = sorted([0.5 * 1.25**k for k in range(11)] + [1.0])
    drifts = []
    for alpha in candidates:
        e = {}
        for size in (n // 2, n):
            d = Discretization(SCHEME_HERMITE, size, hermite_scale=alpha)
            lam = eig_dense(build_matrix(p, d).matrix).eigenvalues
            e[size] = lam[np.argmin(np.abs(lam))]
        drift = abs(e[n] - e[n // 2]) / max(abs(e[n]), 1e-300)
        drifts.append(drift)
    best = min(drifts)
    eligible = [
        alpha
        for alpha, drift in zip(candidates, drifts)
        if drift <= max(2.0 * best, 1e-12)
    ]
    return min(eligible, key=lambda alpha: abs(np.log(alpha)))
