"""Exception hierarchy for the toolkit.

Every failure mode named by an operation contract has a dedicated class so
callers (and the CLI) can report it verbatim.
"""


class NonHermError(Exception):
    """Base class for all toolkit errors."""


class InputError(NonHermError):
    """Invalid argument: wrong shape, NaN/Inf entries, out-of-range value."""


class ConvergenceError(NonHermError):
    """An iterative kernel failed to converge.

    For the dense eigensolver the message names the stalled deflation index
    reported by the QR iteration.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class SingularMatrixError(NonHermError):
    """Linear solve hit a zero (or working-precision) pivot.

    ``pivot_index`` is the 0-based elimination step that failed.
    """

    def __init__(self, message, pivot_index=None):
        super().__init__(message)
        self.pivot_index = pivot_index


class PairingError(NonHermError):
    """No adjoint eigenvalue matched within the pairing tolerance."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class NearDefectError(NonHermError):
    """Left/right overlap below working precision: Jordan-like degeneracy."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ResolventError(NonHermError):
    """Requested shift lies in (or numerically on) the spectrum."""


class GridMismatchError(InputError):
    """Two objects that must share a grid were built on different grids."""


class GridScalingError(InputError):
    """Matched-discretization precondition violated in the rescaling check."""


class BranchError(NonHermError):
    """Square-root branch ambiguous: z - V(x) met the cut too closely.

    ``x`` is the offending abscissa.
    """

    def __init__(self, message, x=None):
        super().__init__(message)
        self.x = x


class PseudomodeError(NonHermError):
    """Constructed mode failed a structural check (decay at cutoff edges)."""


class ScanError(NonHermError):
    """Parameter scan produced inconsistent data (non-monotone residuals)."""


class SingularMetricError(NonHermError):
    """Truncated metric too ill-conditioned to invert on its range.

    This failure is meaningful output: the similarity transformation is
    expected to degrade as the truncation rank grows.
    """
