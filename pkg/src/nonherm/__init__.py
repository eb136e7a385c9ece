"""Numerics for non-self-adjoint Schrodinger sections.

Spectra, biorthogonal bases, pseudospectra, semiclassical pseudomodes,
and truncated metric operators for one-dimensional operators
-h^2 d^2/dx^2 + V(x) with complex polynomial potentials, built around
the imaginary cubic oscillator as the canonical stress case.
"""

from . import (cli, discretize, errors, lacore, metric, pseudomode,
               pseudospec, spectra)
from ._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "__version__",
    "cli",
    "discretize",
    "errors",
    "lacore",
    "metric",
    "pseudomode",
    "pseudospec",
    "spectra",
]
