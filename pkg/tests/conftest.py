"""Shared fixtures: the expensive eigensystems are built once per session."""

import numpy as np
import pytest

from nonherm import discretize, spectra

HERMITE_N = 400
HERMITE_ALPHA = 3.0


@pytest.fixture(scope="session")
def cubic():
    return discretize.parse_potential("i*x^3")


@pytest.fixture(scope="session")
def disc400():
    return discretize.Discretization(
        "hermite", HERMITE_N, hermite_scale=HERMITE_ALPHA)


@pytest.fixture(scope="session")
def hm400(cubic, disc400):
    return discretize.build_matrix(cubic, disc400)


@pytest.fixture(scope="session")
def sys12_400(cubic, disc400):
    """First 12 gate-passing ix^3 eigenpairs at N=400 (vector grade)."""
    gated = spectra.converged_system(
        cubic, disc400, 16, rel_tol=spectra.VECTOR_GATE_RTOL)
    return spectra.select_converged(gated, 12)


@pytest.fixture(scope="session")
def sys16_800(cubic):
    """Ungated 16-pair system at N=800 for cross-resolution agreement."""
    d = discretize.Discretization(
        "hermite", 2 * HERMITE_N, hermite_scale=HERMITE_ALPHA)
    return spectra.biorthogonal_system(discretize.build_matrix(cubic, d), 16)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260814)
