"""Kernel-layer tests: SVD agreement, backend parity, fallback paths."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from nonherm import _kernels
from nonherm._kernels import _smin_py

try:
    from nonherm._kernels import _smin_cy
except ImportError:
    _smin_cy = None

BACKENDS = [_smin_py] + ([_smin_cy] if _smin_cy else [])


def _random_matrix(rng, n):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


@pytest.mark.parametrize("n", [2, 3, 7, 40, 160])
def test_dense_matches_svd(rng, n):
    a = _random_matrix(rng, n)
    s_ref = np.linalg.svd(a, compute_uv=False)[-1]
    assert _kernels.smin_dense(a) == pytest.approx(s_ref, rel=1e-9)


@pytest.mark.parametrize("n", [2, 3, 7, 40, 160])
def test_triangular_matches_svd(rng, n):
    t = np.triu(_random_matrix(rng, n)) + 3.0 * np.eye(n)
    s_ref = np.linalg.svd(t, compute_uv=False)[-1]
    assert _kernels.smin_triangular(t) == pytest.approx(s_ref, rel=1e-9)


@pytest.mark.parametrize("n", [2, 3, 7, 40, 400])
def test_tridiag_matches_svd(rng, n):
    dl = _random_matrix(rng, 1)[0, 0] * np.ones(n - 1) + rng.standard_normal(
        n - 1)
    du = rng.standard_normal(n - 1) + 1j * rng.standard_normal(n - 1)
    d = rng.standard_normal(n) + 1j * rng.standard_normal(n) + 4.0
    a = np.diag(d) + np.diag(dl, -1) + np.diag(du, 1)
    s_ref = np.linalg.svd(a, compute_uv=False)[-1]
    assert _kernels.smin_tridiag(dl, d, du) == pytest.approx(s_ref, rel=1e-9)


def test_two_by_two_closed_form(rng):
    for _ in range(25):
        a = _random_matrix(rng, 2)
        assert _kernels.smin_dense(a) == pytest.approx(
            oracles.svd2x2(a)[-1], rel=1e-10)


def test_exactly_singular_returns_zero(rng):
    a = _random_matrix(rng, 6)
    a[:, 3] = 0.0
    assert _kernels.smin_dense(a) == 0.0
    t = np.triu(_random_matrix(rng, 5))
    t[2, 2] = 0.0
    assert _kernels.smin_triangular(t) == 0.0


def test_tridiag_singular_returns_zero():
    n = 5
    dl = np.zeros(n - 1, dtype=complex)
    du = np.zeros(n - 1, dtype=complex)
    d = np.ones(n, dtype=complex)
    d[2] = 0.0
    assert _kernels.smin_tridiag(dl, d, du) == 0.0


def test_size_one():
    assert _kernels.smin_dense(np.array([[3.0 - 4.0j]])) == 5.0
    assert _kernels.smin_tridiag(
        np.zeros(0, complex), np.array([2.0j]), np.zeros(0, complex)) == 2.0


@pytest.mark.skipif(_smin_cy is None, reason="compiled backend not built")
def test_backend_parity(rng):
    """Both backends run the identical iteration on identical LAPACK
    factorizations, so their outputs agree to rounding."""
    for n in (4, 23, 90):
        a = _random_matrix(rng, n)
        af = np.asfortranarray(a)
        assert _smin_py.smin_dense(af) == pytest.approx(
            _smin_cy.smin_dense(af), rel=1e-12)
        t = np.asfortranarray(np.triu(a) + 2.0 * np.eye(n))
        assert _smin_py.smin_triangular(t) == pytest.approx(
            _smin_cy.smin_triangular(t), rel=1e-12)
        dl, d, du = a.diagonal(-1).copy(), a.diagonal().copy(), a.diagonal(
            1).copy()
        assert _smin_py.smin_tridiag(dl, d, du) == pytest.approx(
            _smin_cy.smin_tridiag(dl, d, du), rel=1e-12)


def test_stagnation_sentinel_triggers_svd_fallback(monkeypatch):
    called = {}

    def fake_dense(a):
        called["hit"] = True
        return -1.0

    monkeypatch.setattr(_kernels._backend, "smin_dense", fake_dense)
    a = np.diag([1.0, 2.0, 3.0]).astype(complex)
    assert _kernels.smin_dense(a) == pytest.approx(1.0, rel=1e-14)
    assert called["hit"]


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**31 - 1))
def test_smin_is_a_lower_bound_on_column_action(n, seed):
    """s_min <= ||A e_j|| for every j; equality patterns caught by SVD."""
    r = np.random.default_rng(seed)
    a = r.standard_normal((n, n)) + 1j * r.standard_normal((n, n))
    s = _kernels.smin_dense(a)
    col_norms = np.linalg.norm(a, axis=0)
    assert s <= col_norms.min() * (1 + 1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 10), st.integers(0, 2**31 - 1),
       st.floats(0.1, 10.0))
def test_smin_scales_homogeneously(n, seed, c):
    r = np.random.default_rng(seed)
    a = r.standard_normal((n, n)) + 1j * r.standard_normal((n, n))
    assert _kernels.smin_dense(c * a) == pytest.approx(
        c * _kernels.smin_dense(a), rel=1e-9)
