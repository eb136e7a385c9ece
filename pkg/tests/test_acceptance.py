"""Acceptance suite: one test per toolkit-level claim, stated tolerances.

Each test prints a single PASS/FAIL summary line (visible with -s, or in
the failure report) and then asserts.  Criterion 1 is split into its two
discretization halves so the finite-difference calibration result is
visible independently of the spectral one.
"""

import time

import numpy as np
import pytest

from nonherm import discretize as dz
from nonherm import metric as mt
from nonherm import pseudomode as pmode
from nonherm import pseudospec as ps
from nonherm import spectra as sp

import oracles

CUBIC = dz.parse_potential("i*x^3")
HARMONIC = dz.parse_potential("x^2")


def _line(cid, ok, detail):
    print(f"{cid}: {'PASS' if ok else 'FAIL'} ({detail})")
    return ok


@pytest.fixture(scope="module")
def hm400():
    return dz.build_matrix(CUBIC, dz.Discretization("hermite", 400, hermite_scale=3.0))


@pytest.fixture(scope="module")
def sys12(hm400):
    # vector-grade gate vs the refined grid, then compact to 12 converged pairs
    d = dz.Discretization("hermite", 400, hermite_scale=3.0)
    gated = sp.converged_system(CUBIC, d, 14, rel_tol=1e-2)
    return sp.select_converged(gated, 12)


@pytest.fixture(scope="module")
def sys800():
    hm = dz.build_matrix(CUBIC, dz.Discretization("hermite", 800, hermite_scale=3.0))
    return sp.biorthogonal_system(hm, 14)


def test_c01_selfadjoint_calibration_fd():
    t0 = time.time()
    hm = dz.build_matrix(HARMONIC, dz.Discretization("fd", 2000, half_width=12.0))
    lam = sp.eigenvalues_of(hm, k=8)
    elapsed = time.time() - t0
    exact = np.arange(1.0, 16.0, 2.0)
    err = float(np.max(np.abs(lam.real - exact) / exact))
    ok = err <= 1e-5 and elapsed <= 10.0
    assert _line("C01[fd]", ok, f"max rel err {err:.3e} vs 1e-5, {elapsed:.1f}s"), (
        f"fd calibration: second-order stencil floor, max rel err {err:.3e} > 1e-5"
    )


def test_c01_selfadjoint_calibration_hermite():
    t0 = time.time()
    hm = dz.build_matrix(HARMONIC, dz.Discretization("hermite", 200, hermite_scale=1.0))
    lam = sp.eigenvalues_of(hm, k=8)
    elapsed = time.time() - t0
    exact = np.arange(1.0, 16.0, 2.0)
    err = float(np.max(np.abs(lam.real - exact) / exact))
    ok = err <= 1e-8 and elapsed <= 10.0
    assert _line("C01[hermite]", ok, f"max rel err {err:.3e} vs 1e-8, {elapsed:.1f}s")


def test_c02_spectrum_reality_vs_shooting():
    t0 = time.time()
    lam_ref = np.asarray(oracles.shooting_eigenvalues())[:5]
    d = dz.Discretization("hermite", 300, hermite_scale=3.0)
    gated = sp.converged_system(CUBIC, d, 5, rel_tol=1e-7)
    lam = sp.select_converged(gated, 5).eigenvalues
    elapsed = time.time() - t0
    imag_rel = float(np.max(np.abs(lam.imag) / np.abs(lam)))
    oracle_rel = float(np.max(np.abs(lam - lam_ref) / np.abs(lam_ref)))
    ok = imag_rel <= 1e-6 and oracle_rel <= 1e-6 and elapsed <= 60.0
    assert _line(
        "C02", ok, f"max|Im|/|lam| {imag_rel:.2e}, shooting dev {oracle_rel:.2e}, {elapsed:.1f}s"
    )


def test_c03_symmetry_identities():
    hm = dz.build_matrix(CUBIC, dz.Discretization("fd", 400, half_width=10.0))
    r = dz.symmetry_residuals(hm)
    symmetric = bool(np.array_equal(hm.matrix, hm.matrix.T))
    worst = max(r.pt_commutator, r.p_selfadjoint, r.t_selfadjoint)
    ok = worst <= 1e-12 and symmetric
    assert _line("C03", ok, f"worst residual {worst:.1e}, complex symmetric {symmetric}")


def test_c04_pseudospectrum_inclusion(hm400, sys12):
    g = ps.GridSpec(0.0, 30.0, 0.0, 15.0, 60, 30)
    field = ps.pseudospectrum_grid(hm400, g)
    rep = ps.epsilon_inclusion_check(field, sys12.eigenvalues[:10], 2.0)

    # normal control: for x^2 the resolvent norm equals 1/dist(z, spectrum)
    hm2 = dz.build_matrix(HARMONIC, dz.Discretization("hermite", 200, hermite_scale=1.0))
    g2 = ps.GridSpec(0.0, 10.0, 0.25, 5.0, 24, 12)
    f2 = ps.pseudospectrum_grid(hm2, g2)
    lam2 = sp.eigenvalues_of(hm2)
    mesh_im, mesh_re = np.meshgrid(g2.im_axis, g2.re_axis, indexing="ij")
    dist = np.min(np.abs((mesh_re + 1j * mesh_im)[..., None] - lam2[None, None, :]), axis=2)
    normal_dev = float(np.max(np.abs(f2.values - 1.0 / dist) * dist))

    ok = rep.checked > 0 and rep.violations == 0 and normal_dev <= 1e-8
    assert _line(
        "C04",
        ok,
        f"{rep.checked} points, {rep.violations} violations, worst margin {rep.worst_margin:.2f}, "
        f"normal dev {normal_dev:.1e}",
    )


def test_c05_rbound_violation_two_resolutions():
    t0 = time.time()
    z = np.exp(1j * np.pi / 4)
    sigmas = [10.0, 20.0, 40.0, 80.0]
    kappas = {}
    for n in (2000, 4000):
        hm = dz.build_matrix(CUBIC, dz.Discretization("fd", n, half_width=16.0))
        rows = ps.rbound_scan(hm, z, sigmas)
        assert not any(s.flagged for s in rows)
        kappas[n] = np.array([s.kappa for s in rows])
    elapsed = time.time() - t0
    k1, k2 = kappas[2000], kappas[4000]
    increasing = bool(np.all(np.diff(k1) > 0))
    growth = float(k1[-1] / k1[0])
    stability = float(np.max(np.abs(k1 - k2) / k2))
    ok = increasing and growth >= 10.0 and stability <= 0.05 and elapsed <= 300.0
    assert _line(
        "C05",
        ok,
        f"kappa(80)/kappa(10) {growth:.0f}, cross-resolution dev {stability:.2%}, {elapsed:.1f}s",
    )


def test_c06_semiclassical_rescaling():
    d = dz.Discretization("hermite", 300, hermite_scale=3.0)
    r1 = ps.semiclassical_rescale_check(CUBIC, 1.0 + 1.0j, 1.0, d)
    r16 = ps.semiclassical_rescale_check(CUBIC, 1.0 + 1.0j, 16.0, d)
    ok = r1.rel_dev == 0.0 and r16.rel_dev <= 0.02
    assert _line("C06", ok, f"sigma=1 dev {r1.rel_dev:.1e} exact, sigma=16 dev {r16.rel_dev:.1e}")


def test_c07_pseudomode_residual_decay():
    z = 1.0 + 1.0j
    hs = [0.1, 0.05, 0.025, 0.0125]
    d = dz.Discretization("hermite", 600, hermite_scale=8.0)
    scan = pmode.lbound_exponent_scan(z, hs, d, p=CUBIC)
    decreasing = bool(np.all(np.diff(scan.residuals) < 0))
    ratios = scan.residuals[:-1] / scan.residuals[1:]
    norms = np.array(
        [
            ps.resolvent_norm(
                dz.build_matrix(CUBIC, dz.Discretization("hermite", 600, hermite_scale=8.0, h=h)), z
            )
            for h in hs
        ]
    )
    duality = bool(np.all(scan.certified_lower_bounds <= 1.05 * norms))
    ok = decreasing and bool(np.all(ratios >= 1.8)) and duality
    assert _line(
        "C07",
        ok,
        f"halving ratios {np.array2string(ratios, precision=2)}, "
        f"duality 1/r <= ||R|| within 5% {duality}",
    )


def test_c08_riesz_failure_witness(sys12, sys800):
    kap = sys12.condition_numbers[:10]
    increasing = bool(np.all(np.diff(kap) > 0))
    dev = []
    for lam, k in zip(sys12.eigenvalues[:10], kap):
        j = int(np.argmin(np.abs(sys800.eigenvalues - lam)))
        dev.append(abs(k - sys800.condition_numbers[j]) / sys800.condition_numbers[j])
    agreement = float(max(dev))
    ratios = []
    for k in (4, 8, 12):
        fb = sp.frame_bounds(sys12.right_vectors[:, :k])
        ratios.append(fb.upper / fb.lower)
    frame_increasing = ratios[0] < ratios[1] < ratios[2]
    ok = increasing and agreement <= 0.01 and frame_increasing
    assert _line(
        "C08",
        ok,
        f"kappa increasing {increasing}, two-resolution dev {agreement:.1e}, "
        f"frame ratios {ratios[0]:.1e} < {ratios[1]:.1e} < {ratios[2]:.1e}",
    )


def test_c09_metric_existence(hm400, sys12):
    worst_sub = 0.0
    for rule in ("kappa_scaled", "geometric"):
        t = mt.build_metric(sys12, 8, weight_rule=rule)
        assert np.array_equal(t.theta, t.theta.conj().T)
        w = np.linalg.eigvalsh(t.theta)
        assert w.min() >= -1e-12 * max(1.0, w.max())
        worst_sub = max(worst_sub, mt.quasi_hermiticity_residual(t, hm400).subspace)

    # brute-force oracle: planted real simple spectra, 4x4, 100 instances
    rng = np.random.default_rng(7)
    worst_planted = 0.0
    for _ in range(100):
        lam = np.cumsum(0.5 + rng.random(4))
        q1, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
        q2, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
        s = q1 @ np.diag(0.5 + 1.5 * rng.random(4)) @ q2
        a = s @ np.diag(lam) @ np.linalg.inv(s)
        right = s / np.linalg.norm(s, axis=0)
        left = np.linalg.inv(s).conj().T
        left /= np.linalg.norm(left, axis=0)
        overlaps = np.einsum("ij,ij->j", left.conj(), right)
        planted = sp.BiorthogonalSystem(
            lam.astype(np.complex128), right, left, overlaps,
            1.0 / np.abs(overlaps), 0.0, None, None, None,
        )
        theta = mt.build_metric(planted, 4, weight_rule="geometric").theta
        res = np.linalg.norm(theta @ a - a.conj().T @ theta, 2)
        res /= np.linalg.norm(theta, 2) * np.linalg.norm(a, 2)
        worst_planted = max(worst_planted, res)

    ok = worst_sub <= 1e-8 and worst_planted <= 1e-12
    assert _line(
        "C09", ok, f"subspace residual {worst_sub:.1e}, planted 100x worst {worst_planted:.1e}"
    )


def test_c10_singular_inverse_witness(hm400, sys12):
    recs = mt.conditioning_sweep(sys12, [4, 8, 12], weight_rule="kappa_scaled", hm=hm400)
    drop = recs[0].ratio / recs[2].ratio

    # orthonormal control isolates the pure weight-decay contribution
    n = 16
    eye = np.eye(n, dtype=np.complex128)
    control = sp.BiorthogonalSystem(
        np.arange(1.0, n + 1.0).astype(np.complex128), eye.copy(), eye.copy(),
        np.ones(n, dtype=np.complex128), np.ones(n), 0.0, None, None, None,
    )
    crecs = mt.conditioning_sweep(control, [4, 8, 12], weight_rule="kappa_scaled")
    baseline = crecs[0].ratio / crecs[2].ratio

    ok = drop >= 10.0 * baseline
    assert _line(
        "C10", ok, f"ratio drop K=4->12 {drop:.1e} vs orthonormal baseline {baseline:.1f}"
    )


def test_c11_jordan_demonstration():
    demo = mt.jordan_demo()
    rank = int(np.linalg.matrix_rank(demo.candidate_theta))
    # weak intertwining: the row functional phi^* maps H to its scalar image
    omega = demo.left_vector.conj()[None, :]
    weak = float(np.linalg.norm(omega @ demo.matrix - demo.eigenvalue * omega))
    ok = (
        demo.intertwining_residual == 0.0
        and demo.theta_determinant == 0.0
        and rank == 1
        and weak <= 1e-14
    )
    assert _line(
        "C11",
        ok,
        f"rank {rank}, residual {demo.intertwining_residual:.1e}, "
        f"det {demo.theta_determinant:.1e}, ||Omega H - h Omega|| {weak:.1e}",
    )


def test_c12_worker_determinism():
    g = ps.GridSpec(-2.0, 6.0, 0.1, 4.0, 16, 8)
    bitwise = []
    for d in (
        dz.Discretization("fd", 200, half_width=8.0),
        dz.Discretization("hermite", 120, hermite_scale=3.0),
    ):
        hm = dz.build_matrix(CUBIC, d)
        f1 = ps.pseudospectrum_grid(hm, g, workers=1)
        f4 = ps.pseudospectrum_grid(hm, g, workers=4)
        bitwise.append(bool(np.array_equal(f1.values, f4.values)))
    ok = all(bitwise)
    assert _line("C12", ok, f"fd bitwise {bitwise[0]}, hermite bitwise {bitwise[1]}")
