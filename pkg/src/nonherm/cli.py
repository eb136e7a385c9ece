"""Command-line front end: builds, scans, exports.

Single entry point with subcommands; every artifact starts with a
schema-versioned comment header embedding the resolved configuration, so
a run is reproducible from its own output.  A ``key = value`` config file
can seed any flags; explicit flags override it.  All outputs are
deterministic, including under ``--workers`` changes.
"""

import argparse
import datetime
import sys

import numpy as np

from . import _csvio, discretize, metric, pseudomode, pseudospec, spectra
from .errors import InputError, NonHermError

#: spectral window used to auto-size a finite-difference box when the
#: user gives no half-width
DEFAULT_SPECTRAL_WINDOW = 20.0

#: fixed interior point for the pseudomode scan (turning point at x = 1)
PSEUDOMODE_Z = 1.0 + 1.0j

#: fixed ray direction for the rbound scan, mid-sector
RBOUND_DIRECTION = complex(np.exp(0.25j * np.pi))


def _float_list(text):
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise InputError(f"bad numeric list {text!r}: {exc}") from None


def _int_list(text):
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise InputError(f"bad integer list {text!r}: {exc}") from None


def _grid_spec(text):
    parts = text.split(",")
    if len(parts) != 6:
        raise InputError(
            f"--grid wants re0,re1,im0,im1,nx,ny; got {text!r}")
    try:
        lo_re, hi_re, lo_im, hi_im = (float(t) for t in parts[:4])
        nx, ny = int(parts[4]), int(parts[5])
    except ValueError as exc:
        raise InputError(f"bad --grid value {text!r}: {exc}") from None
    return pseudospec.GridSpec(lo_re, hi_re, lo_im, hi_im, nx, ny)


def _config_tokens(path):
    """Flag tokens from a ``key = value`` file, '=' joined so values may
    start with a dash."""
    tokens = []
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise InputError(f"cannot read config file {path!r}: {exc}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(
                f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = line.split("=", 1)
        flag = "--" + key.strip().replace("_", "-")
        tokens.append(f"{flag}={value.strip()}")
    return tokens


def _inject_config(argv):
    """Insert config-file tokens after the subcommand; argv flags win."""
    path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
            break
        if tok.startswith("--config="):
            path = tok.split("=", 1)[1]
            break
    if path is None:
        return argv
    return argv[:1] + _config_tokens(path) + argv[1:]


def _workers(args):
    if args.workers is not None:
        return max(1, int(args.workers))
    import os

    return max(1, int(os.environ.get("NONHERM_WORKERS", "1")))


def _discretization(args, p):
    """Resolve scheme parameters, filling defaults from the potential."""
    if args.scheme == "fd":
        half = args.half_width
        if half is None:
            half = discretize.default_half_width(p, DEFAULT_SPECTRAL_WINDOW)
        return discretize.Discretization(
            "fd", args.n, half_width=half, h=args.h)
    alpha = args.hermite_scale
    if alpha is None:
        alpha = discretize.default_hermite_scale(p)
    return discretize.Discretization(
        "hermite", args.n, hermite_scale=alpha, h=args.h)


def _resolved(args, d, **extra):
    """Resolved-config dict embedded in artifact headers."""
    cfg = {
        "potential": args.potential,
        "scheme": d.scheme,
        "n": d.n,
        "h": d.h,
        "seed": args.seed,
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(
            timespec="seconds"),
    }
    if d.half_width is not None:
        cfg["half_width"] = d.half_width
    if d.hermite_scale is not None:
        cfg["hermite_scale"] = d.hermite_scale
    cfg.update(extra)
    return cfg


def _cmd_eigs(args):
    p = discretize.parse_potential(args.potential)
    d = _discretization(args, p)
    system = spectra.converged_system(p, d, args.k)
    spectra.write_eigs_csv(args.out, system, _resolved(args, d, k=args.k))
    return 0


def _cmd_riesz(args):
    p = discretize.parse_potential(args.potential)
    d = _discretization(args, p)
    ks = _int_list(args.k_list)
    if not ks or min(ks) < 2:
        raise InputError("--k-list needs entries >= 2 for frame bounds")
    system = spectra.select_converged(
        spectra.converged_system(p, d, max(ks) + 4,
                                 rel_tol=spectra.VECTOR_GATE_RTOL), max(ks))
    cfg = _resolved(args, d, k_list=",".join(str(k) for k in ks))
    with _csvio.open_out(args.out) as fh:
        _csvio.write_lines(fh, _csvio.header_lines("riesz", cfg))
        fh.write("k,frame_lower,frame_upper,frame_ratio,kappa_max\n")
        for k in ks:
            fb = spectra.frame_bounds(
                system.right_vectors[:, :k], seed=args.seed)
            kap = float(system.condition_numbers[k - 1])
            fh.write(f"{k},{fb.lower!r},{fb.upper!r},"
                     f"{(fb.upper / fb.lower)!r},{kap!r}\n")
    return 0


def _cmd_pseudospectrum(args):
    p = discretize.parse_potential(args.potential)
    d = _discretization(args, p)
    g = _grid_spec(args.grid)
    workers = _workers(args)
    hm = discretize.build_matrix(p, d)
    field = pseudospec.pseudospectrum_grid(hm, g, workers)
    cfg = _resolved(args, d, grid=args.grid, workers=workers)
    pseudospec.write_grid_csv(args.out, field, cfg)
    if args.levels:
        pseudospec.write_contours_json(
            args.contours_out, field, _float_list(args.levels), cfg)
    return 0


def _cmd_rbound(args):
    p = discretize.parse_potential(args.potential)
    d = _discretization(args, p)
    sigmas = _float_list(args.sigmas)
    hm = discretize.build_matrix(p, d)
    samples = pseudospec.rbound_scan(hm, RBOUND_DIRECTION, sigmas)
    verdict = pseudospec.rbound_violation(samples)
    cfg = _resolved(
        args, d,
        sigmas=args.sigmas,
        z=f"{RBOUND_DIRECTION.real!r}+{RBOUND_DIRECTION.imag!r}j",
        result_slope=verdict.slope,
        result_violated=int(verdict.violated),
    )
    pseudospec.write_rbound_csv(args.out, samples, cfg)
    return 0


def _cmd_pseudomode(args):
    p = discretize.parse_potential(args.potential)
    d = _discretization(args, p)
    hs = _float_list(args.hs)
    scan = pseudomode.lbound_exponent_scan(PSEUDOMODE_Z, hs, d, p=p)
    cfg = _resolved(
        args, d,
        hs=args.hs,
        z=f"{PSEUDOMODE_Z.real!r}+{PSEUDOMODE_Z.imag!r}j",
        result_fitted_slope=scan.fitted_slope,
        result_exceeds_threshold=int(scan.exceeds_rbound_threshold),
    )
    pseudomode.write_scan_csv(args.out, scan, cfg)
    if args.mode_out:
        from dataclasses import replace

        h_min = float(min(hs))
        mode = pseudomode.build_wkb_pseudomode(
            p, PSEUDOMODE_Z, h_min, replace(d, h=h_min))
        pseudomode.write_mode_csv(args.mode_out, mode, dict(cfg, mode_h=h_min))
    return 0


def _cmd_metric(args):
    p = discretize.parse_potential(args.potential)
    d = _discretization(args, p)
    ks = _int_list(args.k_list)
    if not ks or min(ks) < 1:
        raise InputError("--k-list needs entries >= 1")
    rule = {"geometric": "geometric", "kappa": "kappa_scaled"}[args.weights]
    system = spectra.select_converged(
        spectra.converged_system(p, d, max(ks) + 4,
                                 rel_tol=spectra.VECTOR_GATE_RTOL), max(ks))
    hm = discretize.build_matrix(p, d)
    records = metric.conditioning_sweep(system, ks, rule, hm=hm)
    cfg = _resolved(args, d, k_list=",".join(str(k) for k in ks),
                    weight_rule=rule)
    metric.write_metric_csv(args.out, records, rule, cfg)
    return 0


def _cmd_jordan(args):
    demo = metric.jordan_demo()
    cfg = {
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(
            timespec="seconds"),
    }
    with _csvio.open_out(args.out) as fh:
        _csvio.write_lines(fh, _csvio.header_lines("jordan", cfg))
        fh.write(demo.text() + "\n")
    return 0


def _validate_checks():
    """(name, ok, detail) triples for the fast self-check tier."""
    checks = []

    x_sq = discretize.parse_potential("x^2")
    d_h = discretize.Discretization("hermite", 64, hermite_scale=1.0)
    hm_h = discretize.build_matrix(x_sq, d_h)
    lam = spectra.eigenvalues_of(hm_h)[:6].real
    exact = np.arange(1.0, 12.0, 2.0)
    err = float(np.max(np.abs(lam - exact) / exact))
    checks.append(("harmonic_hermite", err <= 1e-8, f"max rel err {err:.2e}"))

    d_f = discretize.Discretization("fd", 300, half_width=8.0)
    lam = spectra.eigenvalues_of(discretize.build_matrix(x_sq, d_f))[:3].real
    err = float(np.max(np.abs(lam - exact[:3]) / exact[:3]))
    checks.append(("harmonic_fd", err <= 1e-3, f"max rel err {err:.2e}"))

    cubic = discretize.parse_potential("i*x^3")
    hm = discretize.build_matrix(cubic, discretize.Discretization(
        "fd", 200, half_width=6.0))
    sym = discretize.symmetry_residuals(hm)
    worst = max(sym.pt_commutator, sym.p_selfadjoint, sym.t_selfadjoint)
    is_sym = bool(np.array_equal(hm.matrix, hm.matrix.T))
    checks.append(("symmetry_residuals", worst <= 1e-12 and is_sym,
                   f"max residual {worst:.2e}, complex symmetric {is_sym}"))

    d48 = discretize.Discretization("hermite", 48, hermite_scale=1.0)
    hm48 = discretize.build_matrix(x_sq, d48)
    lam_all = spectra.eigenvalues_of(hm48)
    worst = 0.0
    for z in (2.0 + 0.5j, 0.0 + 1.0j, 6.3 - 0.2j):
        rn = pseudospec.resolvent_norm(hm48, z)
        dist = float(np.min(np.abs(lam_all - z)))
        worst = max(worst, abs(rn - 1.0 / dist) * dist)
    checks.append(("normal_resolvent_equality", worst <= 1e-8,
                   f"max rel dev {worst:.2e}"))

    demo = metric.jordan_demo()
    ok = (demo.intertwining_residual == 0.0
          and demo.theta_determinant == 0.0
          and demo.resolvent_ratio > 5.0)
    checks.append(("jordan_demo", ok,
                   f"intertwining {demo.intertwining_residual:.1e}, "
                   f"ratio {demo.resolvent_ratio:.2f}"))

    tp = pseudomode.turning_point(PSEUDOMODE_Z)
    z_back = tp.eta**2 + 1j * tp.a**3
    ok = (abs(z_back - PSEUDOMODE_Z) <= 1e-14
          and abs(tp.im_v_prime - 3.0 * tp.a**2) <= 1e-14)
    checks.append(("turning_point_roundtrip", ok, f"a = {tp.a!r}"))

    from . import _kernels

    rng_a = np.array([[2.0, 1j, 0.0], [0.0, 1.5, 0.5], [0.0, 0.0, 1.0 + 1j]],
                     dtype=np.complex128)
    s_kernel = _kernels.smin_triangular(np.asfortranarray(rng_a))
    s_svd = float(np.linalg.svd(rng_a, compute_uv=False)[-1])
    dev = abs(s_kernel - s_svd) / s_svd
    checks.append((f"kernel_backend_{_kernels.BACKEND}", dev <= 1e-10,
                   f"smin rel dev {dev:.2e}"))
    return checks


def _cmd_validate(args):
    checks = _validate_checks()
    cfg = {
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(
            timespec="seconds"),
    }
    failures = 0
    with _csvio.open_out(args.out) as fh:
        _csvio.write_lines(fh, _csvio.header_lines("validate", cfg))
        for name, ok, detail in checks:
            failures += 0 if ok else 1
            fh.write(f"{'PASS' if ok else 'FAIL'} {name}: {detail}\n")
        fh.write(f"{len(checks) - failures}/{len(checks)} checks passed\n")
    return 0 if failures == 0 else 1


def _shared_parser():
    # one instance per subparser: argparse parents share action objects, so
    # a per-subcommand set_defaults would otherwise leak into every command
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", metavar="FILE",
                        help="key = value defaults; explicit flags override")
    shared.add_argument("--potential", default="i*x^3",
                        help="potential text, e.g. 'i*x^3' or 'x^2+0.5i*x^3'")
    shared.add_argument("--scheme", choices=("fd", "hermite"),
                        default="hermite")
    shared.add_argument("--n", type=int, default=300,
                        help="matrix size of the finite section")
    shared.add_argument("--half-width", type=float, default=None,
                        help="fd box half-width L (default: auto-sized)")
    shared.add_argument("--hermite-scale", type=float, default=None,
                        help="basis scale alpha (default: drift-minimizing)")
    shared.add_argument("--h", type=float, default=1.0,
                        help="semiclassical parameter")
    shared.add_argument("--workers", type=int, default=None,
                        help="worker threads (default: $NONHERM_WORKERS or 1)")
    shared.add_argument("--out", default="-", metavar="PATH",
                        help="output path, '-' for stdout")
    shared.add_argument("--seed", type=int, default=0,
                        help="seed for sampled cross-checks")
    return shared


def _build_parser():
    top = argparse.ArgumentParser(
        prog="nonherm",
        description="Spectra, pseudospectra, pseudomodes, and metric "
                    "operators for non-self-adjoint Schrodinger sections.")
    sub = top.add_subparsers(dest="command", required=True, metavar="command")

    q = sub.add_parser("eigs", parents=[_shared_parser()],
                       help="converged eigenpairs with condition numbers")
    q.add_argument("-k", "--k", type=int, default=10,
                   help="number of eigenpairs")
    q.set_defaults(func=_cmd_eigs)

    q = sub.add_parser("riesz", parents=[_shared_parser()],
                       help="frame bounds and kappa growth over K")
    q.add_argument("--k-list", default="4,8,12",
                   help="comma list of family sizes K")
    q.set_defaults(func=_cmd_riesz)

    q = sub.add_parser("pseudospectrum", parents=[_shared_parser()],
                       help="resolvent-norm grid, optional contours")
    q.add_argument("--grid", default="0,30,0,15,60,30",
                   metavar="re0,re1,im0,im1,nx,ny")
    q.add_argument("--levels", default=None,
                   help="comma list of 1/eps levels for contour export")
    q.add_argument("--contours-out", default="-", metavar="PATH",
                   help="JSON polyline output path")
    q.set_defaults(func=_cmd_pseudospectrum)

    q = sub.add_parser("rbound", parents=[_shared_parser()],
                       help="kappa(sigma) growth along the mid-sector ray")
    q.add_argument("--sigmas", default="10,20,40,80",
                   help="comma list, strictly increasing")
    q.set_defaults(func=_cmd_rbound, scheme="fd", n=2000, half_width=16.0)

    q = sub.add_parser("pseudomode", parents=[_shared_parser()],
                       help="WKB pseudomode residual scan over h")
    q.add_argument("--hs", default="0.1,0.05,0.025,0.0125",
                   help="comma list, strictly decreasing")
    q.add_argument("--mode-out", default=None, metavar="PATH",
                   help="dump the smallest-h mode as x,Re,Im CSV")
    q.set_defaults(func=_cmd_pseudomode, scheme="hermite", n=600,
                   hermite_scale=8.0)

    q = sub.add_parser("metric", parents=[_shared_parser()],
                       help="truncated-metric conditioning sweep")
    q.add_argument("--k-list", default="4,8,12",
                   help="comma list of truncation orders")
    q.add_argument("--weights", choices=("geometric", "kappa"),
                   default="kappa")
    q.set_defaults(func=_cmd_metric)

    q = sub.add_parser("jordan-demo", parents=[_shared_parser()],
                       help="2x2 defective-metric demonstration")
    q.set_defaults(func=_cmd_jordan)

    q = sub.add_parser("validate", parents=[_shared_parser()],
                       help="fast self-check suite, exit 0 iff all pass")
    q.set_defaults(func=_cmd_validate)
    return top


def main(argv=None):
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = _build_parser()
    try:
        argv = _inject_config(argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except NonHermError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
