"""Command-line front end: ``isocov <subcommand> ...``.

Exit codes: 0 when a verdict was computed (even "invalid"), 1 for an
invalid verdict under --strict, 2 for usage or input errors.
"""

import argparse
import csv
import json
import os
import sys

import numpy as np

from .coefficients import compute_H, identity_checks
from .euclid import euclid_spectral_check
from .kernels import KernelSpecError, load_kernel
from .simulate import empirical_cov_check, simulate_field
from .spaces import UnsupportedOperation, parse_space, sample_uniform
from .special import contiguous_pointwise_residuals
from .streams import RandomStream
from .validity import MINF_DEGREE_CAP, INVALID, transfer_implications, validate_minf, validate_on_space

# every numeric default lives here
DEFAULTS = {
    "n_max": 40,
    "tol": 1e-9,
    "quad_order": None,
    "reps": 10_000,
    "seed": 0,
    "n_points": 20,
    "workers": 1,
    "multiplier": 4.0,
    "minf_degree": MINF_DEGREE_CAP,
    "identity_n_max": 20,
    "grid_points": 2048,
}

POINTS_PATH = 1
REPLICATE_PATH = 0


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def _entry_names(m, prefix="c"):
    return [f"{prefix}{i + 1}{j + 1}" for i in range(m) for j in range(m)]


def _outdir(args):
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _space(text):
    try:
        return parse_space(text)
    except ValueError as exc:
        raise InputError(str(exc)) from None


# ---------------------------------------------------------------- subcommands


def cmd_validate(args):
    kernel = load_kernel(args.kernel)
    space = _space(args.space)
    rep = validate_on_space(kernel, space, args.n_max, args.tol, args.quad_order)
    out = _outdir(args)
    _write_json(os.path.join(out, "report.json"), rep.to_dict())
    trace_b = rep.details.get("trace_B", [None] * len(rep.trace))
    _write_csv(os.path.join(out, "eigentrace.csv"), ["n", "min_eig_H", "min_eig_B"],
               [(n, h, b) for n, (h, b) in enumerate(zip(rep.trace, trace_b))])
    print(f"{space}: {rep.verdict} ({rep.label})" if rep.label else f"{space}: {rep.verdict}")
    return rep.verdict == INVALID


def cmd_validate_minf(args):
    kernel = load_kernel(args.kernel)
    rep = validate_minf(kernel, args.degree, args.tol, args.method)
    out = _outdir(args)
    _write_json(os.path.join(out, "minf_report.json"), rep.to_dict())
    coeffs = np.asarray(rep.details["coefficients"])
    _write_csv(os.path.join(out, "minf_coefficients.csv"), ["degree"] + _entry_names(kernel.m),
               [[k] + list(c.ravel()) for k, c in enumerate(coeffs)])
    print(f"M_infinity: {rep.verdict} ({rep.label})")
    return rep.verdict == INVALID


def cmd_coeffs(args):
    kernel = load_kernel(args.kernel)
    space = _space(args.space)
    seq = compute_H(kernel, space.alpha, space.beta, args.n_max, args.quad_order)
    out = _outdir(args)
    d = seq.to_dict()
    d["space"] = str(space)
    _write_json(os.path.join(out, "coefficients.json"), d)
    print(f"{space}: wrote H_n, B_n for n <= {args.n_max}")
    return False


def cmd_transfer(args):
    kernel = load_kernel(args.kernel)
    recs = transfer_implications(kernel, args.n_max, args.tol)
    out = _outdir(args)
    _write_json(os.path.join(out, "transfer.json"), {"n_max": args.n_max, "tol": args.tol,
                                                      "implications": [r.__dict__ for r in recs]})
    broken = [r for r in recs if not r.holds]
    print(f"transfer: {len(recs) - len(broken)}/{len(recs)} implications hold")
    return False


def cmd_euclid_check(args):
    kernel = load_kernel(args.kernel)
    res = euclid_spectral_check(kernel, args.d, args.omega_max, args.grid_points, args.tol)
    out = _outdir(args)
    _write_json(os.path.join(out, "spectral.json"), res.to_dict())
    vals = np.asarray(res.transform_values)
    _write_csv(os.path.join(out, "spectral.csv"), ["omega"] + [f"probe{k}" for k in range(vals.shape[1])],
               [[w] + list(v) for w, v in zip(res.omega_grid, vals)])
    print(f"R^{res.d}: {'pass' if res.passed else 'fail'} (min transform {res.min_value:.3e})")
    return not res.passed


def cmd_simulate(args):
    kernel = load_kernel(args.kernel)
    space = _space(args.space)
    if not space.sampleable:
        raise UnsupportedOperation(f"cannot simulate on {space}: no point model")
    seq = compute_H(kernel, space.alpha, space.beta, args.n_max, args.quad_order)
    root = RandomStream(args.seed)
    points = sample_uniform(space, root.split(POINTS_PATH), args.n_points)
    ens = simulate_field(space, seq.B, points, args.reps, root.split(REPLICATE_PATH),
                         n_max=args.truncate, workers=args.workers)
    ens.metadata["kernel_spec"] = os.path.basename(args.kernel)
    out = _outdir(args)
    ens.write_csv(os.path.join(out, "ensemble.csv"))
    check = None
    if args.reps >= 100:
        check = empirical_cov_check(ens, kernel, args.multiplier)
        check.write_csv(os.path.join(out, "comparison.csv"))
        ens.metadata["covariance_check"] = check.to_dict()
    _write_csv(os.path.join(out, "points.csv"), ["point"] + [f"x{k}" for k in range(points[0].size)],
               [[i] + list(p.ravel()) for i, p in enumerate(points)])
    ens.write_metadata(os.path.join(out, "metadata.json"))
    if check is None:
        print(f"{space}: simulated {args.reps} replicates (too few for a covariance check)")
        return False
    print(f"{space}: {check.n_flagged}/{check.n_entries} entries flagged "
          f"({'pass' if check.passed else 'fail'})")
    return False


def cmd_verify_identities(args):
    kernel = load_kernel(args.kernel)
    space = _space(args.space)
    a, b = space.alpha, space.beta
    res = identity_checks(kernel, a, b, args.n_max, tol=args.tol)
    point = contiguous_pointwise_residuals(a, b, args.n_max)
    rows = [("coefficient", r.identity, r.residual, r.scale, int(r.ok)) for r in res]
    rows += [("pointwise", name, float(v), 1.0, int(v <= 1e-10)) for name, v in point.items()]
    out = _outdir(args)
    _write_csv(os.path.join(out, "identities.csv"), ["kind", "identity", "residual", "scale", "ok"], rows)
    bad = [r for r in rows if not r[-1]]
    print(f"{space}: {len(rows) - len(bad)}/{len(rows)} identity checks within tolerance")
    return False


# ---------------------------------------------------------------- parser


def build_parser():
    p = _Parser(prog="isocov", description="Isotropic covariance matrix functions on compact two-point "
                                           "homogeneous spaces.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, space=True, n_max=DEFAULTS["n_max"]):
        sp.add_argument("--kernel", required=True, help="kernel spec JSON")
        if space:
            sp.add_argument("--space", required=True, help="S:d, PR:d, PC:d, PH:d or CAY:16")
        sp.add_argument("--n-max", type=int, default=n_max)
        sp.add_argument("--tol", type=float, default=DEFAULTS["tol"])
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--strict", action="store_true", help="exit 1 on an invalid verdict")

    sp = sub.add_parser("validate", help="validity on one space")
    common(sp)
    sp.add_argument("--quad-order", type=int, default=DEFAULTS["quad_order"])
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("validate-minf", help="validity on all spaces at once")
    common(sp, space=False)
    sp.add_argument("--degree", type=int, default=DEFAULTS["minf_degree"])
    sp.add_argument("--method", choices=("auto", "contour", "chebyshev"), default="auto")
    sp.set_defaults(func=cmd_validate_minf)

    sp = sub.add_parser("coeffs", help="H_n and B_n matrices")
    common(sp)
    sp.add_argument("--quad-order", type=int, default=DEFAULTS["quad_order"])
    sp.set_defaults(func=cmd_coeffs)

    sp = sub.add_parser("transfer", help="validity implications between spaces")
    common(sp, space=False)
    sp.set_defaults(func=cmd_transfer)

    sp = sub.add_parser("euclid-check", help="Bessel-transform positivity in R^d, d odd")
    common(sp, space=False)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--omega-max", type=float, default=None, help="default 40 d")
    sp.add_argument("--grid-points", type=int, default=DEFAULTS["grid_points"])
    sp.set_defaults(func=cmd_euclid_check)

    sp = sub.add_parser("simulate", help="simulate a Gaussian field and check its covariance")
    common(sp)
    sp.add_argument("--quad-order", type=int, default=DEFAULTS["quad_order"])
    sp.add_argument("--reps", type=int, default=DEFAULTS["reps"])
    sp.add_argument("--seed", type=int, default=DEFAULTS["seed"])
    sp.add_argument("--n-points", type=int, default=DEFAULTS["n_points"])
    sp.add_argument("--truncate", type=int, default=None, help="series length (default: automatic)")
    sp.add_argument("--workers", type=int, default=DEFAULTS["workers"])
    sp.add_argument("--multiplier", type=float, default=DEFAULTS["multiplier"])
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("verify-identities", help="coefficient and pointwise identity residuals")
    common(sp, n_max=DEFAULTS["identity_n_max"])
    sp.set_defaults(func=cmd_verify_identities)
    return p


def run(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "reps", 1) < 1 or getattr(args, "n_points", 1) < 1:
            raise InputError("--reps and --n-points must be positive")
        invalid = args.func(args)
    except (InputError, KernelSpecError, UnsupportedOperation, OSError, ValueError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"isocov: error: {msg}", file=sys.stderr)
        return 2
    return 1 if (invalid and args.strict) else 0


def main():
    sys.exit(run())
