"""Command-line front end: ``hexscat <subcommand> ...``.

Exit codes: 0 when every check passes, 1 for computation errors or failed
checks, 2 for usage and input errors.  Diagnostics go to stderr as JSON.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import mpmath

from . import continuation, lattice, model, resolvent, stripping, trigpoly
from .kernels import KernelRequest, kernel_values


class UsageError(Exception):
    pass


def _c(x) -> list:
    """Complex scalar as a ``[re, im]`` pair of floats."""
    x = complex(x)
    return [x.real, x.imag]


def _mp_str(x, digits: int = 20) -> list:
    x = mpmath.mpc(x)
    return [mpmath.nstr(mpmath.re(x), digits), mpmath.nstr(mpmath.im(x), digits)]


def _emit(doc, path=None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _load(path) -> model.PotentialField:
    try:
        return model.load_potential(path)
    except FileNotFoundError:
        raise UsageError(f"no such file: {path}") from None
    except model.PotentialError as exc:
        raise UsageError(str(exc)) from None


def _spectral_point(args):
    z = complex(args.z_re, args.z_im)
    if z.imag == 0 and abs(z.real) <= 3:
        raise UsageError(f"z = {z} lies in the spectrum [-3, 3]")
    return z


def _theta(value: str) -> float:
    th = float(value)
    if not 0 < th < continuation.THETA_MAX:
        raise argparse.ArgumentTypeError(f"theta must lie in (0, {continuation.THETA_MAX:.6f})")
    return th


# ------------------------------------------------------------ commands

def cmd_verify_lattice(args) -> int:
    rep = lattice.verify_distance_lemmas(args.radius)
    rows = list(rep.rows())
    width = max(len(n) for n, *_ in rows)
    print(f"{'check':<{width}}  {'cases':>8}  result")
    for name, count, ok, fails in rows:
        tail = "" if ok else "  e.g. " + ", ".join(repr(w) for w in fails)
        print(f"{name:<{width}}  {count:>8}  {'PASS' if ok else 'FAIL'}{tail}")
    print(f"radius {rep.radius}: {'all checks pass' if rep.ok else 'VIOLATIONS FOUND'}")
    return 0 if rep.ok else 1


def cmd_verify_support(args) -> int:
    rep = trigpoly.verify_support(args.max_s)
    _emit({
        "smax": rep.smax,
        "ok": rep.ok,
        "violations": [repr(v) for v in rep.violations[:20]],
        "extremal_distance": {f"{name} s={s}": d for (name, s), d in sorted(rep.extremal.items())},
    })
    return 0 if rep.ok else 1


def cmd_r0(args) -> int:
    z = _spectral_point(args)
    n = (args.n1, args.n2)
    if args.method == "quad":
        blk = resolvent.r0_quad(z, n, gridK=args.grid)
    else:
        if abs(z) <= 3:
            raise UsageError("series method needs |z| > 3")
        blk = resolvent.r0_series(z, n)
    _emit({"z": _c(z), "n": list(n), "method": args.method,
           "block": [[_c(blk[i][j]) for j in range(2)] for i in range(2)]})
    return 0


def cmd_zeta(args) -> int:
    with mpmath.workdps(args.dps):
        z = mpmath.mpc(1, args.N)
        zt = continuation.zeta(z, args.theta, args.branch)
        pred = continuation.asymptotic_prediction(args.N, args.theta, args.branch)
        dev = continuation.deviations(args.N, args.theta, args.branch)
        _emit({
            "z": [1.0, float(args.N)],
            "theta": args.theta,
            "branch": args.branch,
            "zeta1": _mp_str(zt.zeta1),
            "zeta2": _mp_str(zt.zeta2),
            "zeta_mod_2pi": {
                "re1": float(continuation.wrap(mpmath.re(zt.zeta1))),
                "im1": float(mpmath.im(zt.zeta1)),
                "re2": float(continuation.wrap(mpmath.re(zt.zeta2))),
                "im2": float(mpmath.im(zt.zeta2)),
            },
            "prediction": {k: float(v) for k, v in pred.items()},
            "deviation": {k: float(v) for k, v in dev.items()},
        })
    return 0


def cmd_forward(args) -> int:
    q = _load(args.potential)
    z = _spectral_point(args)
    if not (z.real > 0 and z.imag > 0):
        raise UsageError("forward kernels are continued through the first quadrant: need Re z > 0, Im z > 0")
    with mpmath.workdps(args.dps):
        kv = kernel_values(q, KernelRequest(mpmath.mpc(z), args.theta, args.theta_prime, args.block))
        _emit({"z": _c(z), "theta": args.theta, "theta_prime": args.theta_prime, "block": args.block,
               "B0": _mp_str(kv.b0), "B1": _mp_str(kv.b1), "B": _mp_str(kv.b)})
    return 0


def cmd_reconstruct(args) -> int:
    truth = _load(args.potential)
    M = args.M if args.M is not None else truth.M
    if truth.M > M:
        raise UsageError(f"potential radius {truth.M} exceeds --M {M}")
    truth = model.PotentialField(M, truth.entries)
    params = stripping.ReconstructionParams.geometric(
        M, args.n_base, args.levels, ratio=args.ratio,
        richardson_order=args.order, thetas=stripping.default_thetas(args.thetas),
        tolerance=args.tolerance, dps=args.dps,
    )
    failed = None
    try:
        rec, rep, err = stripping.round_trip(truth, params)
    except stripping.ReconstructionFailed as exc:
        failed = exc
        rec, rep, err = exc.partial, exc.report, float("nan")
    if args.out:
        model.save_potential(rec, args.out)
    doc = {
        "M": M,
        "Ns": params.Ns,
        "richardson_order": params.richardson_order,
        "dps": params.dps,
        "thetas": [list(t) for t in params.thetas],
        "max_abs_error": err,
        "tolerance": params.tolerance,
        "ok": failed is None and err <= params.tolerance,
        **rep.to_json(),
    }
    _emit(doc, args.report)
    if args.report:
        print(f"max abs error {err:.3e} (tolerance {params.tolerance:g})")
    if failed is not None:
        raise failed
    return 0 if doc["ok"] else 1


def cmd_spectrum(args) -> int:
    rows = model.spectrum_grid(args.grid)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["xi1", "xi2", "p", "grad_norm"])
        for x1, x2, p, g in rows:
            w.writerow([repr(x1), repr(x2), repr(p), "nan" if math.isnan(g) else repr(g)])
    finally:
        if args.out:
            out.close()
    return 0


def cmd_gen_potential(args) -> int:
    q = model.random_potential(args.M, args.seed)
    if args.out:
        model.save_potential(q, args.out)
    else:
        _emit(q.to_json())
    return 0


# -------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hexscat", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="log stage progress to stderr")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("verify-lattice", help="exhaustive distance-lemma check")
    p.add_argument("--radius", type=int, default=12, help="box half-width (default: %(default)s)")
    p.set_defaults(func=cmd_verify_lattice)

    p = sub.add_parser("verify-support", help="Fourier-support check of r^s, r^s alpha, r^s alpha_bar")
    p.add_argument("--max-s", "--smax", dest="max_s", type=int, default=8,
                   help="largest power s (default: %(default)s)")
    p.set_defaults(func=cmd_verify_support)

    p = sub.add_parser("r0", help="free resolvent 2x2 block at displacement n")
    p.add_argument("--z-re", type=float, required=True)
    p.add_argument("--z-im", type=float, required=True)
    p.add_argument("--n1", type=int, required=True)
    p.add_argument("--n2", type=int, required=True)
    p.add_argument("--method", choices=["quad", "series"], default="series",
                   help="series needs |z| > 3 (default: %(default)s)")
    p.add_argument("--grid", type=int, default=32,
                   help="initial quadrature grid, doubled until stable (default: %(default)s)")
    p.set_defaults(func=cmd_r0)

    p = sub.add_parser("zeta", help="continued phases at z = 1 + iN with asymptotic prediction")
    p.add_argument("--N", type=float, required=True, help="imaginary part of z (>= 10)")
    p.add_argument("--theta", type=_theta, required=True, help="angle in (0, log(2)/2)")
    p.add_argument("--branch", choices=["pos", "neg"], default="pos", help="(default: %(default)s)")
    p.add_argument("--dps", type=int, default=50, help="working digits (default: %(default)s)")
    p.set_defaults(func=cmd_zeta)

    p = sub.add_parser("forward", help="kernels B0, B1, B for a potential")
    p.add_argument("--potential", required=True, help="potential JSON")
    p.add_argument("--z-re", type=float, required=True)
    p.add_argument("--z-im", type=float, required=True)
    p.add_argument("--theta", type=_theta, required=True, help="outgoing angle")
    p.add_argument("--theta-prime", type=_theta, required=True, help="incoming angle")
    p.add_argument("--block", type=int, choices=[11, 22], default=22, help="(default: %(default)s)")
    p.add_argument("--dps", type=int, default=80, help="working digits (default: %(default)s)")
    p.set_defaults(func=cmd_forward)

    p = sub.add_parser("reconstruct", help="round trip: forward kernels of a potential, then layer stripping")
    p.add_argument("--potential", required=True, help="potential whose kernels serve as data")
    p.add_argument("--M", type=int, default=None, help="a-priori support radius (default: from file)")
    p.add_argument("--n-base", type=float, default=1000.0, help="smallest N node (default: %(default)s)")
    p.add_argument("--levels", type=int, default=3, help="number of N nodes (default: %(default)s)")
    p.add_argument("--ratio", type=float, default=2.0,
                   help="geometric ratio between N nodes (default: %(default)s)")
    p.add_argument("--order", type=int, default=None, help="Richardson order (default: levels - 1)")
    p.add_argument("--thetas", type=int, default=9, help="number of theta samples (default: %(default)s)")
    p.add_argument("--tolerance", type=float, default=1e-2,
                   help="round-trip acceptance on max abs error (default: %(default)s)")
    p.add_argument("--dps", type=int, default=None, help="working digits (default: derived from the nodes)")
    p.add_argument("--out", help="recovered potential JSON")
    p.add_argument("--report", help="report JSON (default: stdout)")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("spectrum", help="CSV of p and |grad p| on a uniform grid")
    p.add_argument("--grid", type=int, default=64, help="points per axis, >= 16 (default: %(default)s)")
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("gen-potential", help="seeded random integer potential on the l1 ball")
    p.add_argument("--M", type=int, required=True, help="support radius")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", help="JSON path (default: stdout)")
    p.set_defaults(func=cmd_gen_potential)
    return ap


def _fail(kind: str, exc: BaseException, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "type": type(exc).__name__, "message": str(exc)}) + "\n")
    return code


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except BrokenPipeError:
        sys.stderr.close()
        return 0
    except (UsageError, ValueError) as exc:
        return _fail("usage", exc, 2)
    except (ArithmeticError, RuntimeError) as exc:
        return _fail("computation", exc, 1)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
