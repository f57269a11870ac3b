"""Command-line interface: ``selfaffine <subcommand> ...``.

Tabular output is CSV with 17 significant digits; structured reports are
JSON.  With ``--out`` a run manifest is written next to the output file as
``<out>.manifest.json`` (or to ``--manifest``), so the numeric output itself
stays byte-identical between reruns.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__, kernels
from .decay import decay_scan, orbit_trace
from .erdos_kahane import (BadSetQuery, compute_trace, enumerate_cover, eta_grid,
                           predictor_consistency_scan)
from .fourier import mu_hat_batch, verify_factorization, verify_renormalization
from .ifs import ParameterBox, load_ifs
from .pisot import IntegerPolynomial, is_pisot_family, is_pisot_number
from .sampler import SampleConfig, sample_points


@dataclass
class RunManifest:
    subcommand: str
    parameters: dict
    seed: int | None
    version: str
    duration_s: float


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def _csv(buf, rows):
    for row in rows:
        buf.write(",".join(fmt(v) if not isinstance(v, str) else v for v in row) + "\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.replace(" ", "").split(",") if tok]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}")


def _ifs(args):
    try:
        return load_ifs(args.ifs)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        args._parser.error(f"cannot load --ifs {args.ifs}: {exc}")


def _frequencies(args, ifs):
    flat = [v for chunk in args.xi for v in chunk]
    if not flat or len(flat) % ifs.dim:
        args._parser.error(f"--xi needs a multiple of {ifs.dim} values")
    return np.array(flat, dtype=float).reshape(-1, ifs.dim)


# -- subcommands -------------------------------------------------------------

def cmd_transform(args, out):
    ifs = _ifs(args)
    xis = _frequencies(args, ifs)
    values, terms, bounds = mu_hat_batch(ifs, xis, args.tol, args.max_terms)
    head = [f"xi_{k + 1}" for k in range(ifs.dim)] if ifs.dim > 1 else ["xi"]
    out.write(",".join(head + ["re", "im", "modulus", "terms", "bound"]) + "\n")
    _csv(out, ([*x, v.real, v.imag, abs(v), int(t), b] for x, v, t, b in zip(xis, values, terms, bounds)))


def cmd_decay_scan(args, out):
    ifs = _ifs(args)
    prof = decay_scan(ifs, args.rmin, args.rmax, args.samples, args.seed, workers=args.threads or 1)
    out.write("R,shell_sup,samples\n")
    _csv(out, prof.rows())
    out.write(f"# alpha_fit={fmt(prof.alpha_fit)} residual={fmt(prof.fit_residual)}\n")


def cmd_orbit_trace(args, out):
    ifs = _ifs(args)
    direction = args.direction if args.direction is not None else [1.0] * ifs.dim
    ns, mods = orbit_trace(ifs, direction, args.base, args.n, args.n_min)
    out.write("n,modulus\n")
    _csv(out, zip(ns, mods))


def cmd_sample(args, out):
    ifs = _ifs(args)
    cfg = SampleConfig(args.n, args.depth, args.seed)
    pts = sample_points(ifs, cfg, workers=args.threads or 1)
    out.write(",".join(f"x_{k + 1}" for k in range(ifs.dim)) + "\n")
    _csv(out, pts)


def cmd_pisot_check(args, out):
    try:
        poly = IntegerPolynomial.parse(args.poly)
    except ValueError as exc:
        args._parser.error(f"--poly: {exc}")
    if args.thetas:
        report = is_pisot_family(poly, args.thetas, args.tol)
    else:
        report = is_pisot_number(poly, args.tol)
    doc = {
        "polynomial": str(poly),
        "decision": report.decision.value,
        "failed_clause": report.failed_clause,
        "irreducibility": report.irreducibility,
        "roots": [[float(z.real), float(z.imag)] for z in report.roots],
        "notes": list(report.notes),
    }
    out.write(json.dumps(doc, indent=2) + "\n")


def cmd_ek_trace(args, out):
    tr = compute_trace(args.theta, args.eta, args.n)
    out.write("n,K,eps\n")
    _csv(out, zip(range(tr.length + 1), tr.K, tr.eps))


def default_rho(box: ParameterBox, prefix, N: int, grid: int = 20) -> float:
    """Smallest calibrated ``rho*`` over a coarse grid of ``theta_d`` in the box."""
    rho = 0.5
    for t in np.linspace(box.b1, box.b2, 5):
        if any(abs(t - p) < box.c1 for p in prefix):
            continue
        rep = predictor_consistency_scan(list(prefix) + [t], eta_grid(box.d, box.b2, grid), N)
        rho = min(rho, rep.rho_star)
    return rho


def cmd_ek_cover(args, out):
    prefix = tuple(args.theta_prefix or ())
    box = ParameterBox(args.b1, args.b2, args.c1, len(prefix) + 1)
    rho = args.rho if args.rho is not None else default_rho(box, prefix, args.n)
    q = BadSetQuery(box, prefix, args.n, args.delta, rho)
    rep = enumerate_cover(q, budget=args.budget)
    doc = rep.to_dict()
    doc["rho_source"] = "user" if args.rho is not None else "predictor_consistency_scan"
    out.write(json.dumps(doc, indent=2) + "\n")


def cmd_verify(args, out):
    ifs = _ifs(args)
    xis = _frequencies(args, ifs)
    out.write("check,n,xi,residual,ok\n")
    failed = 0
    for xi in xis:
        label = ";".join(fmt(v) for v in xi)
        checks = [("factorization", n, verify_factorization(ifs, n, xi, args.tol)) for n in args.powers]
        if np.max(np.abs(xi)) >= 1:
            checks.append(("renormalization", "", verify_renormalization(ifs, xi, args.tol)))
        for name, n, chk in checks:
            failed += not chk.ok
            out.write(f"{name},{n},{label},{fmt(chk.residual)},{int(chk.ok)}\n")
    if failed:
        raise ArithmeticError(f"{failed} identity check(s) exceeded tolerance {args.tol:g}")


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write output to this file instead of stdout")
    common.add_argument("--manifest", help="manifest path (default <out>.manifest.json)")
    common.add_argument("--threads", type=int, default=None, help="cap on worker threads")

    p = argparse.ArgumentParser(prog="selfaffine", description="Fourier analysis of diagonal self-affine measures")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=fn, _parser=sp)
        return sp

    sp = add("transform", cmd_transform, "evaluate the Fourier transform")
    sp.add_argument("--ifs", required=True)
    sp.add_argument("--xi", type=_floats, action="append", required=True,
                    help="comma list of frequency coordinates; repeatable")
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--max-terms", type=int, default=10_000)

    sp = add("decay-scan", cmd_decay_scan, "shell suprema and fitted decay exponent")
    sp.add_argument("--ifs", required=True)
    sp.add_argument("--rmin", type=float, default=2.0)
    sp.add_argument("--rmax", type=float, default=256.0)
    sp.add_argument("--samples", type=int, default=4096)
    sp.add_argument("--seed", type=int, default=0)

    sp = add("orbit-trace", cmd_orbit_trace, "modulus along a geometric orbit")
    sp.add_argument("--ifs", required=True)
    sp.add_argument("--base", type=float, required=True)
    sp.add_argument("--n", type=int, default=25)
    sp.add_argument("--n-min", type=int, default=0)
    sp.add_argument("--direction", type=_floats, default=None)

    sp = add("sample", cmd_sample, "draw points from the measure")
    sp.add_argument("--ifs", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--depth", type=int, default=None)

    sp = add("pisot-check", cmd_pisot_check, "Pisot number or Pisot family test")
    sp.add_argument("--poly", required=True, help='coefficients from the leading one down, e.g. "1,-1,-1"')
    sp.add_argument("--thetas", type=_floats, default=None, help="check a Pisot family instead")
    sp.add_argument("--tol", type=float, default=1e-9)

    sp = add("ek-trace", cmd_ek_trace, "nearest-integer trace of sum eta_k theta_k^n")
    sp.add_argument("--theta", type=_floats, required=True)
    sp.add_argument("--eta", type=_floats, required=True)
    sp.add_argument("--n", type=int, default=25)

    sp = add("ek-cover", cmd_ek_cover, "cover the bad parameter set by intervals")
    sp.add_argument("--b1", type=float, required=True)
    sp.add_argument("--b2", type=float, required=True)
    sp.add_argument("--c1", type=float, default=0.3)
    sp.add_argument("--n", type=int, default=12)
    sp.add_argument("--delta", type=float, default=0.125)
    sp.add_argument("--rho", type=float, default=None)
    sp.add_argument("--theta-prefix", type=_floats, default=None)
    sp.add_argument("--budget", type=int, default=5_000_000)

    sp = add("verify", cmd_verify, "factorization and renormalization identity checks")
    sp.add_argument("--ifs", required=True)
    sp.add_argument("--xi", type=_floats, action="append", required=True)
    sp.add_argument("--powers", type=lambda s: [int(v) for v in _floats(s)], default=[2, 3])
    sp.add_argument("--tol", type=float, default=1e-8)
    return p


def _params(args) -> dict:
    skip = {"func", "_parser", "out", "manifest", "threads"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads is not None:
        if args.threads < 1:
            args._parser.error("--threads must be positive")
        kernels.set_threads(args.threads)
    buf = io.StringIO()
    start = time.perf_counter()
    try:
        args.func(args, buf)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (ValueError, ArithmeticError, RuntimeError, OverflowError) as exc:
        sys.stdout.write(buf.getvalue())
        print(f"error: {exc}", file=sys.stderr)
        return 1
    duration = time.perf_counter() - start
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    manifest_path = args.manifest or (args.out + ".manifest.json" if args.out else None)
    if manifest_path:
        man = RunManifest(args.command, _params(args), getattr(args, "seed", None), __version__, duration)
        with open(manifest_path, "w") as fh:
            json.dump(asdict(man), fh, indent=2, default=str)
            fh.write("\n")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
