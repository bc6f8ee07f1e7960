"""Command-line front end: sweeps, dynamics, correlation lengths, witness, verify."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from . import qfi
from .errors import (
    ConvergenceFailureError,
    InvalidArgumentError,
    NumericalFailureError,
    QfiQuenchError,
    TailNotConvergedError,
)
from .ising_fermion import QuenchProtocol

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_VERIFY = 0, 1, 2, 3
CSV_HEADER = ["g0", "gf", "L", "t", "alpha", "f_q", "f_opt", "direction", "depth",
              "converged", "residual"]


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ parsing


def _field(text):
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"field must be >= 0 (got {text})")
    return value


def _length(text):
    if text == "auto":
        return "auto"
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"L must be an integer or 'auto' (got {text})")
    if value < 2 or value % 2:
        raise argparse.ArgumentTypeError(f"L must be an even integer >= 2 (got {text})")
    return value


def _positive(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number (got {text})")
    return value


def _alphas(choice):
    return ("x", "y", "z") if choice == "all" else (choice,)


def _gf_grid(args):
    if args.gf is not None:
        return [args.gf]
    if args.gf_min is None or args.gf_max is None:
        raise UsageError("give --gf or both --gf-min and --gf-max")
    if args.steps < 1 or args.gf_max < args.gf_min:
        raise UsageError("empty gf range")
    if args.steps == 1:
        return [args.gf_min]
    return [float(x) for x in np.linspace(args.gf_min, args.gf_max, args.steps)]


def _workers():
    try:
        return max(1, int(os.environ.get("QFIQ_THREADS", "1")))
    except ValueError:
        return 1


# ------------------------------------------------------------------ output


def _fmt(value):
    if value is None or value == "":
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    value = float(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(value) if math.isnan(value) else format(value, ".17g")


def rows_to_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([_fmt(row.get(k)) for k in CSV_HEADER])
    return buf.getvalue()


def parse_csv(text):
    """Inverse of rows_to_csv for the documented schema."""
    out = []
    for rec in csv.DictReader(io.StringIO(text)):
        row = {}
        for key, raw in rec.items():
            if raw == "":
                row[key] = None
            elif key in ("alpha", "direction"):
                row[key] = raw
            elif key == "converged":
                row[key] = raw == "true"
            elif key in ("L", "depth"):
                row[key] = int(raw)
            elif key == "t" and not _is_number(raw):
                row[key] = raw
            else:
                row[key] = float(raw)
        out.append(row)
    return out


def _is_number(text):
    try:
        float(text)
        return True
    except ValueError:
        return False


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return "inf" if value > 0 else ("-inf" if value < 0 else "nan")
    if isinstance(value, (np.floating, np.integer)):
        return _jsonable(value.item())
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _emit(args, rows, meta):
    if args.format == "json":
        text = json.dumps(_jsonable({"meta": meta, "rows": rows}), indent=2) + "\n"
    else:
        text = rows_to_csv(rows)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _meta(args, **extra):
    config = {k: v for k, v in vars(args).items() if k not in ("func",)}
    return {"tool": "qfiquench", "version": __version__, "config": config, **extra}


# ------------------------------------------------------------------ commands


def _sweep_point(task):
    g0, gf, L, alphas, tol = task
    vals, res, converged, L_used = {}, 0.0, True, None
    try:
        for a in ("x", "y", "z"):
            if L is None:
                vals[a], r = qfi.asymptotic_density(g0, gf, a)
            elif L == "auto":
                out = qfi.converge_L(QuenchProtocol(g0, gf), a, tol)
                vals[a], r, L_used = getattr(out, f"f_{a}"), out.residual, max(L_used or 0, out.L_used)
            else:
                vals[a], r = qfi.finite_size_density(QuenchProtocol(g0, gf, L), a), 0.0
                L_used = L
            res = max(res, r)
    except (TailNotConvergedError, ConvergenceFailureError, NumericalFailureError) as exc:
        converged = False
        for a in ("x", "y", "z"):
            vals.setdefault(a, getattr(exc, "partial_value", math.nan))
    finite = [v for v in vals.values() if v is not None and math.isfinite(v)]
    if converged:
        f_opt, direction = qfi.qfi_optimal(vals["x"], vals["y"], vals["z"])
        depth = qfi.witness_bound(f_opt, L_used)
    else:
        f_opt = max(finite) if finite else math.nan
        direction, depth = None, None
    rows = []
    for a in alphas:
        rows.append({"g0": g0, "gf": gf, "L": L_used, "t": None, "alpha": a, "f_q": vals[a],
                     "f_opt": f_opt, "direction": direction, "depth": depth,
                     "converged": converged, "residual": res})
    return rows


def cmd_sweep(args):
    grid = _gf_grid(args)
    L = args.L
    tasks = [(args.g0, gf, L, _alphas(args.alpha), args.tol) for gf in grid]
    workers = _workers()
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_sweep_point, tasks))
    else:
        chunks = [_sweep_point(t) for t in tasks]
    rows = [r for chunk in chunks for r in chunk]
    _emit(args, rows, _meta(args))
    return EXIT_OK if all(r["converged"] for r in rows) else EXIT_NUMERICAL


def cmd_dynamics(args):
    if args.gf is None:
        raise UsageError("dynamics needs --gf")
    if not isinstance(args.L, int):
        raise UsageError("dynamics needs an integer --L")
    n = int(round(args.tmax / args.dt))
    if n < 1:
        raise UsageError("empty time range")
    t_grid = args.dt * np.arange(n + 1)
    q = QuenchProtocol(args.g0, args.gf, args.L)
    rows, extra = [], {}
    for a in _alphas(args.alpha):
        values, res = qfi.qfi_dynamics(q, t_grid, a)
        asym, _ = qfi.asymptotic_density(args.g0, args.gf, a)
        info = {"asymptote": asym, "expected_frequency": qfi.gap(args.gf)}
        t_min = args.tmax / 5.0
        if np.ptp(values[t_grid >= t_min]) > 1e-12 and np.sum(t_grid >= t_min) >= 4:
            # skip the early transient before reading off the oscillation
            freq, resolution = qfi.dominant_frequency(t_grid, values, asym, t_min)
            info.update(dominant_frequency=freq, frequency_resolution=resolution, fit_t_min=t_min)
        extra[a] = info
        for t, v, r in zip(t_grid, values, res):
            rows.append({"g0": args.g0, "gf": args.gf, "L": args.L, "t": float(t), "alpha": a,
                         "f_q": float(v), "f_opt": None, "direction": None,
                         "depth": qfi.witness_bound(max(float(v), 0.0), args.L),
                         "converged": True, "residual": float(r)})
    _emit(args, rows, _meta(args, summary=extra))
    return EXIT_OK


def cmd_xi(args):
    rows = []
    for gf in _gf_grid(args):
        rep = qfi.correlation_length(args.g0, gf)
        rows.append({"g0": args.g0, "gf": gf, "delta_g": rep.delta_g, "xi": rep.xi,
                     "xi_perturbative": rep.xi_perturbative, "divergent": rep.divergent,
                     "f_q_estimate": qfi.fq_from_xi(rep.xi) if math.isfinite(rep.xi) else math.inf})
    if args.format == "json":
        _emit(args, rows, _meta(args))
        return EXIT_OK
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    keys = list(rows[0])
    writer.writerow(keys)
    for row in rows:
        writer.writerow([_fmt(row[k]) for k in keys])
    text = buf.getvalue()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_witness(args):
    depth = qfi.witness_bound(args.fq, args.N)
    if depth == 1:
        text = f"f_Q = {args.fq:g} does not exceed 1: no entanglement certified"
    else:
        text = f"f_Q = {args.fq:g} > {depth - 1}: at least {depth}-partite entanglement"
    if args.format == "json":
        sys.stdout.write(json.dumps({"f_q": args.fq, "N": args.N, "depth": depth,
                                     "text": text}) + "\n")
    else:
        sys.stdout.write(text + "\n")
    return EXIT_OK


def cmd_verify(args):
    from . import verify

    checks = verify.run(args.level, args.perturb_kernel)
    rep = verify.report(checks, args.level, args.perturb_kernel)
    text = json.dumps(_jsonable(rep), indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if rep["passed"] else EXIT_VERIFY


# --------------------------------------------------------------------- main


def build_parser():
    parser = argparse.ArgumentParser(prog="qfiquench", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, need_gf=True):
        p.add_argument("--g0", type=_field, required=True, help="initial field (number or inf)")
        p.add_argument("--gf", type=_field, help="final field")
        p.add_argument("--gf-min", type=_field)
        p.add_argument("--gf-max", type=_field)
        p.add_argument("--steps", type=int, default=1)
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("sweep", help="asymptotic QFI densities over a gf grid")
    common(p)
    p.add_argument("--L", type=_length, default=None, help="chain length, 'auto', or omit for L = inf")
    p.add_argument("--alpha", choices=("x", "y", "z", "all"), default="all")
    p.add_argument("--tol", type=_positive, default=1e-6)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("dynamics", help="QFI density after the quench as a function of time")
    common(p)
    p.add_argument("--L", type=_length, required=True)
    p.add_argument("--tmax", type=_positive, default=50.0)
    p.add_argument("--dt", type=_positive, default=0.1)
    p.add_argument("--alpha", choices=("x", "y", "z", "all"), default="x")
    p.set_defaults(func=cmd_dynamics)

    p = sub.add_parser("xi", help="correlation length of the stationary state")
    common(p)
    p.set_defaults(func=cmd_xi)

    p = sub.add_parser("witness", help="entanglement depth certified by a QFI density")
    p.add_argument("--fq", type=float, required=True)
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("verify", help="oracle-equivalence and identity checks")
    p.add_argument("--level", choices=("fast", "full"), default="fast")
    p.add_argument("--perturb-kernel", choices=("f_ba", "f_aa", "f_bb"), default=None,
                   help="flip the sign of one contraction table (negative control)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, InvalidArgumentError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (QfiQuenchError, FloatingPointError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
