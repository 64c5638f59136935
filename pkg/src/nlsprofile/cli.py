"""Command line entry point: ``nlsprofile {solve,coeffs,sweep,energy,validate,plotdata}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from fractions import Fraction
from itertools import product

import numpy as np

from .core import BarrierCondition, classify, new_params
from .energy import energy_sign
from .integrate import Termination, decay_fit, integrate, residual_norm
from .phase import direction_grid
from .profile import geometric_grid, physical_fields, reconstruct, solve_profile
from .series import compute_coefficients
from .validate import run_validation

log = logging.getLogger("nlsprofile")

EXIT_OK, EXIT_DOMAIN, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3
WORKERS_ENV = "NLSPROFILE_WORKERS"


class DomainError(Exception):
    pass


class NumericalError(Exception):
    pass


def fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_atomic(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def parse_range(text: str) -> list[float]:
    """``a:b:step`` (inclusive) or a comma list."""
    if ":" in text:
        a, b, step = (float(x) for x in text.split(":"))
        if step <= 0 or b < a:
            raise DomainError(f"bad range {text!r}")
        n = int(round((b - a) / step)) + 1
        return [round(a + i * step, 12) for i in range(n)]
    return [float(x) for x in text.split(",") if x.strip()]


def read_config(path: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise DomainError(f"config line without '=': {line!r}")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _params(args):
    try:
        return new_params(args.d, args.p, args.r)
    except ValueError as exc:
        raise DomainError(str(exc)) from exc


# --- commands -----------------------------------------------------------------

def cmd_solve(args) -> int:
    params = _params(args)
    verdict = classify(params)
    if verdict.barrier_condition is not BarrierCondition.STRICT and not args.any_regime:
        raise DomainError(f"alpha*d > r-1 does not hold ({verdict.barrier_condition.value}); "
                          "pass --any-regime to integrate anyway")
    coeffs = compute_coefficients(params, args.n_max)
    try:
        traj = integrate(params, coeffs, args.xi_start, args.xi_end, tol=args.tol)
    except ValueError as exc:
        raise DomainError(str(exc)) from exc
    if traj.termination in (Termination.DIVERGED, Termination.SINGULARITY):
        raise NumericalError(f"integration {traj.termination.value} at xi={traj.xi[-1]:.6g}")

    summary = {"params": {"d": params.d, "p": params.p, "r": params.r},
               "regime": verdict.barrier_condition.value,
               "termination": traj.termination.value,
               "steps_accepted": traj.steps_accepted, "steps_rejected": traj.steps_rejected,
               "residual": residual_norm(traj),
               "barrier_events": [e.__dict__ for e in traj.events]}
    if traj.termination is Termination.CONVERGED_TO_ORIGIN:
        fit = decay_fit(traj)
        summary["decay_rate_U"], summary["decay_rate_S"] = fit.rate_U, fit.rate_S
    summary["metadata"] = {"created": datetime.now(timezone.utc).isoformat()}

    if args.trajectory:
        write_atomic(args.trajectory, csv_text(
            ["xi", "U_bar", "S_bar", "dU", "dS"],
            zip(traj.xi, traj.u, traj.s, traj.du, traj.ds)))
    if args.profile or args.physical:
        if traj.termination is not Termination.CONVERGED_TO_ORIGIN:
            raise DomainError("profile requires a trajectory converged to the origin")
        grid = geometric_grid(args.zeta_min, math.exp(traj.xi[-1]), args.n_grid)
        prof = reconstruct(traj, coeffs, grid)
        if args.profile:
            write_atomic(args.profile, csv_text(
                ["zeta", "U_R", "S", "P", "Psi"],
                zip(prof.zeta, prof.U_R, prof.S, prof.P, prof.Psi)))
        if args.physical:
            T, t = args.physical
            if not t < T:
                raise DomainError("--physical needs t < T")
            fld = physical_fields(prof, params, T, t)
            write_atomic(args.physical_out, csv_text(["x", "rho", "psi"],
                                                     zip(fld.x, fld.rho, fld.psi)))
    write_atomic(args.summary, json.dumps(summary, indent=2, default=str) + "\n")
    return EXIT_OK


def cmd_coeffs(args) -> int:
    params = _params(args)
    c = compute_coefficients(params, args.n_max)
    rows = [(n, "U" if n % 2 == 0 else "S", c.coef(n), c.p_bar[n])
            for n in range(-1, args.n_max + 1)]
    write_atomic(args.out, csv_text(["n", "kind", "value", "p_bar"], rows))
    return EXIT_OK


def sweep_row(d: int, p: float, r: float, n_max: int, tol: float, xi_start: float) -> dict:
    """One sweep tuple; failures are recorded, never raised."""
    row = {"d": d, "p": p, "r": r, "regime": "", "supercritical_mass": "", "r_window": "",
           "termination": "", "residual": "", "decay_rate": "", "in_barrier": "",
           "below_minus_one": "", "error": ""}
    try:
        params = new_params(d, p, r)
        v = classify(params)
        row.update(regime=v.barrier_condition.value, supercritical_mass=v.supercritical_mass,
                   r_window=v.r_window)
        if v.barrier_condition is BarrierCondition.DEGENERATE:
            return row
        run = (v.barrier_condition is BarrierCondition.VIOLATED
               or (v.barrier_condition is BarrierCondition.STRICT and v.r_window))
        if not run:
            return row
        coeffs = compute_coefficients(params, n_max)
        traj = integrate(params, coeffs, xi_start, tol=tol)
        row["termination"] = traj.termination.value
        row["residual"] = residual_norm(traj)
        if v.barrier_condition is BarrierCondition.STRICT:
            row["in_barrier"] = bool(np.all((traj.u > -1) & (traj.u < 0)) and not traj.events)
            if traj.termination is Termination.CONVERGED_TO_ORIGIN:
                row["decay_rate"] = decay_fit(traj).rate_U
        else:
            row["below_minus_one"] = bool(np.all(traj.u < -1))
    except Exception as exc:  # recorded per row by design
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


SWEEP_COLUMNS = ["d", "p", "r", "regime", "supercritical_mass", "r_window", "termination",
                 "residual", "decay_rate", "in_barrier", "below_minus_one", "error"]


def run_sweep(ds, ps, rs, n_max=40, tol=1e-10, xi_start=-4.0, workers=None) -> list[dict]:
    tuples = sorted(product(ds, ps, rs))
    if not tuples:
        raise DomainError("empty sweep range")
    workers = workers or int(os.environ.get(WORKERS_ENV, 0)) or os.cpu_count() or 1
    jobs = [(d, p, r, n_max, tol, xi_start) for d, p, r in tuples]
    if workers == 1 or len(jobs) == 1:
        return [sweep_row(*j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(sweep_row, *zip(*jobs)))


def cmd_sweep(args) -> int:
    ds = [int(x) for x in str(args.d).split(",")]
    rows = run_sweep(ds, parse_range(str(args.p)), parse_range(str(args.r)),
                     args.n_max, args.tol, args.xi_start, args.workers)
    write_atomic(args.out, csv_text(SWEEP_COLUMNS, ([r[c] for c in SWEEP_COLUMNS] for r in rows)))
    return EXIT_OK


def cmd_energy(args) -> int:
    params = _params(args)
    zeta_max = 2 * args.r_max if args.r_max else math.exp(args.xi_max)
    try:
        _, traj, prof = solve_profile(params, zeta_max=zeta_max, n_grid=args.n_grid,
                                      tol=args.tol, n_max=args.n_max)
    except ValueError as exc:
        raise DomainError(str(exc)) from exc
    if traj.termination is not Termination.REACHED_XI_END:
        raise NumericalError(f"integration {traj.termination.value}")
    try:
        rep = energy_sign(prof, params, args.r_max)
    except ValueError as exc:
        raise DomainError(str(exc)) from exc
    out = {"params": {"d": params.d, "p": params.p, "r": params.r}, **rep.to_dict()}
    write_atomic(args.out, json.dumps(out, indent=2) + "\n")
    if args.sweep_csv:
        header = ["d", "p", "r", "R_max", "value", "tail_bound", "sign", "extrapolated_total"]
        row = [params.d, params.p, params.r, rep.R_max, rep.value, rep.tail_bound,
               rep.sign.value, rep.extrapolated_total]
        new = not os.path.exists(args.sweep_csv)
        old = "" if new else open(args.sweep_csv).read()
        text = csv_text(header, [row])
        write_atomic(args.sweep_csv, text if new else old + text.split("\r\n", 1)[1])
    return EXIT_OK


def cmd_validate(args) -> int:
    rep = run_validation(args.d, args.p, args.r, args.n_max)
    write_atomic(args.out, json.dumps(rep, indent=2, default=str) + "\n")
    return EXIT_OK if rep["passed"] else EXIT_NUMERIC


def cmd_plotdata(args) -> int:
    params = _params(args)
    ur = tuple(float(x) for x in args.u_range.split(":"))
    sr = tuple(float(x) for x in args.s_range.split(":"))
    rows = direction_grid(params, ur, sr, args.nu, args.ns)
    write_atomic(args.out, csv_text(["U_bar", "S_bar", "dU", "dS"], rows))
    if args.trajectory:
        coeffs = compute_coefficients(params, args.n_max)
        traj = integrate(params, coeffs, args.xi_start, tol=args.tol)
        write_atomic(args.trajectory, csv_text(["xi", "U_bar", "S_bar"],
                                               zip(traj.xi, traj.u, traj.s)))
    return EXIT_OK


# --- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nlsprofile", description=__doc__)
    ap.add_argument("--config", help="key = value file; command-line flags take precedence")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, p_type=float, r_type=float):
        sp.add_argument("--d", type=int, default=3)
        sp.add_argument("--p", type=p_type, default=p_type(3))
        sp.add_argument("--r", type=r_type, default=r_type("2.1"))
        sp.add_argument("--n-max", type=int, default=40)

    def integ(sp):
        sp.add_argument("--tol", type=float, default=1e-10)
        sp.add_argument("--xi-start", type=float, default=-4.0)

    sp = sub.add_parser("solve", help="series + integration; trajectory/profile CSV, JSON summary")
    common(sp); integ(sp)
    sp.add_argument("--xi-end", type=float, default=None)
    sp.add_argument("--trajectory", help="CSV of xi,U_bar,S_bar,dU,dS")
    sp.add_argument("--summary", default="-", help="JSON summary path (default stdout)")
    sp.add_argument("--profile", help="CSV of zeta,U_R,S,P,Psi")
    sp.add_argument("--physical", nargs=2, type=float, metavar=("T", "t"))
    sp.add_argument("--physical-out", default="physical.csv")
    sp.add_argument("--zeta-min", type=float, default=1e-6)
    sp.add_argument("--n-grid", type=int, default=2001)
    sp.add_argument("--any-regime", action="store_true")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("coeffs", help="series coefficients as CSV")
    common(sp)
    sp.add_argument("--out", default="-")
    sp.set_defaults(func=cmd_coeffs)

    sp = sub.add_parser("sweep", help="classify and solve over parameter ranges")
    sp.add_argument("--d", default="3", help="comma list")
    sp.add_argument("--p", default="3", help="a:b:step or comma list")
    sp.add_argument("--r", default="2.1", help="a:b:step or comma list")
    sp.add_argument("--n-max", type=int, default=40)
    integ(sp)
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("--out", default="-")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("energy", help="energy-sign report as JSON")
    common(sp)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--r-max", type=float, default=None)
    sp.add_argument("--xi-max", type=float, default=14.0,
                    help="profile extent log(zeta_max) when --r-max is not given")
    sp.add_argument("--n-grid", type=int, default=4001)
    sp.add_argument("--out", default="-")
    sp.add_argument("--sweep-csv", help="append a row to this CSV")
    sp.set_defaults(func=cmd_energy)

    sp = sub.add_parser("validate", help="run the oracle suite")
    common(sp, p_type=str, r_type=str)
    sp.add_argument("--out", default="-")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("plotdata", help="phase-portrait direction field as CSV")
    common(sp); integ(sp)
    sp.add_argument("--u-range", default="-3:1")
    sp.add_argument("--s-range", default="0:3")
    sp.add_argument("--nu", type=int, default=41)
    sp.add_argument("--ns", type=int, default=31)
    sp.add_argument("--trajectory", help="also write the profile trajectory CSV")
    sp.add_argument("--out", default="-")
    sp.set_defaults(func=cmd_plotdata)
    return ap


def parse_args(argv=None) -> argparse.Namespace:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.config:
        config = read_config(args.config)
        sub = ap._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions}
        defaults = {}
        for key, value in config.items():
            if key not in known:
                raise DomainError(f"unknown config key {key!r}")
            act = known[key]
            defaults[key] = act.type(value) if act.type else value
        sub.set_defaults(**defaults)
        args = ap.parse_args(argv)
    return args


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (NumericalError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
