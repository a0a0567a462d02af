"""Command-line interface.

Commands: ``dual``, ``evolve``, ``oracle``, ``doeblin``, ``converge``,
``verify``.  Every run writes CSV files with header rows and prints a
one-line summary record with the resolved numerical parameters, so
identical configurations reproduce byte-identical outputs.

Exit codes: 0 success, 2 configuration error, 3 validation or
precondition failure, 4 solver error, 5 invariant violation.

The environment variable ``RENEWALKIT_OUT_DIR`` redirects relative
output paths into another directory.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import (Numerics, load_measure, load_numerics, load_rate,
                     load_scenario, test_function_from_expr)
from .dual import evolve_dual
from .ergodicity import best_certificate, certificate, tv_decay_experiment
from .exceptions import (ConfigError, ContractError, ConvergenceError,
                         DomainError, InvariantViolation, RenewalError)
from .forward import solve_orbit
from .oracle import simulate
from .verification import run_verification

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_SOLVER = 4
EXIT_INVARIANT = 5


def _out_path(path_str: str) -> Path:
    path = Path(path_str)
    base = os.environ.get("RENEWALKIT_OUT_DIR")
    if base and not path.is_absolute():
        path = Path(base) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _write_csv(path_str: str, header, rows) -> Path:
    path = _out_path(path_str)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")


def _numerics(args) -> Numerics:
    return load_numerics(getattr(args, "numerics", None))


def _validated_rate(args, numerics: Numerics, horizon: float):
    rate = load_rate(args.rate, numerics, horizon=max(horizon, numerics.horizon))
    report = rate.validate()
    if not report.ok:
        raise InvalidRate(str(report))
    return rate


class InvalidRate(RenewalError):
    pass


def _summary(command: str, numerics: Numerics, **fields):
    parts = [f"command={command}",
             f"h_a={numerics.h_a:g}", f"h_t={numerics.h_t:g}",
             f"A_max={numerics.A_max:g}"]
    parts += [f"{k}={v}" for k, v in fields.items()]
    print(" ".join(parts))


# ----------------------------------------------------------------------
# commands

def _cmd_dual(args) -> int:
    nm = _numerics(args)
    rate = _validated_rate(args, nm, args.t)
    f0 = test_function_from_expr(args.f0)
    prof = evolve_dual(f0, rate, args.t, tol=nm.tol_picard)
    path = _write_csv(args.out, ["age", "value"], zip(prof.ages, prof.values))
    _summary("dual", nm, t=f"{args.t:g}", f0=repr(args.f0),
             sup=f"{prof.sup_norm():.12g}", out=path)
    return EXIT_OK


def _cmd_evolve(args) -> int:
    nm = _numerics(args)
    rate = _validated_rate(args, nm, args.t)
    mu = load_measure(args.init, nm)
    orbit = solve_orbit(mu, rate, args.t)
    final = orbit.measure_at(args.t)
    path = _write_csv(args.out, ["kind", "position", "value"], final.to_rows())
    extra = {}
    if args.snapshots:
        rows = []
        step = args.snapshots
        k, t = 0, 0.0
        while t <= args.t + 1e-12:
            snap = orbit.measure_at(min(t, args.t))
            rows += [(f"{t:.12g}",) + r for r in snap.to_rows()]
            k += 1
            t = k * step
        snap_path = _write_csv(str(Path(args.out).with_suffix("")) + "_snapshots.csv",
                               ["t", "kind", "position", "value"], rows)
        extra["snapshots"] = snap_path
    _summary("evolve", nm, t=f"{args.t:g}",
             mass=f"{final.mass():.12g}",
             mass_drift=f"{final.mass() - mu.mass():.3e}", out=path, **extra)
    return EXIT_OK


def _cmd_oracle(args) -> int:
    nm = _numerics(args)
    rate = _validated_rate(args, nm, args.t)
    mu = load_measure(args.init, nm)
    ens = simulate(mu, rate, args.t, args.n, args.seed)
    path = _write_csv(args.out, ["age"], ((a,) for a in ens.ages))
    _summary("oracle", nm, t=f"{args.t:g}", n=args.n, seed=args.seed,
             mean_age=f"{float(np.mean(ens.ages)):.12g}", out=path)
    return EXIT_OK


def _cmd_doeblin(args) -> int:
    nm = _numerics(args)
    rate = _validated_rate(args, nm, nm.horizon)
    if args.optimize:
        cert = best_certificate(rate)
    else:
        cert = certificate(rate, args.eta)
    print(f"doeblin eta={cert.eta:.12g} t0={cert.t0:.12g} "
          f"c={cert.c:.12g} alpha={cert.alpha:.12g}")
    return EXIT_OK


def _cmd_converge(args) -> int:
    nm = _numerics(args)
    times = [float(x) for x in args.times.split(",") if x.strip()]
    if not times:
        raise ConfigError("no times given")
    rate = _validated_rate(args, nm, max(times))
    mu1 = load_measure(args.mu1, nm)
    mu2 = load_measure(args.mu2, nm)
    cert = best_certificate(rate) if args.optimize else certificate(rate, args.eta)
    table = tv_decay_experiment(mu1, mu2, rate, cert, times)
    path = _write_csv(args.out, ["t", "tv", "bound"],
                      ((r.t, r.tv, r.bound) for r in table.rows))
    _summary("converge", nm, alpha=f"{cert.alpha:.12g}",
             fitted_rate=f"{table.fitted_rate():.12g}",
             max_excess=f"{table.max_excess():.3e}", out=path)
    return EXIT_OK


def _cmd_verify(args) -> int:
    scenario = load_scenario(args.config)
    report = run_verification(scenario)
    for line in report.lines():
        print(line)
    nm = scenario.numerics
    _summary("verify", nm, checks=len(report.rows),
             status=("pass" if report.ok else "FAIL"))
    if not report.ok:
        raise InvariantViolation("verification found residuals above tolerance")
    return EXIT_OK


# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="renewal",
        description="Measure-valued renewal equation toolkit",
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, rate=True):
        if rate:
            sp.add_argument("--rate", required=True, help="rate config (TOML)")
        sp.add_argument("--numerics", default=None,
                        help="optional TOML file with a [numerics] section")

    sp = sub.add_parser("dual", help="evolve a test function under the dual action")
    common(sp)
    sp.add_argument("--f0", required=True, help="expression in a, e.g. 'exp(-a)'")
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=_cmd_dual)

    sp = sub.add_parser("evolve", help="evolve a measure forward in time")
    common(sp)
    sp.add_argument("--init", required=True, help="initial measure config (TOML)")
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--snapshots", type=float, default=None,
                    help="also write snapshots every STEP time units")
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=_cmd_evolve)

    sp = sub.add_parser("oracle", help="Monte Carlo simulation of the age process")
    common(sp)
    sp.add_argument("--init", required=True)
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=_cmd_oracle)

    sp = sub.add_parser("doeblin", help="print a minorization certificate")
    common(sp)
    group = sp.add_mutually_exclusive_group()
    group.add_argument("--eta", type=float, default=1.0)
    group.add_argument("--optimize", action="store_true")
    sp.set_defaults(fn=_cmd_doeblin)

    sp = sub.add_parser("converge", help="total-variation decay experiment")
    common(sp)
    sp.add_argument("--mu1", required=True)
    sp.add_argument("--mu2", required=True)
    sp.add_argument("--times", required=True, help="comma-separated times")
    group = sp.add_mutually_exclusive_group()
    group.add_argument("--eta", type=float, default=1.0)
    group.add_argument("--optimize", action="store_true")
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=_cmd_converge)

    sp = sub.add_parser("verify", help="run the invariant suite on a scenario")
    sp.add_argument("--config", required=True, help="scenario TOML")
    sp.set_defaults(fn=_cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InvalidRate, ContractError) as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (DomainError, ConvergenceError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
