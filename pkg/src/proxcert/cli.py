"""Command-line entry point.

    proxcert run CONFIG [--out-dir DIR] [--seed-override N] [--quiet]
    proxcert tightness --mu MU --L L --t-grid "0.1,2/11,0.19"
    proxcert pl-compare CONFIG ID [--iters N]

Exit codes: 0 success, 1 config/IO/argument error, 2 certification failure.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import tempfile
import warnings
from pathlib import Path

from . import rates
from .certify import certify_trace, empirical_eta, tightness_measurement, worst_case_instance
from .config import ConfigError, load_config, parse_step
from .errors import ProxCertError
from .pg import run_pg, trace_to_csv

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2
TIGHTNESS_TOL = 1e-12
PL_FLAG_RTOL = 1e-9
DEFAULT_OUT_DIR = "proxcert-out"


def _fmt(v):
    return format(float(v), ".17g")


def write_atomic(path: Path, text: str):
    """Write via a temp file in the same directory, then rename over ``path``."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run_experiment(exp):
    """Run PG for one experiment and return ``(trace, report)``."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        trace = run_pg(exp.problem, exp.x0, exp.t, max_iters=exp.max_iters, tol=exp.tol)
    report = certify_trace(exp.problem, trace, witness=exp.witness,
                           empirical=exp.empirical_eta,
                           interpolation="interpolation" in exp.checks)
    report.checks = [c for c in report.checks if c.name in exp.checks]
    return trace, report


def cmd_run(config_path, out_dir=None, seed_override=None, quiet=False) -> int:
    try:
        experiments = load_config(config_path, seed_override=seed_override)
    except FileNotFoundError:
        print(f"error: config file not found: {config_path}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    out = Path(out_dir or os.environ.get("PROXCERT_OUT_DIR") or DEFAULT_OUT_DIR)
    status = EXIT_OK
    for exp in experiments:
        try:
            trace, report = run_experiment(exp)
        except ProxCertError as exc:
            print(f"error: experiment {exp.id!r}: {exc}", file=sys.stderr)
            return EXIT_ERROR
        try:
            write_atomic(out / f"{exp.id}.trace.csv", trace_to_csv(trace))
            write_atomic(out / f"{exp.id}.report.json", report.to_json())
            write_atomic(out / f"{exp.id}.checks.csv", report.checks_csv())
        except OSError as exc:
            print(f"error: cannot write outputs for {exp.id!r}: {exc}", file=sys.stderr)
            return EXIT_ERROR
        if not report.overall:
            status = EXIT_FAIL
        if not quiet:
            failed = [c.name for c in report.checks if c.passed is False]
            verdict = "pass" if report.overall else "FAIL " + ",".join(failed)
            print(f"{exp.id}: {verdict} ({len(trace.records) - 1} iterations, "
                  f"{trace.stop_reason})")
    return status


def parse_grid(spec: str, mu: float, L: float):
    return [parse_step(item, mu, L) for item in spec.split(",") if item.strip()]


def cmd_tightness(mu, L, t_grid, steps=50, stream=None) -> int:
    stream = stream or sys.stdout
    try:
        rates.rho(1.0, mu, L)
        if not mu > 0:
            raise ValueError(f"mu must be positive, got {mu}")
        grid = parse_grid(t_grid, mu, L)
        if not grid:
            raise ValueError("empty step grid")
    except (ValueError, ProxCertError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["t", "rho", "measured_worst_ratio", "abs_diff"])
    worst = 0.0
    for t in grid:
        problem, x0 = worst_case_instance(mu, L, t)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            measured = tightness_measurement(problem, x0, t, steps)
        r = rates.rho(t, mu, L)
        diff = abs(measured - r)
        worst = max(worst, diff)
        w.writerow([_fmt(t), _fmt(r), _fmt(measured), _fmt(diff)])
    return EXIT_OK if worst < TIGHTNESS_TOL else EXIT_FAIL


def pl_compare_rows(problem, x0, t, iters, eta):
    """Gap sequence against the new and baseline PL envelopes."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        trace = run_pg(problem, x0, t, max_iters=iters, tol=0.0)
    new_rate = rates.pl_rate(eta, t)
    base_rate = 1.0 - eta * t
    gap0 = trace.records[0].phi - problem.known_min
    rows = []
    for rec in trace.records:
        gap = rec.phi - problem.known_min
        new_env = gap0 * new_rate ** rec.k
        rows.append((rec.k, gap, new_env, gap0 * base_rate ** rec.k,
                     gap <= new_env * (1.0 + PL_FLAG_RTOL)))
    return rows


def cmd_pl_compare(config_path, entry_id, iters=None, seed_override=None,
                   stream=None) -> int:
    stream = stream or sys.stdout
    try:
        experiments = load_config(config_path, seed_override=seed_override)
    except FileNotFoundError:
        print(f"error: config file not found: {config_path}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    match = [e for e in experiments if e.id == entry_id]
    if not match:
        print(f"error: no experiment with id {entry_id!r}", file=sys.stderr)
        return EXIT_ERROR
    exp = match[0]
    problem = exp.problem
    if problem.known_min is None:
        print(f"error: experiment {entry_id!r} has no known_min", file=sys.stderr)
        return EXIT_ERROR
    n = exp.max_iters if iters is None else iters
    eta = problem.eta
    if eta is None and exp.empirical_eta:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            eta = empirical_eta(problem, run_pg(problem, exp.x0, exp.t, max_iters=n, tol=0.0))
        if eta is not None:
            print(f"using empirical eta = {eta:.17g}", file=sys.stderr)
    if eta is None:
        print(f"error: experiment {entry_id!r} has no PL constant", file=sys.stderr)
        return EXIT_ERROR
    if eta * exp.t > 1:
        print(f"error: eta * t = {eta * exp.t} exceeds 1", file=sys.stderr)
        return EXIT_ERROR
    rows = pl_compare_rows(problem, exp.x0, exp.t, n, eta)
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["k", "gap", "new_bound_envelope", "baseline_envelope", "within_new_bound"])
    for k, gap, new_env, base_env, ok in rows:
        w.writerow([k, _fmt(gap), _fmt(new_env), _fmt(base_env), int(ok)])
    return EXIT_OK if all(r[4] for r in rows) else EXIT_FAIL


def build_parser():
    p = argparse.ArgumentParser(prog="proxcert", description=__doc__.split("\n")[0])
    p.add_argument("--quiet", action="store_true", help="suppress per-experiment lines")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run and certify every experiment in a config")
    r.add_argument("config")
    r.add_argument("--out-dir", default=None,
                   help="output directory (default: $PROXCERT_OUT_DIR or ./proxcert-out)")
    r.add_argument("--seed-override", type=int, default=None)
    r.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)

    tg = sub.add_parser("tightness", help="measure rho(t) on worst-case instances")
    tg.add_argument("--mu", type=float, required=True)
    tg.add_argument("--L", type=float, required=True, dest="L")
    tg.add_argument("--t-grid", required=True,
                    help='comma-separated steps, e.g. "0.1,2/11,1/L,2/(L+mu)"')
    tg.add_argument("--steps", type=int, default=50)

    pc = sub.add_parser("pl-compare", help="gap versus new and baseline PL envelopes")
    pc.add_argument("config")
    pc.add_argument("id")
    pc.add_argument("--iters", type=int, default=None)
    pc.add_argument("--seed-override", type=int, default=None)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    if args.command == "run":
        return cmd_run(args.config, args.out_dir, args.seed_override, args.quiet)
    if args.command == "tightness":
        return cmd_tightness(args.mu, args.L, args.t_grid, args.steps)
    return cmd_pl_compare(args.config, args.id, args.iters, args.seed_override)


if __name__ == "__main__":
    sys.exit(main())
