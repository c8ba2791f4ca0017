"""Command-line runner: ``nlch <verb> --config FILE --out DIR``.

Exit codes: 0 pass, 1 a check failed, 2 bad input, 3 numerical abort.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime as _dt
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (ConvergenceReport, base_initial_field, cauchy_table, converge_eps,
                       converge_lambda, energy_balance, validate_assumptions)
from .config import ExperimentConfig, load_config, parse_grid
from .dynamics import check_apriori, solve
from .errors import BudgetError, ConfigurationError, NumericalAbort
from .oracle import OracleBudget, run_selftest

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_ABORT = 0, 1, 2, 3
FLOAT_FMT = "%.17g"


def _fmt(x) -> str:
    return FLOAT_FMT % float(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


class Run:
    """Collects the manifest of one invocation and owns every file write."""

    def __init__(self, command: str, out: str | None):
        self.command = command
        self.out = Path(out) if out is not None else None
        self.started = time.time()
        self.files: list[str] = []
        self.checks: dict[str, bool] = {}
        self.info: dict = {}
        self.config_echo: dict = {}

    def prepare_output(self):
        if self.out is None:
            return
        try:
            self.out.mkdir(parents=True, exist_ok=True)
            probe = self.out / ".write_probe"
            probe.write_text("")
            probe.unlink()
        except OSError as exc:
            raise ConfigurationError(f"output directory {self.out} is not writable: {exc}") from None

    def write_csv(self, name: str, header, rows):
        path = self.out / name
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([v if isinstance(v, str) else _fmt(v) for v in row])
        self.files.append(name)

    def write_json(self, name: str, payload):
        path = self.out / name
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
            fh.write("\n")
        self.files.append(name)

    def finish(self, status: str, code: int, error: str | None = None) -> int:
        if self.out is not None and self.out.is_dir():
            manifest = {
                "command": self.command,
                "version": __version__,
                "status": status,
                "exit_code": code,
                "error": error,
                "started_utc": _dt.datetime.fromtimestamp(
                    self.started, _dt.timezone.utc).isoformat(),
                "wall_clock_s": time.time() - self.started,
                "config": self.config_echo,
                "files": sorted(set(self.files)) + ["manifest.json"],
                "checks": self.checks,
                "prng": {"name": "numpy PCG64 (default_rng)", "numpy_version": np.__version__},
                "info": self.info,
            }
            try:
                self.write_json("manifest.json", manifest)
            except OSError:
                pass
        return code


def _echo(exp: ExperimentConfig) -> dict:
    return {"file": exp.echo, "resolved": dataclasses.asdict(exp.sim),
            "eps_grid": list(exp.eps_grid), "lambda_grid": list(exp.lambda_grid),
            "reference": exp.reference, "threads": exp.threads}


# -- verbs ---------------------------------------------------------------------------

def cmd_simulate(args, run: Run) -> int:
    exp = load_config(args.config)
    run.config_echo = _echo(exp)
    run.prepare_output()
    cfg = exp.sim
    model = cfg.build_model()
    traj = solve(cfg, model)
    d = model.domain
    dg = traj.diagnostics
    ebal = energy_balance(traj)
    probes = np.unique(np.linspace(0, d.n - 1, min(exp.probes, d.n)).round().astype(int))
    steps = np.rint(traj.times / cfg.dt).astype(int)
    header = ["t"] + [f"phi@x={d.nodes[i]:.6g}" for i in probes] + [
        "norm_H", "norm_V", "mu_norm_V", "energy", "residual"]
    rows = []
    for row, k in enumerate(steps):
        rows.append([traj.times[row], *traj.phi[row, probes],
                     np.sqrt(dg["norm_H_sq"][k]), np.sqrt(dg["norm_V_sq"][k]),
                     np.sqrt(dg["mu_V_sq"][k]), ebal.energy[k], ebal.residual[k]])
    run.write_csv("trajectory.csv", header, rows)
    report = check_apriori(traj)
    run.checks["apriori_finite"] = report.all_finite()
    run.info["apriori"] = report.as_dict()
    run.info["level"] = traj.level
    run.info["max_abs_residual"] = ebal.max_residual
    run.info["energy_max_relative_increase"] = ebal.max_relative_increase()
    run.info["dissipation_source"] = traj.dissipation_source
    return EXIT_OK if all(run.checks.values()) else EXIT_FAIL


def _grid_from(args, exp: ExperimentConfig, kind: str):
    if args.grid:
        return parse_grid(args.grid)
    grid = exp.eps_grid if kind == "eps" else exp.lambda_grid
    if not grid:
        raise ConfigurationError(f"no {kind} grid: pass --grid or set [sweep] {kind}_grid")
    return grid


def _write_convergence(run: Run, report: ConvergenceReport):
    run.write_csv("convergence.csv", ["param", "err_Vstar_sq", "err_L2H_sq", "total"],
                  report.rows())


def _threads(args, exp):
    return args.threads if args.threads is not None else exp.threads


def cmd_sweep_eps(args, run: Run) -> int:
    exp = load_config(args.config)
    run.config_echo = _echo(exp)
    grid = _grid_from(args, exp, "eps")
    reference = args.reference or exp.reference
    run.prepare_output()
    report = converge_eps(exp.sim, grid, reference=reference, threads=_threads(args, exp))
    _write_convergence(run, report)
    fit = {"parameter": "eps", "reference": reference, "flags": report.flags}
    if report.order is not None:
        fit["order"] = report.order
        fit["constant"] = report.constant
        fit["pass"] = {"order_at_least_0.4": report.order >= 0.4,
                       "bounded_by_C_eps_half": report.bound_holds(0.5)}
        run.checks.update(fit["pass"])
    run.write_json("fit.json", fit)
    return EXIT_OK if all(run.checks.values()) else EXIT_FAIL


def cmd_sweep_lambda(args, run: Run) -> int:
    exp = load_config(args.config)
    run.config_echo = _echo(exp)
    grid = _grid_from(args, exp, "lambda")
    run.prepare_output()
    report = converge_lambda(exp.sim, grid, threads=_threads(args, exp))
    _write_convergence(run, report)
    fit = {"parameter": "lambda", "reference": "P_eps", "flags": report.flags,
           "lambda_sq_int_dmu_H_sq": report.extra["lambda_sq_int_dmu_H_sq"]}
    if report.order is not None:
        terms = np.asarray(report.extra["lambda_sq_int_dmu_H_sq"])
        fit["order"] = report.order
        fit["constant"] = report.constant
        fit["pass"] = {"strictly_decreasing": report.strictly_decreasing(),
                       "lambda_term_finite": bool(np.all(np.isfinite(terms)))}
        run.checks.update(fit["pass"])
    run.write_json("fit.json", fit)
    return EXIT_OK if all(run.checks.values()) else EXIT_FAIL


def cmd_cauchy(args, run: Run) -> int:
    exp = load_config(args.config)
    run.config_echo = _echo(exp)
    grid = _grid_from(args, exp, "eps")
    run.prepare_output()
    report = cauchy_table(exp.sim, grid, threads=_threads(args, exp))
    _write_convergence(run, report)
    rows = []
    k = len(grid)
    for i in range(k):
        for j in range(k):
            rows.append([grid[i], grid[j], report.cauchy[i, j], report.initial_gap[i, j]])
    run.write_csv("cauchy_table.csv", ["eps", "gamma", "distance", "initial_gap_Vstar_sq"], rows)
    fit = {"parameter": "eps", "flags": report.flags, "cauchy_constant": report.cauchy_constant}
    if len(grid) >= 2:
        fit["pass"] = {"finite_constant": bool(np.isfinite(report.cauchy_constant))}
        run.checks.update(fit["pass"])
    run.write_json("fit.json", fit)
    return EXIT_OK if all(run.checks.values()) else EXIT_FAIL


def cmd_validate(args, run: Run) -> int:
    exp = load_config(args.config)
    run.config_echo = _echo(exp)
    run.prepare_output()
    cfg = exp.sim
    model = cfg.build_model()
    phi0 = base_initial_field(cfg, model)
    report = validate_assumptions(model.kernel, model.potential, model.domain,
                                  c0=cfg.c0, c1=cfg.c1, phi0=phi0)
    payload = report.as_dict()
    print(json.dumps(_jsonable(payload), indent=2, sort_keys=True))
    run.checks.update(report.checks)
    if run.out is not None:
        run.write_json("assumptions.json", payload)
    if not report.all_pass:
        print("failing: " + ", ".join(report.failing()), file=sys.stderr)
    return EXIT_OK if report.all_pass else EXIT_FAIL


def cmd_oracle_selftest(args, run: Run) -> int:
    budget = OracleBudget(s_points=args.s_points, eig_cap=args.eig_cap,
                          dt_divisor=args.dt_divisor)
    run.info["budget"] = {"s_points": budget.s_points, "eig_cap": budget.eig_cap,
                          "dt_divisor": budget.dt_divisor}
    run.prepare_output()
    checks = run_selftest(budget)
    for c in checks:
        run.checks[c.name] = c.passed
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  value={c.value:.3e}  "
              f"tol={c.tolerance:.3e}")
    run.info["selftest"] = [c.as_dict() for c in checks]
    failing = [c.name for c in checks if not c.passed]
    if failing:
        print("failing checks: " + ", ".join(failing), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


VERBS = {
    "simulate": cmd_simulate,
    "sweep-eps": cmd_sweep_eps,
    "sweep-lambda": cmd_sweep_lambda,
    "cauchy": cmd_cauchy,
    "validate": cmd_validate,
    "oracle-selftest": cmd_oracle_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlch", description="Nonlocal Cahn-Hilliard regularization experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in VERBS:
        p = sub.add_parser(verb)
        needs_config = verb != "oracle-selftest"
        p.add_argument("--config", required=needs_config, help="experiment INI file")
        p.add_argument("--out", default=None if verb in ("validate", "oracle-selftest") else ".",
                       help="output directory")
        p.add_argument("--grid", default=None, help='comma list "v1,v2,..." (strictly decreasing)')
        p.add_argument("--threads", type=int, default=None, help="sweep worker threads")
        if verb == "sweep-eps":
            p.add_argument("--reference", choices=("direct_P", "smallest_eps"), default=None)
        if verb == "oracle-selftest":
            p.add_argument("--s-points", type=int, default=OracleBudget.s_points)
            p.add_argument("--eig-cap", type=int, default=OracleBudget.eig_cap)
            p.add_argument("--dt-divisor", type=int, default=OracleBudget.dt_divisor)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return EXIT_INPUT
    run = Run(args.verb, args.out)
    try:
        code = VERBS[args.verb](args, run)
    except (ConfigurationError, BudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return run.finish("bad input", EXIT_INPUT, str(exc))
    except NumericalAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        run.info["abort_step"] = exc.step
        return run.finish("numerical abort", EXIT_ABORT, str(exc))
    return run.finish("pass" if code == EXIT_OK else "fail", code)


if __name__ == "__main__":
    sys.exit(main())
