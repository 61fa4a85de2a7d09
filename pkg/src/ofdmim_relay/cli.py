"""Command line entry point: optimize, sweep, validate, oracle, bench.

Settings resolve in order: built-in defaults (the η₁=1.3, η₂=1.1, μ₁=1.3,
μ₂=1.5, 100 dBW profile), then an optional ``--config`` INI file, then flags.
Powers are given in dBW and ``s`` in dB; both are converted to linear once,
while parsing.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import sys
from dataclasses import dataclass, field, replace

import numpy as np

from .montecarlo import DEFAULT_TRIALS
from .optimizer import (
    AllocationResult,
    SolverConfig,
    benchmark_complexity,
    fit_log_scaling,
    fit_power_exponent,
    oracle_grid_search,
    solve_baseline,
    solve_proposed,
)
from .outage import ReliabilityTarget
from .sysmodel import PowerAllocation, SystemParams, dbw_to_w, w_to_dbw
from .validation import run_validation

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_NOT_CONVERGED = 3
EXIT_CONFIG = 4
EXIT_VALIDATION = 5

SOLVERS = ("proposed", "oracle", "baseline")
SWEEP_COLUMNS = ("axis", "value", "solver", "pt_dbw", "pr_dbw", "total_dbw",
                 "achieved_outage", "iterations", "feasible")
BENCH_COLUMNS = ("epsilon", "iterations_proposed", "evaluations_naive_oracle", "grid_cardinality",
                 "evaluations_baseline", "seconds_proposed", "seconds_naive_oracle")
DEFAULT_SWEEPS = {"psi_th": (1e-4, 1e-1, 25, True), "s": (0.0, 10.0, 21, False)}
DEFAULT_BENCH_EPS = "1,0.5,0.25,0.1,0.01,0.001,0.0001"

# key -> (INI section, type); flags use the same names
CONFIG_KEYS = {
    "T": ("system", int),
    "N": ("system", int),
    "M": ("system", int),
    "eta1": ("system", float),
    "eta2": ("system", float),
    "mu1": ("system", float),
    "mu2": ("system", float),
    "ptmax_dbw": ("system", float),
    "prmax_dbw": ("system", float),
    "s_db": ("target", float),
    "psi_th": ("target", float),
    "epsilon": ("solver", float),
    "max_iterations": ("solver", int),
    "gap": ("solver", str),
    "step_dbw": ("solver", float),
    "output": ("run", str),
    "seed": ("run", int),
    "trials": ("run", int),
    "solvers": ("run", str),
}
DEFAULTS = {
    "T": 4, "N": 8, "M": 4, "eta1": 1.3, "eta2": 1.1, "mu1": 1.3, "mu2": 1.5,
    "ptmax_dbw": 100.0, "prmax_dbw": 100.0, "s_db": 5.0, "psi_th": 1e-3,
    "epsilon": 1e-4, "max_iterations": 10_000, "gap": "exact", "step_dbw": 1e-4,
    "output": "json", "seed": 0, "trials": DEFAULT_TRIALS, "solvers": "proposed",
}


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    system: SystemParams
    target: ReliabilityTarget
    solver: SolverConfig
    output: str = "json"
    seed: int = 0
    trials: int = DEFAULT_TRIALS
    solvers: tuple = ("proposed",)
    step_dbw: float = 1e-4
    raw: dict = field(default_factory=dict)
    explicit: frozenset = frozenset()


def read_config_file(path: str) -> dict:
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_file(fh, source=path)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    values = {}
    for section in parser.sections():
        for key, text in parser.items(section):
            if key not in CONFIG_KEYS:
                raise ConfigError(f"{path}: [{section}] unknown key '{key}'")
            want, kind = CONFIG_KEYS[key]
            if section != want:
                raise ConfigError(f"{path}: key '{key}' belongs in [{want}], found in [{section}]")
            try:
                values[key] = kind(text)
            except ValueError:
                raise ConfigError(f"{path}: [{section}] {key} = {text!r} is not a valid {kind.__name__}") from None
    return values


def build_config(args: argparse.Namespace) -> RunConfig:
    raw = dict(DEFAULTS)
    explicit = set()
    if args.config:
        from_file = read_config_file(args.config)
        raw.update(from_file)
        explicit.update(from_file)
    for key in CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            raw[key] = val
            explicit.add(key)
    try:
        system = SystemParams(
            T=raw["T"], N=raw["N"], M=raw["M"], eta1=raw["eta1"], eta2=raw["eta2"],
            mu1=raw["mu1"], mu2=raw["mu2"],
            pt_max=dbw_to_w(raw["ptmax_dbw"]), pr_max=dbw_to_w(raw["prmax_dbw"]),
        )
        target = ReliabilityTarget(s=dbw_to_w(raw["s_db"]), psi_th=raw["psi_th"])
        solver = SolverConfig(epsilon=raw["epsilon"], max_iterations=raw["max_iterations"], gap=raw["gap"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if raw["output"] not in ("csv", "json"):
        raise ConfigError(f"output must be csv or json, got {raw['output']!r}")
    solvers = tuple(x.strip() for x in str(raw["solvers"]).split(",") if x.strip())
    bad = [x for x in solvers if x not in SOLVERS]
    if bad or not solvers:
        raise ConfigError(f"solvers must be a comma list drawn from {SOLVERS}, got {raw['solvers']!r}")
    if raw["trials"] < 1:
        raise ConfigError("trials must be >= 1")
    if not raw["step_dbw"] > 0:
        raise ConfigError("step_dbw must be positive")
    return RunConfig(system, target, solver, raw["output"], raw["seed"], raw["trials"],
                     solvers, raw["step_dbw"], raw, frozenset(explicit))


def fmt(x) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    if x is None:
        return ""
    return str(x)


def write_csv(out, columns, rows):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row[c]) for c in columns])


def _json_default(o):
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    raise TypeError(type(o).__name__)


def dump_json(out, payload):
    json.dump(payload, out, indent=2, sort_keys=True, default=_json_default)
    out.write("\n")


def run_solver(name: str, cfg: RunConfig, target: ReliabilityTarget | None = None) -> AllocationResult:
    target = target or cfg.target
    if name == "proposed":
        return solve_proposed(cfg.system, target, cfg.solver)
    if name == "oracle":
        return oracle_grid_search(cfg.system, target, cfg.step_dbw, "refined")
    return solve_baseline(cfg.system, target)


def _status(res: AllocationResult) -> int:
    if not res.converged:
        return EXIT_NOT_CONVERGED
    if not res.feasible:
        return EXIT_INFEASIBLE
    return EXIT_OK


def _result_row(res: AllocationResult, solver: str) -> dict:
    return {
        "solver": solver,
        "pt_dbw": w_to_dbw(res.alloc.pt),
        "pr_dbw": w_to_dbw(res.alloc.pr),
        "total_dbw": res.total_dbw,
        "achieved_outage": res.achieved_outage,
        "iterations": res.iterations,
        "feasible": res.feasible,
    }


def config_echo(cfg: RunConfig) -> dict:
    return {k: cfg.raw[k] for k in sorted(cfg.raw)}


def cmd_optimize(cfg: RunConfig, out) -> int:
    results = {name: run_solver(name, cfg) for name in cfg.solvers}
    if cfg.output == "json":
        dump_json(out, {"config": config_echo(cfg),
                        "results": {k: v.to_dict() for k, v in results.items()}})
    else:
        write_csv(out, SWEEP_COLUMNS[2:], [_result_row(v, k) for k, v in results.items()])
    primary = results[cfg.solvers[0]]
    return _status(primary)


def cmd_oracle(cfg: RunConfig, out, mode: str) -> int:
    res = oracle_grid_search(cfg.system, cfg.target, cfg.step_dbw, mode)
    if cfg.output == "json":
        dump_json(out, {"config": config_echo(cfg), "results": {"oracle": res.to_dict()}})
    else:
        row = _result_row(res, "oracle")
        row["evaluations"] = res.evaluations
        write_csv(out, SWEEP_COLUMNS[2:] + ("evaluations",), [row])
    return _status(res)


def sweep_values(start: float, stop: float, points: int, log: bool) -> np.ndarray:
    if points < 1:
        raise ConfigError("points must be >= 1")
    if log:
        if start <= 0 or stop <= 0:
            raise ConfigError("log-spaced sweep needs positive bounds")
        return np.logspace(np.log10(start), np.log10(stop), points)
    return np.linspace(start, stop, points)


def sweep_rows(cfg: RunConfig, axis: str, values, solvers=SOLVERS) -> list[dict]:
    rows = []
    for v in values:
        if axis == "psi_th":
            target = replace(cfg.target, psi_th=float(v))
        else:
            target = replace(cfg.target, s=dbw_to_w(float(v)))
        for name in solvers:
            row = _result_row(run_solver(name, cfg, target), name)
            row.update(axis=axis, value=float(v))
            rows.append(row)
    return rows


def cmd_sweep(cfg: RunConfig, out, axis: str, start, stop, points, log) -> int:
    d_start, d_stop, d_points, d_log = DEFAULT_SWEEPS[axis]
    values = sweep_values(
        d_start if start is None else start,
        d_stop if stop is None else stop,
        d_points if points is None else points,
        d_log if log is None else log,
    )
    if axis == "psi_th" and (values.min() <= 0 or values.max() >= 1):
        raise ConfigError("psi_th sweep must stay inside (0, 1)")
    solvers = cfg.solvers if "solvers" in cfg.explicit else SOLVERS
    rows = sweep_rows(cfg, axis, values, solvers)
    if cfg.output == "json":
        dump_json(out, {"config": config_echo(cfg), "rows": rows})
    else:
        write_csv(out, SWEEP_COLUMNS, rows)
    return EXIT_OK


def validation_report(cfg: RunConfig, pt_dbw: float, pr_dbw: float, phi_scale: float = 1.0):
    alloc = PowerAllocation(dbw_to_w(pt_dbw), dbw_to_w(pr_dbw))
    return run_validation(cfg.system, alloc, cfg.target.s, cfg.trials, cfg.seed, phi_scale)


def cmd_validate(cfg: RunConfig, out, pt_dbw: float, pr_dbw: float, phi_scale: float = 1.0) -> int:
    if cfg.trials < 10_000:
        raise ConfigError("validate needs trials >= 10000")
    checks = validation_report(cfg, pt_dbw, pr_dbw, phi_scale)
    ok = all(c.passed for c in checks)
    if cfg.output == "json":
        dump_json(out, {"config": config_echo(cfg), "pt_dbw": pt_dbw, "pr_dbw": pr_dbw,
                        "checks": [c.__dict__ for c in checks], "passed": ok})
    else:
        for c in checks:
            out.write(c.line() + "\n")
        out.write(f"{'PASS' if ok else 'FAIL'} overall {sum(c.passed for c in checks)}/{len(checks)}\n")
    return EXIT_OK if ok else EXIT_VALIDATION


def parse_epsilons(text: str) -> list[float]:
    try:
        eps = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"epsilons must be a comma list of numbers, got {text!r}") from None
    if not eps:
        raise ConfigError("need at least one epsilon")
    if any(e <= 0 for e in eps):
        raise ConfigError("epsilons must be positive")
    return sorted(eps, reverse=True)


def cmd_bench(cfg: RunConfig, out, epsilons: list[float]) -> int:
    table = benchmark_complexity(cfg.system, cfg.target, epsilons)
    rows = [r.__dict__ for r in table]
    fits = {}
    if len(table) >= 2:
        c0, c1, r2 = fit_log_scaling([r.epsilon for r in table], [r.iterations_proposed for r in table])
        fits["proposed_log_fit"] = {"c0": c0, "c1": c1, "r2": r2}
        ran = [r for r in table if r.evaluations_naive_oracle is not None]
        if len(ran) >= 2:
            fits["naive_oracle_exponent"] = fit_power_exponent(
                [r.epsilon for r in ran], [r.evaluations_naive_oracle for r in ran])
    if cfg.output == "json":
        dump_json(out, {"config": config_echo(cfg), "rows": rows, "fits": fits})
    else:
        write_csv(out, BENCH_COLUMNS, rows)
        for name, val in fits.items():
            if isinstance(val, dict):
                out.write("# " + name + " " + " ".join(f"{k}={fmt(v)}" for k, v in val.items()) + "\n")
            else:
                out.write(f"# {name} {fmt(val)}\n")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage, which would read as "infeasible".
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _common_parser() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    p.add_argument("--config", metavar="PATH")
    p.add_argument("--T", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--M", type=int)
    for name in ("eta1", "eta2", "mu1", "mu2"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--ptmax-dbw", dest="ptmax_dbw", type=float)
    p.add_argument("--prmax-dbw", dest="prmax_dbw", type=float)
    p.add_argument("--s-db", dest="s_db", type=float)
    p.add_argument("--psi-th", dest="psi_th", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--max-iterations", dest="max_iterations", type=int)
    p.add_argument("--gap", choices=("exact", "bound"))
    p.add_argument("--step-dbw", dest="step_dbw", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--output", choices=("csv", "json"))
    p.add_argument("--solvers", help="comma list of proposed,oracle,baseline")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = _Parser(prog="ofdmim-relay", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("optimize", parents=[common], help="solve one configuration")

    sw = sub.add_parser("sweep", parents=[common], help="sweep psi_th or s, all solvers")
    sw.add_argument("--axis", choices=("psi_th", "s"), default="psi_th")
    sw.add_argument("--start", type=float)
    sw.add_argument("--stop", type=float)
    sw.add_argument("--points", type=int)
    sw.add_argument("--log", dest="log", action="store_true", default=None)
    sw.add_argument("--linear", dest="log", action="store_false")

    va = sub.add_parser("validate", parents=[common], help="analytic vs Monte Carlo battery")
    va.add_argument("--pt-dbw", dest="pt_dbw", type=float, default=20.0)
    va.add_argument("--pr-dbw", dest="pr_dbw", type=float, default=20.0)
    va.add_argument("--fault-phi-scale", dest="phi_scale", type=float, default=1.0, help=argparse.SUPPRESS)

    orc = sub.add_parser("oracle", parents=[common], help="brute-force grid optimum")
    orc.add_argument("--mode", choices=("naive", "refined"), default="refined")

    be = sub.add_parser("bench", parents=[common], help="iteration and evaluation counts per epsilon")
    be.add_argument("--epsilons", default=DEFAULT_BENCH_EPS)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        cfg = build_config(args)
        if args.command == "optimize":
            return cmd_optimize(cfg, out)
        if args.command == "sweep":
            return cmd_sweep(cfg, out, args.axis, args.start, args.stop, args.points, args.log)
        if args.command == "validate":
            if "output" not in cfg.explicit:
                cfg.output = "csv"
            return cmd_validate(cfg, out, args.pt_dbw, args.pr_dbw, args.phi_scale)
        if args.command == "oracle":
            return cmd_oracle(cfg, out, args.mode)
        return cmd_bench(cfg, out, parse_epsilons(args.epsilons))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def run(argv) -> tuple[int, str]:
    """Invoke :func:`main` capturing stdout; used by tests and scripts."""
    buf = io.StringIO()
    code = main(argv, buf)
    return code, buf.getvalue()


if __name__ == "__main__":
    sys.exit(main())
