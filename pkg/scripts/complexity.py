"""Iteration and evaluation counts against precision epsilon.

Runs the proposed iteration at each epsilon (tolerance in watts) and the
naive grid oracle where its grid is small enough (step in dBW), then prints
the log-scaling fit for the former and the power-law exponent for the latter.

    python3 scripts/complexity.py --epsilons 1,0.5,0.25,0.1,0.01,0.001,0.0001
"""

import argparse

from ofdmim_relay.cli import (
    DEFAULT_BENCH_EPS,
    build_config,
    build_parser,
    parse_epsilons,
)
from ofdmim_relay.optimizer import benchmark_complexity, fit_log_scaling, fit_power_exponent


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--epsilons", default=DEFAULT_BENCH_EPS)
    ap.add_argument("--T", type=int, default=4)
    ap.add_argument("--psi-th", type=float, default=1e-3)
    args = ap.parse_args()
    cfg = build_config(build_parser().parse_args(["bench", "--T", str(args.T), "--psi-th", str(args.psi_th)]))
    rows = benchmark_complexity(cfg.system, cfg.target, parse_epsilons(args.epsilons))

    print(f"{'epsilon':>10} {'iters':>6} {'naive evals':>12} {'grid points':>14} {'baseline evals':>15}")
    for r in rows:
        naive = "-" if r.evaluations_naive_oracle is None else str(r.evaluations_naive_oracle)
        print(f"{r.epsilon:>10g} {r.iterations_proposed:>6d} {naive:>12} {r.grid_cardinality:>14d} "
              f"{r.evaluations_baseline:>15d}")

    fine = [r for r in rows if r.epsilon <= 0.1]
    if len(fine) >= 2:
        c0, c1, r2 = fit_log_scaling([r.epsilon for r in fine], [r.iterations_proposed for r in fine])
        print(f"iterations ~ {c0:.3f} + {c1:.3f} ln(1/eps), R^2 = {r2:.3f} (eps <= 0.1)")
    ran = [r for r in rows if r.evaluations_naive_oracle is not None]
    if len(ran) >= 2:
        k = fit_power_exponent([r.epsilon for r in ran], [r.evaluations_naive_oracle for r in ran])
        print(f"naive oracle evaluations ~ (1/eps)^{k:.3f}")


if __name__ == "__main__":
    main()
