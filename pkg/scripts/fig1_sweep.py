"""Minimum total power against the outage ceiling psi_th, T = 4 and 8.

Writes one CSV per T (all three solvers, powers in dBW) and prints the
proposed-vs-oracle and baseline-vs-proposed gaps per row.

    python3 scripts/fig1_sweep.py --out results/
"""

import argparse
import csv
import io
from pathlib import Path

from ofdmim_relay.cli import run


def sweep(axis, T, extra):
    code, text = run(["sweep", "--axis", axis, "--T", str(T), "--output", "csv", *extra])
    if code != 0:
        raise SystemExit(code)
    return text


def summarize(text):
    rows = list(csv.DictReader(io.StringIO(text)))
    by_value = {}
    for r in rows:
        by_value.setdefault(r["value"], {})[r["solver"]] = float(r["total_dbw"])
    for value, t in by_value.items():
        line = f"  {float(value):<12.6g} proposed {t['proposed']:9.4f} dBW"
        if "oracle" in t:
            line += f"  vs oracle {t['proposed'] - t['oracle']:+.4f} dB"
        if "baseline" in t:
            line += f"  baseline gain {t['baseline'] - t['proposed']:.3f} dB"
        print(line)


def main(axis="psi_th", stem="fig1"):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--T", type=int, nargs="+", default=[4, 8])
    ap.add_argument("extra", nargs=argparse.REMAINDER, help="flags passed on to 'ofdmim-relay sweep'")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for T in args.T:
        text = sweep(axis, T, args.extra)
        path = out / f"{stem}_T{T}.csv"
        path.write_text(text)
        print(f"T={T} -> {path}")
        summarize(text)


if __name__ == "__main__":
    main()
