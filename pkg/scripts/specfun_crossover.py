"""Error scan used to place the regime crossovers in ofdmim_relay.specfun.

Evaluates each K1 and e^c E1 branch on its own over a log grid, compares with
mpmath at 50 digits, and prints the worst relative error per band. A branch
is usable in a band where the error stays near 1e-15; the shipped
crossovers sit inside the overlap of neighbouring usable bands.

    python3 scripts/specfun_crossover.py [--points 400]
"""

import argparse

import mpmath as mp
import numpy as np

from ofdmim_relay import specfun as sf

mp.mp.dps = 50


def k1_series(x):
    i1, s = sf._k1_series_parts(x)
    return 1.0 / x + np.log(0.5 * x) * i1 - 0.25 * x * s


def k1_cf(x):
    return sf._k1_scaled_cf(x) * np.exp(-x)


def k1_asymptotic(x):
    return sf._k1_scaled_asymptotic(x) * np.exp(-x)


def rel_errors(fn, ref, xs):
    with np.errstate(all="ignore"):
        got = fn(xs)
    want = np.array([float(ref(mp.mpf(float(x)))) for x in xs])
    return np.abs(got / want - 1.0)


def report(name, errs, xs, edges):
    print(f"{name}")
    for lo, hi in zip(edges[:-1], edges[1:]):
        m = (xs >= lo) & (xs < hi)
        if m.any():
            e = errs[m]
            worst = "diverges" if not np.all(np.isfinite(e)) else f"{e.max():.2e}"
            print(f"  [{lo:8.3g}, {hi:8.3g})  max rel err {worst}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=400)
    args = ap.parse_args()

    xs = np.geomspace(0.05, 100.0, args.points)
    edges = [0.05, 0.5, 1, 2, 4, 8, 12, 16, 20, 25, 30, 50, 100.01]
    k1_ref = lambda x: mp.besselk(1, x)
    report("K1 ascending series", rel_errors(k1_series, k1_ref, xs), xs, edges)
    report("K1 Steed continued fraction", rel_errors(k1_cf, k1_ref, xs), xs, edges)
    report("K1 Hankel asymptotic", rel_errors(k1_asymptotic, k1_ref, xs), xs, edges)
    print(f"shipped: series x <= {sf.K1_SERIES_MAX}, asymptotic x >= {sf.K1_ASYMP_MIN}, CF between\n")

    cs = np.geomspace(0.01, 50.0, args.points)
    e_edges = [0.01, 0.1, 0.5, 1, 2, 5, 10, 50.01]
    e1_ref = lambda c: mp.exp(c) * mp.e1(c)
    report("e^c E1 power series", rel_errors(sf._expx_e1_series, e1_ref, cs), cs, e_edges)
    report("e^c E1 continued fraction", rel_errors(sf._expx_e1_cf, e1_ref, cs), cs, e_edges)
    print(f"shipped: series c <= {sf.E1_SERIES_MAX}, continued fraction above")


if __name__ == "__main__":
    main()
