"""Cross-checks of the closed-form analytics against simulation and quadrature."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad

from .specfun import x_times_k1
from .montecarlo import estimate_mean_snr, estimate_outage
from .outage import (
    OutageShape,
    expected_snr,
    jensen_gap,
    jensen_gap_bound,
    outage_block,
    phi_subcarrier,
    surrogate_snr,
)
from .sysmodel import PowerAllocation, SystemParams

# Upper limit chosen so that 1 - Phi(S_MAX) <= exp(-b S_MAX) = QUAD_TAIL.
QUAD_TAIL = 1e-12
SAP_N_VALUES = (8, 16, 32)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    measured: float
    limit: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name} measured={self.measured:.6g} limit={self.limit:.6g} {self.detail}".rstrip()


def sub_seed(seed: int, k: int) -> int:
    return int(np.random.SeedSequence([seed & (2**64 - 1), k]).generate_state(1, np.uint64)[0])


def expected_snr_quadrature(params: SystemParams, alloc: PowerAllocation) -> float:
    """Integral of 1 - Phi(s) over s >= 0 (mean of a nonnegative variable)."""
    ab = OutageShape.from_alloc(params, alloc)
    s_max = -math.log(QUAD_TAIL) / ab.b

    def survive(s):
        # 1 - Phi(s), formed directly so the tail keeps its relative precision
        return math.exp(-ab.b * s) * float(x_times_k1(ab.a * math.sqrt(s)))

    # The survival function decays on the scales 1/a^2 (second hop) and 1/b
    # (first hop); geometric breakpoints from the smaller one keep each piece smooth.
    lo_scale = min(1.0 / ab.a**2, 1.0 / ab.b)
    pieces = [0.0, *np.geomspace(lo_scale / 16, s_max, 24)]
    total = 0.0
    for lo, hi in zip(pieces[:-1], pieces[1:]):
        val, _ = quad(survive, lo, hi, epsabs=0.0, epsrel=1e-11, limit=200)
        total += val
    return total


def _scaled_outage(params, alloc, s, phi_scale):
    if phi_scale == 1.0:
        return outage_block(params, alloc, s)
    phi = min(1.0, phi_scale * phi_subcarrier(params, alloc, s))
    return 1.0 - (1.0 - phi) ** params.T


def check_mc_outage(params, alloc, s, trials, seed, phi_scale=1.0) -> Check:
    est = estimate_outage(params, alloc, s, trials, seed)
    analytic = _scaled_outage(params, alloc, s, phi_scale)
    z = abs(est.p_hat - analytic) / est.std_err if est.std_err > 0 else math.inf
    return Check("mc_vs_block_outage", z <= 3.0, z, 3.0,
                 f"p_hat={est.p_hat:.6g} analytic={analytic:.6g} (std errs)")


def check_mean_snr(params, alloc, trials, seed) -> Check:
    mean, se = estimate_mean_snr(params, alloc, trials, seed)
    exact = expected_snr(params, alloc)
    z = abs(mean - exact) / se
    return Check("mc_vs_expected_snr", z <= 4.0, z, 4.0, f"mc={mean:.6g} analytic={exact:.6g} (std errs)")


def check_quadrature(params, alloc) -> Check:
    exact = expected_snr(params, alloc)
    rel = abs(expected_snr_quadrature(params, alloc) / exact - 1.0)
    return Check("expected_snr_vs_quadrature", rel <= 1e-6, rel, 1e-6, "(relative)")


def check_jensen(params, alloc) -> Check:
    gap = jensen_gap(params, alloc)
    bound = jensen_gap_bound(params, alloc)
    return Check("jensen_gap_bound", gap <= bound, gap, bound, f"surrogate={surrogate_snr(params, alloc):.6g}")


def check_markov(params, alloc, s_grid) -> Check:
    mean = expected_snr(params, alloc)
    worst = -math.inf
    for s in s_grid:
        rhs = s * (1.0 - outage_block(params, alloc, s)) ** (1.0 / params.T)
        worst = max(worst, rhs / mean)
    return Check("markov_bound", worst <= 1.0, worst, 1.0, "(max s P(snr>=s) / E{snr})")


def check_sap_independence(params, alloc, s, trials, seed) -> Check:
    ests = []
    for k, n in enumerate(SAP_N_VALUES):
        q = replace(params, N=max(n, params.T))
        ests.append(estimate_outage(q, alloc, s, trials, sub_seed(seed, 100 + k), mode="random_sap"))
    # Intervals overlap pairwise iff max(low) <= min(high).
    sep = max(e.ci99_low for e in ests) - min(e.ci99_high for e in ests)
    detail = " ".join(f"N={n}:{e.p_hat:.6g}" for n, e in zip(SAP_N_VALUES, ests))
    return Check("sap_and_n_independence", sep <= 0.0, sep, 0.0, detail + " (ci99 separation)")


def run_validation(
    params: SystemParams,
    alloc: PowerAllocation,
    s: float,
    trials: int,
    seed: int,
    phi_scale: float = 1.0,
) -> list[Check]:
    """The full analytic-vs-empirical battery at one operating point.

    ``phi_scale`` multiplies the analytic subcarrier outage in the Monte Carlo
    comparison only; values other than 1 exist to prove the check can fail.
    """
    s_grid = s * np.logspace(-2, 2, 41)
    return [
        check_mc_outage(params, alloc, s, trials, sub_seed(seed, 1), phi_scale),
        check_mean_snr(params, alloc, trials, sub_seed(seed, 2)),
        check_quadrature(params, alloc),
        check_jensen(params, alloc),
        check_markov(params, alloc, s_grid),
        check_sap_independence(params, alloc, s, trials, seed),
    ]
