"""Closed-form outage, mean-SNR and threshold analytics for the FG AF link.

Functions take a SystemParams plus a PowerAllocation. Where it is cheap they
also accept array-valued ``s``. The oracle grid search instead calls the
``*_arrays`` variants with raw power arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .specfun import e1_cf_tail, expx_e1, x_times_k1
from .sysmodel import PowerAllocation, SystemParams, snr_end_to_end


@dataclass(frozen=True)
class ReliabilityTarget:
    """Outage threshold ``s`` (linear SNR) and probability ceiling ``psi_th``."""

    s: float
    psi_th: float

    def __post_init__(self):
        if not (math.isfinite(self.s) and self.s > 0):
            raise ValueError(f"s must be positive, got {self.s}")
        if not 0 < self.psi_th < 1:
            raise ValueError(f"psi_th must be in (0, 1), got {self.psi_th}")


@dataclass(frozen=True)
class OutageShape:
    """Shorthands ``a`` and ``b`` with P_o(s) = 1 - (a sqrt(s) e^{-bs} K1(a sqrt(s)))^T."""

    a: float
    b: float

    @classmethod
    def from_alloc(cls, params: SystemParams, alloc: PowerAllocation) -> "OutageShape":
        _check_positive(alloc)
        T = params.T
        a = 2 * T * math.sqrt(params.eta2 / (alloc.pt * alloc.pr * params.mu1 * params.mu2))
        b = T * params.eta1 / (alloc.pt * params.mu1)
        return cls(a, b)


def _check_positive(alloc: PowerAllocation):
    if not (alloc.pt > 0 and alloc.pr > 0):
        raise ValueError(f"powers must be positive, got pt={alloc.pt}, pr={alloc.pr}")


def phi_arrays(params: SystemParams, pt, pr, s):
    """Subcarrier outage probability for broadcastable arrays of pt, pr, s."""
    pt = np.asarray(pt, dtype=float)
    pr = np.asarray(pr, dtype=float)
    s = np.asarray(s, dtype=float)
    T = params.T
    z = 2 * T * np.sqrt(s * params.eta2 / (params.mu1 * params.mu2 * pt * pr))
    survive = np.exp(-s * T * params.eta1 / (params.mu1 * pt)) * x_times_k1(z)
    # 1 - survive loses everything below ~1e-16; use -expm1(log(.)) instead.
    with np.errstate(divide="ignore"):
        return -np.expm1(np.log(survive))


def outage_block_arrays(params: SystemParams, pt, pr, s):
    phi = phi_arrays(params, pt, pr, s)
    with np.errstate(divide="ignore"):
        return -np.expm1(params.T * np.log1p(-phi))


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def phi_subcarrier(params: SystemParams, alloc: PowerAllocation, s):
    """Probability that one active subcarrier's end-to-end SNR falls below ``s``."""
    _check_positive(alloc)
    if np.any(np.asarray(s) <= 0):
        raise ValueError("s must be positive")
    return _scalar(phi_arrays(params, alloc.pt, alloc.pr, s))


def outage_block(params: SystemParams, alloc: PowerAllocation, s):
    """Block outage probability 1 - (1 - Phi(s))^T.

    Independent of N and of which SAP is active.
    """
    _check_positive(alloc)
    if np.any(np.asarray(s) <= 0):
        raise ValueError("s must be positive")
    return _scalar(outage_block_arrays(params, alloc.pt, alloc.pr, s))


def expected_snr_arrays(params: SystemParams, pt, pr):
    pt = np.asarray(pt, dtype=float)
    pr = np.asarray(pr, dtype=float)
    T = params.T
    c = T * params.eta2 / (params.eta1 * params.mu2 * pr)
    mean_first_hop = params.mu1 * pt / (T * params.eta1)
    # 1 - c e^c E1(c) == e^c E1(c) * (1 - tau(c))
    return mean_first_hop * expx_e1(c) * (1.0 - e1_cf_tail(c))


def expected_snr(params: SystemParams, alloc: PowerAllocation) -> float:
    """Mean per-subcarrier end-to-end SNR over Rayleigh fading on both hops.

    E{gamma} = mu1 Pt/(T eta1) * (1 - c e^c E1(c)),  c = T eta2 / (eta1 mu2 Pr).
    """
    _check_positive(alloc)
    return float(expected_snr_arrays(params, alloc.pt, alloc.pr))


def surrogate_snr(params: SystemParams, alloc: PowerAllocation) -> float:
    """End-to-end SNR with both channel gains replaced by their means."""
    return snr_end_to_end(params, alloc, params.mu1, params.mu2)


def gamma_threshold(params: SystemParams, target: ReliabilityTarget) -> float:
    """Mean-SNR threshold sT / ln(1/(1 - psi_th)) standing in for the outage ceiling."""
    return target.s * params.T / -math.log1p(-target.psi_th)


def jensen_gap_bound(params: SystemParams, alloc: PowerAllocation) -> float:
    """Upper bound on |E{gamma} - surrogate_snr| from the curvature of the second hop."""
    T = params.T
    pt, pr = alloc.pt, alloc.pr
    den = T * pr * params.eta1 * params.mu2 + T * T * params.eta2
    return pt * pr * pr * T * params.eta1 * params.mu1 * params.mu2**2 / den**2


def jensen_gap(params: SystemParams, alloc: PowerAllocation) -> float:
    """Exact gap surrogate_snr - E{gamma} (nonnegative; zero when a power is zero).

    Evaluated as mu1 Pt/(T eta1) * c h tau / (1 + c) with h = e^c E1(c), so it
    stays accurate when the gap is many orders below E{gamma}.
    """
    if alloc.pt == 0 or alloc.pr == 0:
        return 0.0
    T = params.T
    c = T * params.eta2 / (params.eta1 * params.mu2 * alloc.pr)
    mean_first_hop = params.mu1 * alloc.pt / (T * params.eta1)
    return float(mean_first_hop * c * expx_e1(c) * e1_cf_tail(c) / (1.0 + c))


def outage_asymptotic(params: SystemParams, alloc: PowerAllocation, s):
    """High-power approximation 1 - exp(-b s T), exact as a sqrt(s) -> 0."""
    ab = OutageShape.from_alloc(params, alloc)
    return _scalar(-np.expm1(-ab.b * np.asarray(s, dtype=float) * params.T))


def expected_snr_lower_bound(params: SystemParams, alloc: PowerAllocation) -> float:
    # (1/b)(1 - x ln(1 + 1/x)), x = a^2 / 4b; only used by tests.
    ab = OutageShape.from_alloc(params, alloc)
    x = ab.a**2 / (4 * ab.b)
    return (1 - x * math.log1p(1 / x)) / ab.b
