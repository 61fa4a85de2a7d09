"""Trial-level simulation of block outage and mean end-to-end SNR.

Trials run in batches of BATCH_SIZE. Batch ``b`` draws from its own
substreams keyed on (seed, b), so serial and threaded runs give identical
counts, and a run with fewer trials sees a prefix of the same channels.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .sysmodel import (
    PowerAllocation,
    SapCodec,
    SystemParams,
    exponential_gains,
    sample_channels,
    snr_end_to_end,
    substream,
)

BATCH_SIZE = 10_000
DEFAULT_TRIALS = 1_000_000
SAP_MODES = ("fixed_sap", "random_sap")
Z99 = NormalDist().inv_cdf(0.995)
# Below this many expected events the normal interval under-covers.
WILSON_BELOW = 10

_SAP_KEY = 3
_MEAN_SNR_KEY = 7


@dataclass(frozen=True)
class OutageEstimate:
    p_hat: float
    trials: int
    outages: int
    std_err: float
    ci99_low: float
    ci99_high: float
    seed: int
    interval: str = "normal"


def _interval(k: int, n: int, z: float = Z99) -> tuple[float, float, str]:
    p = k / n
    if p * n < WILSON_BELOW:
        den = 1 + z * z / n
        centre = (p + z * z / (2 * n)) / den
        half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
        # centre - half is exactly 0 at k = 0 in exact arithmetic; pin it
        low = 0.0 if k == 0 else max(0.0, centre - half)
        high = 1.0 if k == n else min(1.0, centre + half)
        return low, high, "wilson"
    half = z * math.sqrt(p * (1 - p) / n)
    return max(0.0, p - half), min(1.0, p + half), "normal"


def make_estimate(outages: int, trials: int, seed: int) -> OutageEstimate:
    p = outages / trials
    lo, hi, kind = _interval(outages, trials)
    return OutageEstimate(p, trials, outages, math.sqrt(p * (1 - p) / trials), lo, hi, seed, kind)


def _batches(trials: int):
    full, rest = divmod(trials, BATCH_SIZE)
    sizes = [BATCH_SIZE] * full + ([rest] if rest else [])
    return list(enumerate(sizes))


def _outage_batch(params, alloc, s, seed, batch, size, mode, table):
    draw = sample_channels(params, seed, size, stream=batch)
    if mode == "fixed_sap":
        g1 = draw.g1[:, : params.T]
        g2 = draw.g2[:, : params.T]
    else:
        idx = substream(seed, batch, _SAP_KEY).integers(0, table.shape[0], size)
        active = table[idx]
        g1 = np.take_along_axis(draw.g1, active, axis=1)
        g2 = np.take_along_axis(draw.g2, active, axis=1)
    snr = snr_end_to_end(params, alloc, g1, g2)
    return int(np.count_nonzero((snr < s).any(axis=1)))


def estimate_outage(
    params: SystemParams,
    alloc: PowerAllocation,
    s: float,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    mode: str = "fixed_sap",
    workers: int = 1,
) -> OutageEstimate:
    """Fraction of trials in which any active subcarrier's SNR falls below ``s``.

    ``fixed_sap`` always activates subcarriers 1..T (codebook index 0);
    ``random_sap`` draws a codebook index uniformly per trial.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if mode not in SAP_MODES:
        raise ValueError(f"mode must be one of {SAP_MODES}, got {mode!r}")
    table = SapCodec.for_params(params).table() if mode == "random_sap" else None

    def run(item):
        b, size = item
        return _outage_batch(params, alloc, s, seed, b, size, mode, table)

    batches = _batches(trials)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            outages = sum(pool.map(run, batches))
    else:
        outages = sum(map(run, batches))
    return make_estimate(outages, trials, seed)


def estimate_mean_snr(
    params: SystemParams, alloc: PowerAllocation, trials: int = DEFAULT_TRIALS, seed: int = 0
) -> tuple[float, float]:
    """Sample mean and standard error of one subcarrier's end-to-end SNR."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    total = 0.0
    total_sq = 0.0
    for b, size in _batches(trials):
        g1 = exponential_gains(substream(seed, b, _MEAN_SNR_KEY, 1), params.mu1, size)
        g2 = exponential_gains(substream(seed, b, _MEAN_SNR_KEY, 2), params.mu2, size)
        snr = snr_end_to_end(params, alloc, g1, g2)
        total += float(snr.sum())
        total_sq += float(np.dot(snr, snr))
    mean = total / trials
    if trials == 1:
        return mean, float("inf")
    var = max(total_sq / trials - mean * mean, 0.0) * trials / (trials - 1)
    return mean, math.sqrt(var / trials)
