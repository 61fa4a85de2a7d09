"""Energy-minimal power allocation for fixed-gain AF relayed OFDM-IM links."""

from .optimizer import (
    AllocationResult,
    SolverConfig,
    benchmark_complexity,
    clamp,
    kkt_closed_form,
    oracle_grid_search,
    solve_baseline,
    solve_proposed,
)
from .outage import (
    ReliabilityTarget,
    expected_snr,
    gamma_threshold,
    jensen_gap,
    jensen_gap_bound,
    outage_asymptotic,
    outage_block,
    phi_subcarrier,
    surrogate_snr,
)
from .sysmodel import PowerAllocation, Provenance, SapCodec, SystemParams, dbw_to_w, w_to_dbw

__all__ = [
    "AllocationResult", "PowerAllocation", "Provenance", "ReliabilityTarget", "SapCodec",
    "SolverConfig", "SystemParams", "benchmark_complexity", "clamp", "dbw_to_w",
    "expected_snr", "gamma_threshold", "jensen_gap", "jensen_gap_bound", "kkt_closed_form",
    "oracle_grid_search", "outage_asymptotic", "outage_block", "phi_subcarrier",
    "solve_baseline", "solve_proposed", "surrogate_snr", "w_to_dbw",
]
