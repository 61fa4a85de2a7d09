"""Power allocation: the iterative KKT solver, a brute-force grid oracle and an
equal-power baseline, plus the iteration/evaluation-count benchmark."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .outage import (
    ReliabilityTarget,
    gamma_threshold,
    jensen_gap,
    jensen_gap_bound,
    outage_block,
    outage_block_arrays,
    surrogate_snr,
)
from .sysmodel import PowerAllocation, Provenance, SystemParams, dbw_to_w, w_to_dbw

GAP_MODES = ("exact", "bound")
ORACLE_MODES = ("naive", "refined")

# Span of the oracle's dBW box below the power ceiling.
ORACLE_SPAN_DB = 120.0
REFINE_STAGES = 3
REFINE_FACTOR = 10
NAIVE_CHUNK = 1_000_000


@dataclass(frozen=True)
class SolverConfig:
    """Iteration controls for :func:`solve_proposed`.

    ``gap`` selects the correction added to the SNR threshold each iteration:
    ``"exact"`` uses surrogate_snr - E{gamma}, ``"bound"`` uses the curvature
    bound on that gap.
    """

    epsilon: float = 1e-4
    max_iterations: int = 10_000
    gap: str = "exact"

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.gap not in GAP_MODES:
            raise ValueError(f"gap must be one of {GAP_MODES}, got {self.gap!r}")


@dataclass
class AllocationResult:
    alloc: PowerAllocation
    iterations: int
    achieved_outage: float
    feasible: bool
    converged: bool = True
    gamma_th: Optional[float] = None
    gamma_tilde_th: Optional[float] = None
    delta: Optional[float] = None
    rho: Optional[float] = None
    evaluations: int = 0
    extras: dict = field(default_factory=dict)

    @property
    def total_power_w(self) -> float:
        return self.alloc.pt + self.alloc.pr

    @property
    def total_dbw(self) -> float:
        return w_to_dbw(self.total_power_w)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["alloc"] = {
            "pt": self.alloc.pt,
            "pr": self.alloc.pr,
            "provenance": self.alloc.provenance.value,
        }
        d["pt"] = self.alloc.pt
        d["pr"] = self.alloc.pr
        d["pt_dbw"] = w_to_dbw(self.alloc.pt)
        d["pr_dbw"] = w_to_dbw(self.alloc.pr)
        d["total_power_w"] = self.total_power_w
        d["total_dbw"] = self.total_dbw
        d["provenance"] = self.alloc.provenance.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AllocationResult":
        a = d["alloc"]
        alloc = PowerAllocation(a["pt"], a["pr"], Provenance(a["provenance"]))
        names = {f for f in cls.__dataclass_fields__} - {"alloc"}
        return cls(alloc=alloc, **{k: d[k] for k in names if k in d})


def clamp(x: float, lower: float, upper: float) -> float:
    """Project onto [lower, upper]; a value equal to ``upper`` maps to ``upper``."""
    if not upper > lower:
        raise ValueError(f"need upper > lower, got [{lower}, {upper}]")
    if x >= upper:
        return upper
    if x >= lower:
        return x
    return lower


def kkt_multiplier(params: SystemParams, gamma_tilde_th: float) -> float:
    return params.T / params.mu1 * (
        params.eta1 + math.sqrt(params.mu1 * params.eta2 / (params.mu2 * gamma_tilde_th))
    )


def kkt_unclamped(params: SystemParams, gamma_tilde_th: float) -> tuple[float, float, float]:
    """Stationary point of P_t + P_r on the curve surrogate_snr = gamma_tilde_th."""
    if not gamma_tilde_th > 0:
        raise ValueError(f"gamma_tilde_th must be positive, got {gamma_tilde_th}")
    T, mu1, mu2, eta2 = params.T, params.mu1, params.mu2, params.eta2
    rho = kkt_multiplier(params, gamma_tilde_th)
    # rho mu1 - T eta1 = T sqrt(mu1 eta2 / (mu2 g)); form it directly.
    excess = T * math.sqrt(mu1 * eta2 / (mu2 * gamma_tilde_th))
    pt = rho * T * T * mu1 * eta2 / (mu2 * excess * excess)
    pr = T * T * eta2 / (mu2 * excess)
    return pt, pr, rho


def kkt_closed_form(params: SystemParams, gamma_tilde_th: float) -> tuple[float, float, float]:
    """Closed-form (P_t, P_r, rho) clamped to the power box."""
    pt, pr, rho = kkt_unclamped(params, gamma_tilde_th)
    return clamp(pt, 0.0, params.pt_max), clamp(pr, 0.0, params.pr_max), rho


def _surrogate_slack(params: SystemParams, pt: float, pr: float, eps: float, level: float) -> float:
    # |d gamma~/d Pt| + |d gamma~/d Pr| times eps, plus a relative floor.
    T, mu1, mu2, eta1, eta2 = params.T, params.mu1, params.mu2, params.eta1, params.eta2
    den = T * pr * mu2 * eta1 + T * T * eta2
    d_pt = pr * mu1 * mu2 / den
    d_pr = pt * mu1 * mu2 * T * T * eta2 / den**2
    return eps * (d_pt + d_pr) + 1e-9 * level


def solve_proposed(
    params: SystemParams, target: ReliabilityTarget, cfg: SolverConfig = SolverConfig()
) -> AllocationResult:
    """Iterate the closed-form KKT pair with a gap-corrected SNR threshold.

    Starts from P_t = P_r = 0 and stops once both powers move by less than
    ``cfg.epsilon`` watts, keeping the pre-update pair.
    """
    gamma_th = gamma_threshold(params, target)
    gap_fn = jensen_gap if cfg.gap == "exact" else jensen_gap_bound
    pt = pr = 0.0
    converged = False
    delta = gamma_tilde = rho = float("nan")
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        delta = gap_fn(params, PowerAllocation(pt, pr))
        gamma_tilde = gamma_th + delta
        pt_new, pr_new, rho = kkt_closed_form(params, gamma_tilde)
        if abs(pt - pt_new) < cfg.epsilon and abs(pr - pr_new) < cfg.epsilon:
            converged = True
            break
        pt, pr = pt_new, pr_new

    alloc = PowerAllocation(pt, pr, Provenance.PROPOSED)
    achieved = outage_block(params, alloc, target.s) if pt > 0 and pr > 0 else 1.0
    slack = _surrogate_slack(params, pt, pr, cfg.epsilon, gamma_tilde)
    feasible = surrogate_snr(params, alloc) >= gamma_tilde - slack
    return AllocationResult(
        alloc=alloc,
        iterations=it,
        achieved_outage=achieved,
        feasible=bool(feasible),
        converged=converged,
        gamma_th=gamma_th,
        gamma_tilde_th=gamma_tilde,
        delta=delta,
        rho=rho,
        evaluations=it,
    )


# ---------------------------------------------------------------- oracle


@dataclass(frozen=True)
class GridAxis:
    """dBW grid hi, hi - step, ..., anchored at the power ceiling."""

    hi: float
    step: float
    count: int

    @classmethod
    def spanning(cls, hi: float, lo: float, step: float) -> "GridAxis":
        return cls(hi, step, int(math.floor((hi - lo) / step + 1e-9)) + 1)

    def dbw(self, j):
        return self.hi - np.asarray(j) * self.step


def grid_cardinality(params: SystemParams, step_dbw: float, span_db: float = ORACLE_SPAN_DB) -> int:
    """Number of points the naive oracle evaluates at ``step_dbw``."""
    ax_t = GridAxis.spanning(w_to_dbw(params.pt_max), w_to_dbw(params.pt_max) - span_db, step_dbw)
    ax_r = GridAxis.spanning(w_to_dbw(params.pr_max), w_to_dbw(params.pr_max) - span_db, step_dbw)
    return ax_t.count * ax_r.count


def _best_index(pt_w, pr_w):
    # Minimum total; ties to smaller pt, then smaller pr.
    order = np.lexsort((pr_w, pt_w, pt_w + pr_w))
    return order[0]


def _oracle_result(params, target, pt, pr, feasible, evaluations, extras):
    alloc = PowerAllocation(float(pt), float(pr), Provenance.ORACLE)
    return AllocationResult(
        alloc=alloc,
        iterations=extras.get("stages", 1),
        achieved_outage=outage_block(params, alloc, target.s),
        feasible=feasible,
        gamma_th=gamma_threshold(params, target),
        evaluations=evaluations,
        extras=extras,
    )


def _naive(params, target, ax_t: GridAxis, ax_r: GridAxis):
    pt_all = dbw_to_w(ax_t.dbw(np.arange(ax_t.count)))
    pr_all = dbw_to_w(ax_r.dbw(np.arange(ax_r.count)))
    rows_per_chunk = max(1, NAIVE_CHUNK // ax_t.count)
    best = None
    evaluations = 0
    for r0 in range(0, ax_r.count, rows_per_chunk):
        pr = pr_all[r0 : r0 + rows_per_chunk, None]
        po = outage_block_arrays(params, pt_all[None, :], pr, target.s)
        evaluations += po.size
        ok = po <= target.psi_th
        if not ok.any():
            continue
        ri, ti = np.nonzero(ok)
        cand_t, cand_r = pt_all[ti], pr_all[r0 + ri]
        k = _best_index(cand_t, cand_r)
        cand = (cand_t[k] + cand_r[k], cand_t[k], cand_r[k])
        if best is None or _best_index(np.array([best[1], cand[1]]), np.array([best[2], cand[2]])) == 1:
            best = cand
    return best, evaluations


def _min_feasible_pt(params, target, ax_t: GridAxis, pr_w: np.ndarray):
    """Per pr row, largest grid index j (smallest pt) that meets the ceiling.

    Outage is strictly decreasing in pt, so a bisection over j per row finds
    the same point an exhaustive scan of the row would. Returns (j, evals);
    j = -1 where even j = 0 (pt_max) fails.
    """
    n = pr_w.size
    lo = np.full(n, -1, dtype=np.int64)            # feasible (or sentinel)
    hi = np.full(n, ax_t.count, dtype=np.int64)    # infeasible sentinel
    evals = 0
    # Check pt_max first so rows with no feasible point end with lo = -1.
    po = outage_block_arrays(params, dbw_to_w(ax_t.dbw(0)), pr_w, target.s)
    evals += n
    ok0 = po <= target.psi_th
    lo[ok0] = 0
    hi[~ok0] = 0
    while True:
        active = hi - lo > 1
        if not active.any():
            break
        mid = (lo + hi) // 2
        idx = np.nonzero(active)[0]
        po = outage_block_arrays(params, dbw_to_w(ax_t.dbw(mid[idx])), pr_w[idx], target.s)
        evals += idx.size
        ok = po <= target.psi_th
        lo[idx[ok]] = mid[idx[ok]]
        hi[idx[~ok]] = mid[idx[~ok]]
    return lo, evals


def _pruned_band(pt_lower, pr_w, best, pr_floor):
    """dBW range of pr that can still hold a point with total <= ``best``.

    Rows are in grid order (pr descending). Between rows i and i+1 every
    finer point has pt >= pt_lower[i] (min feasible pt is nonincreasing in
    pr) and pr >= pr_w[i+1], which bounds its total from below. Below the
    last row the gap runs down to ``pr_floor``.
    """
    pr_below = np.append(pr_w[1:], pr_floor)
    keep_row = pt_lower + pr_w <= best
    keep_gap = pt_lower + pr_below <= best
    top = max(pr_w[keep_row | keep_gap])
    bottom = min(np.append(pr_w[keep_row], pr_below[keep_gap]))
    return float(w_to_dbw(bottom)), float(w_to_dbw(top))


def _refined(params, target, step_dbw, lo_t, lo_r, stages=REFINE_STAGES):
    hi_t, hi_r = w_to_dbw(params.pt_max), w_to_dbw(params.pr_max)
    evaluations = 0
    band = None
    best = None
    for k in range(stages - 1, -1, -1):
        h = step_dbw * REFINE_FACTOR**k
        ax_t = GridAxis.spanning(hi_t, lo_t, h)
        ax_r = GridAxis.spanning(hi_r, lo_r, h)
        if band is None:
            rows = np.arange(ax_r.count)
        else:
            first = max(0, math.floor((hi_r - band[1]) / h - 1e-9))
            last = min(ax_r.count - 1, math.ceil((hi_r - band[0]) / h + 1e-9))
            rows = np.arange(first, last + 1)
        pr_w = dbw_to_w(ax_r.dbw(rows))
        j, ev = _min_feasible_pt(params, target, ax_t, pr_w)
        evaluations += ev
        good = j >= 0
        if not good.any():
            return None, evaluations
        pt_w = dbw_to_w(ax_t.dbw(j[good]))
        i = _best_index(pt_w, pr_w[good])
        best = (pt_w[i] + pr_w[good][i], pt_w[i], pr_w[good][i])
        if k > 0:
            # The next grid still contains this stage's points, so any point
            # it could prefer lies where the lower bound does not exceed best.
            below = np.minimum(j + 1, ax_t.count - 1)
            pt_lower = np.where(good, dbw_to_w(ax_t.dbw(below)), np.inf)
            # A windowed stage already ends at or below the previous band.
            floor = dbw_to_w(lo_r) if band is None else pr_w[-1]
            band = _pruned_band(pt_lower, pr_w, best[0], floor)
    return best, evaluations


def oracle_grid_search(
    params: SystemParams,
    target: ReliabilityTarget,
    step_dbw: float = 1e-4,
    mode: str = "refined",
    span_db: float = ORACLE_SPAN_DB,
) -> AllocationResult:
    """Minimise P_t + P_r over a dBW grid under the exact block-outage constraint.

    Both axes run from the power ceiling down ``span_db`` dB in ``step_dbw``
    steps. ``naive`` evaluates every grid point. ``refined`` runs
    REFINE_STAGES nested grids, each REFINE_FACTOR times finer and centred on
    the previous optimum. A box with no feasible point gives ``feasible=False``
    with the box corner as the allocation.
    """
    if not step_dbw > 0:
        raise ValueError(f"step_dbw must be positive, got {step_dbw}")
    if mode not in ORACLE_MODES:
        raise ValueError(f"mode must be one of {ORACLE_MODES}, got {mode!r}")
    hi_t, hi_r = w_to_dbw(params.pt_max), w_to_dbw(params.pr_max)
    lo_t, lo_r = hi_t - span_db, hi_r - span_db
    extras = {"mode": mode, "step_dbw": step_dbw}
    if mode == "naive":
        ax_t = GridAxis.spanning(hi_t, lo_t, step_dbw)
        ax_r = GridAxis.spanning(hi_r, lo_r, step_dbw)
        best, evaluations = _naive(params, target, ax_t, ax_r)
        extras["grid_cardinality"] = ax_t.count * ax_r.count
    else:
        best, evaluations = _refined(params, target, step_dbw, lo_t, lo_r)
        extras["stages"] = REFINE_STAGES
    if best is None:
        return _oracle_result(params, target, params.pt_max, params.pr_max, False, evaluations, extras)
    return _oracle_result(params, target, best[1], best[2], True, evaluations, extras)


# -------------------------------------------------------------- baseline


def solve_baseline(
    params: SystemParams, target: ReliabilityTarget, rtol: float = 1e-10
) -> AllocationResult:
    """Equal source and relay power, the smallest that meets the outage ceiling.

    Bisection on log-power against the exact block outage; the returned power
    is the feasible end of the final bracket.
    """
    p_max = min(params.pt_max, params.pr_max)
    evaluations = 0

    def po(p):
        nonlocal evaluations
        evaluations += 1
        return outage_block(params, PowerAllocation(p, p), target.s)

    if po(p_max) > target.psi_th:
        alloc = PowerAllocation(p_max, p_max, Provenance.BASELINE)
        return AllocationResult(alloc, 0, outage_block(params, alloc, target.s), False,
                                gamma_th=gamma_threshold(params, target), evaluations=evaluations)
    lo, hi = math.log(p_max) - 80.0, math.log(p_max)
    iterations = 0
    while hi - lo > rtol:
        mid = 0.5 * (lo + hi)
        if po(math.exp(mid)) <= target.psi_th:
            hi = mid
        else:
            lo = mid
        iterations += 1
    p = math.exp(hi)
    alloc = PowerAllocation(p, p, Provenance.BASELINE)
    return AllocationResult(alloc, iterations, outage_block(params, alloc, target.s), True,
                            gamma_th=gamma_threshold(params, target), evaluations=evaluations)


# ------------------------------------------------------------- benchmark


@dataclass
class BenchRow:
    epsilon: float
    iterations_proposed: int
    evaluations_naive_oracle: Optional[int]
    grid_cardinality: int
    evaluations_baseline: int
    seconds_proposed: float
    seconds_naive_oracle: Optional[float]


def benchmark_complexity(
    params: SystemParams,
    target: ReliabilityTarget,
    epsilons,
    max_naive_points: int = 2_000_000,
    span_db: float = ORACLE_SPAN_DB,
) -> list[BenchRow]:
    """Measured cost of each solver per precision ``epsilon``.

    ``epsilon`` is the proposed solver's tolerance in watts and the naive
    oracle's step in dBW. The naive oracle only runs where its grid has at
    most ``max_naive_points`` points; otherwise its column is None.
    """
    epsilons = list(epsilons)
    if not epsilons:
        raise ValueError("need at least one epsilon")
    if any(e <= 0 for e in epsilons):
        raise ValueError("epsilons must be positive")
    base = solve_baseline(params, target)
    rows = []
    for eps in epsilons:
        t0 = time.perf_counter()
        prop = solve_proposed(params, target, SolverConfig(epsilon=eps))
        t_prop = time.perf_counter() - t0
        card = grid_cardinality(params, eps, span_db)
        n_eval = t_naive = None
        if card <= max_naive_points:
            t0 = time.perf_counter()
            n_eval = oracle_grid_search(params, target, eps, "naive", span_db).evaluations
            t_naive = time.perf_counter() - t0
        rows.append(BenchRow(eps, prop.iterations, n_eval, card, base.evaluations, t_prop, t_naive))
    return rows


def fit_log_scaling(epsilons, counts) -> tuple[float, float, float]:
    """Least-squares fit counts ~ c0 + c1 ln(1/eps). Returns (c0, c1, R^2)."""
    x = np.log(1.0 / np.asarray(epsilons, dtype=float))
    y = np.asarray(counts, dtype=float)
    c1, c0 = np.polyfit(x, y, 1)
    resid = y - (c0 + c1 * x)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(c0), float(c1), r2


def fit_power_exponent(epsilons, counts) -> float:
    """Slope of ln(counts) against ln(1/eps)."""
    x = np.log(1.0 / np.asarray(epsilons, dtype=float))
    y = np.log(np.asarray(counts, dtype=float))
    return float(np.polyfit(x, y, 1)[0])
