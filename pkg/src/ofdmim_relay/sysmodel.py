"""Link description, SAP bit accounting and per-subcarrier end-to-end SNR."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from itertools import combinations

import numpy as np

def dbw_to_w(dbw):
    out = 10.0 ** (np.asarray(dbw, dtype=float) / 10.0)
    return float(out) if out.ndim == 0 else out


def w_to_dbw(w):
    with np.errstate(divide="ignore"):
        out = 10.0 * np.log10(np.asarray(w, dtype=float))
    return float(out) if out.ndim == 0 else out



@dataclass(frozen=True)
class SystemParams:
    """Static link statistics and hardware limits. Powers in watts."""

    T: int = 4
    N: int = 8
    M: int = 4
    eta1: float = 1.3
    eta2: float = 1.1
    mu1: float = 1.3
    mu2: float = 1.5
    pt_max: float = 1e10
    pr_max: float = 1e10

    def __post_init__(self):
        if not (isinstance(self.T, (int, np.integer)) and isinstance(self.N, (int, np.integer))):
            raise ValueError("T and N must be integers")
        if not 1 <= self.T <= self.N:
            raise ValueError(f"need 1 <= T <= N, got T={self.T}, N={self.N}")
        if self.M < 2 or self.M & (self.M - 1):
            raise ValueError(f"M must be a power of two >= 2, got {self.M}")
        for name in ("eta1", "eta2", "mu1", "mu2", "pt_max", "pr_max"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v}")


class Provenance(str, Enum):
    PROPOSED = "proposed"
    ORACLE = "oracle"
    BASELINE = "baseline"


@dataclass(frozen=True)
class PowerAllocation:
    pt: float
    pr: float
    provenance: Provenance = Provenance.PROPOSED

    def __post_init__(self):
        if self.pt < 0 or self.pr < 0:
            raise ValueError(f"powers must be nonnegative, got pt={self.pt}, pr={self.pr}")

    @property
    def total(self) -> float:
        return self.pt + self.pr

    def within(self, params: SystemParams) -> bool:
        return self.pt <= params.pt_max and self.pr <= params.pr_max


@dataclass(frozen=True)
class ChannelDraw:
    """Per-subcarrier channel power gains for both hops, shape (..., N)."""

    g1: np.ndarray
    g2: np.ndarray


def snr_end_to_end(params: SystemParams, alloc: PowerAllocation, g1, g2):
    """Instantaneous end-to-end SNR of one active subcarrier (fixed-gain AF).

    ``g1`` and ``g2`` may be arrays; broadcasting applies.
    """
    T = params.T
    pt, pr = alloc.pt, alloc.pr
    num = pt * pr * np.asarray(g1) * np.asarray(g2)
    den = T * pr * np.asarray(g2) * params.eta1 + T * T * params.eta2
    out = num / den
    return float(out) if np.ndim(out) == 0 else out


def substream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for (seed, *keys); same inputs give the same stream."""
    return np.random.default_rng(np.random.SeedSequence([seed & (2**64 - 1), *keys]))


def exponential_gains(rng: np.random.Generator, mean: float, shape) -> np.ndarray:
    # Inverse CDF of F(x) = 1 - exp(-x / mean); 1 - U avoids log(0).
    u = rng.random(shape)
    return -mean * np.log1p(-u)


def sample_channels(params: SystemParams, rng_seed: int, count: int, *, stream: int = 0) -> ChannelDraw:
    """Draw ``count`` independent channel realisations over all N subcarriers.

    Returns a single ChannelDraw whose arrays have shape (count, N). The
    output is a pure function of (rng_seed, stream, count). Each hop has its
    own substream, so a smaller ``count`` yields a prefix of a larger one.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    g1 = exponential_gains(substream(rng_seed, stream, 1), params.mu1, (count, params.N))
    g2 = exponential_gains(substream(rng_seed, stream, 2), params.mu2, (count, params.N))
    return ChannelDraw(g1=g1, g2=g2)


@dataclass(frozen=True)
class SapCodec:
    """Index-bit mapping between integers and active-subcarrier subsets.

    Uses lexicographic combinadic ranking restricted to the first ``2**b_s``
    t-subsets of {1..n}.
    """

    n: int
    t: int
    M: int = 4

    def __post_init__(self):
        if not 1 <= self.t <= self.n:
            raise ValueError(f"need 1 <= t <= n, got n={self.n}, t={self.t}")

    @property
    def b_s(self) -> int:
        return math.comb(self.n, self.t).bit_length() - 1

    @property
    def b_m(self) -> int:
        return self.t * int(math.log2(self.M))

    @property
    def b(self) -> int:
        return self.b_s + self.b_m

    @property
    def patterns(self) -> int:
        return 1 << self.b_s

    @classmethod
    def for_params(cls, params: SystemParams) -> "SapCodec":
        return cls(params.N, params.T, params.M)

    def table(self) -> np.ndarray:
        """All codebook subsets as a (2**b_s, t) array of 0-based positions."""
        rows = []
        for i, combo in enumerate(combinations(range(self.n), self.t)):
            if i >= self.patterns:
                break
            rows.append(combo)
        return np.asarray(rows, dtype=np.intp)


def sap_encode(codec: SapCodec, index: int) -> frozenset:
    """Map an index in [0, 2**b_s) to its set of 1-based active positions."""
    if not 0 <= index < codec.patterns:
        raise ValueError(f"index {index} outside [0, {codec.patterns})")
    # Lexicographic unranking: pick each position by skipping whole blocks.
    out = []
    rank = index
    start = 0
    for slot in range(codec.t, 0, -1):
        pos = start
        while True:
            block = math.comb(codec.n - pos - 1, slot - 1)
            if rank < block:
                break
            rank -= block
            pos += 1
        out.append(pos + 1)
        start = pos + 1
    return frozenset(out)


def sap_decode(codec: SapCodec, positions) -> int:
    """Inverse of :func:`sap_encode`."""
    pos = sorted(positions)
    if len(pos) != codec.t or len(set(pos)) != codec.t or pos[0] < 1 or pos[-1] > codec.n:
        raise ValueError(f"not a valid {codec.t}-subset of 1..{codec.n}: {positions}")
    rank = 0
    prev = 0
    for i, p in enumerate(pos):
        remaining = codec.t - i
        for q in range(prev + 1, p):
            rank += math.comb(codec.n - q, remaining - 1)
        prev = p
    if rank >= codec.patterns:
        raise ValueError(f"subset {sorted(positions)} is not in the codebook")
    return rank
