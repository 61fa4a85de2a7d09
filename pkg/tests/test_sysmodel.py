import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ofdmim_relay.sysmodel import (
    PowerAllocation,
    SapCodec,
    SystemParams,
    dbw_to_w,
    sample_channels,
    sap_decode,
    sap_encode,
    snr_end_to_end,
    w_to_dbw,
)

pos = st.floats(min_value=1e-6, max_value=1e6)


def test_snr_examples(params):
    alloc = PowerAllocation(10.0, 10.0)
    assert snr_end_to_end(params, alloc, 1.0, 1.0) == pytest.approx(100 / 69.6, rel=1e-14)
    assert snr_end_to_end(params, alloc, 0.0, 1.0) == 0.0
    assert snr_end_to_end(params, PowerAllocation(0.0, 10.0), 1.0, 1.0) == 0.0
    assert snr_end_to_end(params, PowerAllocation(10.0, 0.0), 1.0, 1.0) == 0.0


def test_snr_large_relay_power_limit(params):
    v = snr_end_to_end(params, PowerAllocation(10.0, 1e14), 0.7, 1.2)
    assert v == pytest.approx(10.0 * 0.7 / (params.T * params.eta1), rel=1e-9)


def test_snr_broadcasts(params):
    g1 = np.full((3, 5), 0.5)
    g2 = np.full((3, 5), 2.0)
    out = snr_end_to_end(params, PowerAllocation(3.0, 4.0), g1, g2)
    assert out.shape == (3, 5)
    assert np.all(out == out[0, 0])


@given(pos, pos, pos, pos, st.floats(min_value=1.0, max_value=10.0))
def test_snr_nondecreasing_in_each_argument(pt, pr, g1, g2, k):
    p = SystemParams()
    base = snr_end_to_end(p, PowerAllocation(pt, pr), g1, g2)
    assert snr_end_to_end(p, PowerAllocation(pt * k, pr), g1, g2) >= base
    assert snr_end_to_end(p, PowerAllocation(pt, pr * k), g1, g2) >= base
    assert snr_end_to_end(p, PowerAllocation(pt, pr), g1 * k, g2) >= base
    assert snr_end_to_end(p, PowerAllocation(pt, pr), g1, g2 * k) >= base


def test_param_validation():
    with pytest.raises(ValueError):
        SystemParams(T=9, N=8)
    with pytest.raises(ValueError):
        SystemParams(M=3)
    with pytest.raises(ValueError):
        SystemParams(eta1=0.0)
    with pytest.raises(ValueError):
        SystemParams(pt_max=float("inf"))
    with pytest.raises(ValueError):
        PowerAllocation(-1.0, 1.0)


def test_channel_sample_mean_and_cdf(params):
    draw = sample_channels(params, 11, 125_000)  # 10^6 gains per hop
    g1 = draw.g1.ravel()
    assert g1.size == 1_000_000
    assert abs(g1.mean() - params.mu1) <= 4 * params.mu1 / 1e3
    p = 1 - math.exp(-1)
    frac = np.mean(g1 <= params.mu1)
    assert abs(frac - p) <= 3 * math.sqrt(p * (1 - p) / g1.size)
    assert abs(draw.g2.mean() - params.mu2) <= 4 * params.mu2 / 1e3


@pytest.mark.parametrize("hop", ["g1", "g2"])
def test_channel_ks_distance(params, hop):
    n = 100_000
    x = np.sort(getattr(sample_channels(params, 5, n // params.N), hop).ravel())
    mean = params.mu1 if hop == "g1" else params.mu2
    cdf = -np.expm1(-x / mean)
    i = np.arange(1, x.size + 1)
    d = max(np.max(i / x.size - cdf), np.max(cdf - (i - 1) / x.size))
    assert d < 1.628 / math.sqrt(x.size)


def test_channel_determinism_and_streams(params):
    a = sample_channels(params, 3, 100)
    b = sample_channels(params, 3, 100)
    assert np.array_equal(a.g1, b.g1) and np.array_equal(a.g2, b.g2)
    c = sample_channels(params, 3, 100, stream=1)
    assert not np.array_equal(a.g1, c.g1)
    assert not np.array_equal(a.g1, a.g2 * params.mu1 / params.mu2)
    assert a.g1.shape == (100, params.N)


def test_db_round_trip():
    x = np.linspace(-50, 120, 1001)
    assert np.allclose(w_to_dbw(dbw_to_w(x)), x, rtol=1e-12, atol=1e-12)
    assert dbw_to_w(100.0) == 1e10
    assert isinstance(w_to_dbw(10.0), float)


@pytest.mark.parametrize("n, t, b_s", [(4, 2, 2), (8, 4, 6), (16, 4, 10), (32, 4, 15), (5, 5, 0)])
def test_index_bits(n, t, b_s):
    codec = SapCodec(n, t, 4)
    assert codec.b_s == b_s
    assert codec.patterns == 2**b_s
    assert codec.b_m == 2 * t
    assert codec.b == b_s + 2 * t


@pytest.mark.parametrize("n", range(1, 10))
def test_sap_round_trip_exhaustive(n):
    for t in range(1, n + 1):
        codec = SapCodec(n, t)
        seen = set()
        for i in range(codec.patterns):
            s = sap_encode(codec, i)
            assert len(s) == t and min(s) >= 1 and max(s) <= n
            assert sap_decode(codec, s) == i
            seen.add(s)
        assert len(seen) == codec.patterns


def test_sap_matches_lexicographic_table():
    codec = SapCodec(8, 4)
    table = codec.table()
    assert table.shape == (64, 4)
    lex = list(combinations(range(1, 9), 4))[:64]
    for i in range(64):
        assert sap_encode(codec, i) == frozenset(lex[i])
        assert tuple(table[i] + 1) == lex[i]
    assert sap_encode(codec, 0) == frozenset({1, 2, 3, 4})


def test_sap_errors():
    codec = SapCodec(4, 2)
    with pytest.raises(ValueError):
        sap_encode(codec, 4)
    with pytest.raises(ValueError):
        sap_encode(codec, -1)
    # {3, 4} and {2, 4} are ranks 5 and 4: outside the 4-pattern codebook
    with pytest.raises(ValueError):
        sap_decode(codec, {3, 4})
    with pytest.raises(ValueError):
        sap_decode(codec, {1, 1})
    with pytest.raises(ValueError):
        sap_decode(codec, {0, 2})
