"""Special functions behind the closed-form outage and mean-SNR expressions.

Only first-order K and the exponentially scaled E1 are needed, so both are
implemented directly with numpy (no scipy dependency on the hot path):

* ``K1``: ascending series for ``x <= K1_SERIES_MAX``, Steed's continued
  fraction in the middle, Hankel asymptotic expansion for ``x >= K1_ASYMP_MIN``.
* ``exp(c) * E1(c)``: power series for ``c <= E1_SERIES_MAX``, modified Lentz
  continued fraction above.

All functions accept scalars or arrays and return the same shape.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EULER_GAMMA = 0.57721566490153286061

# Regime crossovers, picked from the error scan in scripts/specfun_crossover.py.
K1_SERIES_MAX = 2.0
K1_ASYMP_MIN = 25.0
E1_SERIES_MAX = 1.0

_EPS = np.finfo(float).eps
_TINY = 1e-300
_MAX_CF_ITER = 1000


@dataclass(frozen=True)
class FnAccuracy:
    max_rel_error: float = 1e-10

    def __post_init__(self):
        if not (0.0 < self.max_rel_error <= 1e-8):
            raise ValueError(f"max_rel_error must be in (0, 1e-8], got {self.max_rel_error}")


SHIPPED_ACCURACY = FnAccuracy()


def _as_array(x, name, *, allow_zero):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    bad = arr < 0 if allow_zero else arr <= 0
    if np.any(bad):
        raise ValueError(f"{name} must be {'>= 0' if allow_zero else '> 0'}")
    return arr


def _ret(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


def _k1_series_parts(x):
    """Return (I1(x), S(x)) with K1 = 1/x + ln(x/2) I1 - (x/4) S."""
    y = 0.25 * x * x
    term = np.ones_like(x)            # y^k / (k! (k+1)!)
    psi_sum = 1.0 - 2.0 * EULER_GAMMA  # psi(k+1) + psi(k+2) at k = 0
    i1 = term.copy()
    s = psi_sum * term
    for k in range(1, 40):
        term = term * y / (k * (k + 1))
        psi_sum = psi_sum + 1.0 / k + 1.0 / (k + 1)
        i1 = i1 + term
        s = s + psi_sum * term
        if np.all(term <= _EPS * 1e-2 * i1):
            break
    return 0.5 * x * i1, s


def _k1_scaled_cf(x):
    """exp(x) K1(x) via Steed's continued fraction for K0 (valid for x >= ~1)."""
    x = np.asarray(x, dtype=float)
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(x)
    q2 = np.ones_like(x)
    a1 = 0.25
    q = np.full_like(x, a1)
    c = np.full_like(x, a1)
    a = np.full_like(x, -a1)
    s = 1.0 + q * delh
    done = np.zeros(x.shape, dtype=bool)
    for i in range(1, _MAX_CF_ITER):
        a = a - 2 * i
        c = -a * c / (i + 1.0)
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = np.where(done, 0.0, (b * d - 1.0) * delh)
        h = h + delh
        # converged entries are frozen; q keeps growing and inf * 0 would be nan
        dels = np.where(done, 0.0, q * delh)
        s = s + dels
        done |= np.abs(dels) < _EPS * np.abs(s)
        if np.all(done):
            break
    h = a1 * h
    k0s = np.sqrt(np.pi / (2.0 * x)) / s
    return k0s * (x + 0.5 - h) / x


def _k1_scaled_asymptotic(x):
    """exp(x) K1(x) from the Hankel expansion; accurate to eps for x >= 25."""
    total = np.ones_like(x)
    term = np.ones_like(x)
    for k in range(1, 30):
        term = term * (4.0 - (2 * k - 1) ** 2) / (k * 8.0 * x)
        total = total + term
        if np.all(np.abs(term) <= _EPS * 1e-2):
            break
    return np.sqrt(np.pi / (2.0 * x)) * total


def _k1_scaled_large(x):
    out = np.empty_like(x)
    big = x >= K1_ASYMP_MIN
    if np.any(big):
        out[big] = _k1_scaled_asymptotic(x[big])
    if np.any(~big):
        out[~big] = _k1_scaled_cf(x[~big])
    return out


def bessel_k1(x):
    """Modified Bessel function of the second kind, order one.

    Raises ValueError for non-positive or non-finite input. Underflows to 0
    for arguments past ~705.
    """
    xa = np.atleast_1d(_as_array(x, "x", allow_zero=False))
    out = np.empty_like(xa)
    small = xa <= K1_SERIES_MAX
    if np.any(small):
        xs = xa[small]
        i1, s = _k1_series_parts(xs)
        out[small] = 1.0 / xs + np.log(0.5 * xs) * i1 - 0.25 * xs * s
    if np.any(~small):
        xl = xa[~small]
        with np.errstate(under="ignore"):
            out[~small] = _k1_scaled_large(xl) * np.exp(-xl)
    return _ret(out.reshape(np.shape(x)), x)


def x_times_k1(x):
    """x * K1(x), finite down to x = 0 where it equals 1.

    Decreasing from 1 towards 0. This is the form the outage expression uses;
    it never forms K1 itself near the origin.
    """
    xa = np.atleast_1d(_as_array(x, "x", allow_zero=True))
    out = np.empty_like(xa)
    zero = xa == 0.0
    out[zero] = 1.0
    small = (xa <= K1_SERIES_MAX) & ~zero
    if np.any(small):
        xs = xa[small]
        i1, s = _k1_series_parts(xs)
        out[small] = 1.0 + xs * np.log(0.5 * xs) * i1 - 0.25 * xs * xs * s
    large = xa > K1_SERIES_MAX
    if np.any(large):
        xl = xa[large]
        with np.errstate(under="ignore"):
            out[large] = xl * _k1_scaled_large(xl) * np.exp(-xl)
    return _ret(out.reshape(np.shape(x)), x)


def _expx_e1_series(c):
    total = np.zeros_like(c)
    term = np.ones_like(c)
    for k in range(1, 60):
        term = -term * c / k
        total = total - term / k
        if np.all(np.abs(term) <= _EPS * 1e-2 * k):
            break
    return np.exp(c) * (-EULER_GAMMA - np.log(c) + total)


def _expx_e1_cf(c, start=0):
    """Tail of exp(c) E1(c) = 1/(c+1 - 1/(c+3 - 4/(c+5 - ...))) from level ``start``.

    ``start=0`` gives exp(c) E1(c) itself; ``start=1`` gives
    1/(c+3 - 4/(c+5 - ...)). Modified Lentz.
    """
    b = c + 1.0 + 2.0 * start
    cc = np.full_like(c, 1.0 / _TINY)
    d = 1.0 / b
    h = d.copy()
    done = np.zeros(c.shape, dtype=bool)
    for i in range(start + 1, start + _MAX_CF_ITER):
        an = -float(i * i)
        b = b + 2.0
        d = 1.0 / (an * d + b)
        cc = b + an / cc
        delta = np.where(done, 1.0, cc * d)
        h = h * delta
        done |= np.abs(delta - 1.0) < _EPS
        if np.all(done):
            break
    return h


def expx_e1(c):
    """exp(c) * E1(c) for c > 0, i.e. -exp(c) * Ei(-c).

    Strictly decreasing; lies in (0.5 ln(1 + 2/c), ln(1 + 1/c)).
    """
    ca = np.atleast_1d(_as_array(c, "c", allow_zero=False))
    out = np.empty_like(ca)
    small = ca <= E1_SERIES_MAX
    if np.any(small):
        out[small] = _expx_e1_series(ca[small])
    if np.any(~small):
        out[~small] = _expx_e1_cf(ca[~small])
    return _ret(out.reshape(np.shape(c)), c)


def e1_cf_tail(c):
    """tau(c) = (1 + c) - 1 / (exp(c) E1(c)), in (0, 1).

    Lets 1 - c e^c E1(c) = h (1 - tau) and (1 + c) h - 1 = h tau be formed
    without cancellation at large c, where both are O(1/c) or smaller.
    """
    ca = np.atleast_1d(_as_array(c, "c", allow_zero=False))
    out = np.empty_like(ca)
    small = ca <= E1_SERIES_MAX
    if np.any(small):
        cs = ca[small]
        out[small] = (1.0 + cs) - 1.0 / _expx_e1_series(cs)
    if np.any(~small):
        out[~small] = _expx_e1_cf(ca[~small], start=1)
    return _ret(out.reshape(np.shape(c)), c)
