"""Generating functions of the rencontre and first-rencontre sequences.

``varphi(x) = sum_n r_n x^n`` is the rencontre generating function and
``phi(x) = sum_n f_n x^n`` the first-rencontre one; they are tied by
``1 - phi = 1 / (1 + varphi)``. At ``x = 1`` this gives the probability that
the walks never meet, ``1 / (1 + varphi(1))``.

Truncated sums carry a certificate from the upper coefficient envelope of
:mod:`rencontre.bounds`, so a reported value ``v`` with error ``e`` means the
true sum lies in ``[v, v + e]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bounds import envelope_constants, threshold_L, threshold_N, weighted_prefix
from .exact import log_rencontre_array, rencontre_sequence
from .model import ParameterError, WalkParams, derived_constants
from .polylog import DivergentSeries, Enclosure, SeriesValue, polylog_tail

__all__ = [
    "DivergentSeries", "Enclosure", "SeriesValue", "TailProbResult", "polylog_tail",
    "varphi_series", "phi2_closed_form", "varphi2_closed_form", "no_rencontre_prob",
    "mean_divergence_witness", "WitnessRow",
]

LAMBDA_TAIL = 0.5
MAX_TERMS = 20000


@dataclass(frozen=True)
class TailProbResult:
    p_infinity: float
    method: str  # closed-form-d2 | series-at-1 | divergence-theorem3
    error_bound: float

    def as_dict(self) -> dict:
        return {"p_infinity": self.p_infinity, "method": self.method, "error_bound": self.error_bound}


def _tail_lambda(alpha: float, n0: int) -> float:
    # smallest lambda whose threshold N is still <= n0, never above LAMBDA_TAIL;
    # a smaller lambda lowers M and so tightens the certificate
    lam = max(alpha, 1.0 / alpha) / (n0 - 1)
    while lam < LAMBDA_TAIL and threshold_N(alpha, lam) > n0:
        lam *= 1.0 + 1e-9
    return min(lam, LAMBDA_TAIL)


def _tail_certificate(params: WalkParams, x: float, order: int, n0: int) -> float:
    """Upper bound on ``sum_{n >= n0}`` of the order-``order`` series terms."""
    dc = derived_constants(params)
    lam = _tail_lambda(dc.alpha, n0)
    c = envelope_constants(dc.alpha, lam, params.d)
    s = (params.d - 1) / 2 - order
    enc = polylog_tail(s, dc.T * x, n0)
    # n(n-1)...(n-order+1) <= n^order and x^(n-order) = x^-order * x^n
    return c.upper_coeff * enc.upper / x**order


def _quick_tail(cu: float, s: float, y: float, n0: int) -> float:
    # cheap closed-form over-estimate of cu * sum_{n>=n0} n^-s y^n, for picking n0
    if y < 1.0:
        rho = y if s >= 0 else y * (1.0 + 1.0 / n0) ** (-s)
        if rho >= 1.0:
            return math.inf
        return cu * math.exp(n0 * math.log(y) - s * math.log(n0)) / (1.0 - rho)
    return cu * (n0 ** (1.0 - s) / (s - 1.0) + n0 ** (-s))


def _converges_at_one(params: WalkParams, order: int) -> bool:
    return (not params.all_equal) or params.d >= 2 * order + 4


def varphi_series(params: WalkParams, x: float, order: int = 0, eps: float = 1e-10,
                  max_terms: int = MAX_TERMS) -> SeriesValue:
    """``varphi``, ``varphi'`` or ``varphi''`` at ``x`` with a tail certificate.

    The partial sum runs to a cut-off ``n0`` at least the envelope threshold
    and far enough that the certified remainder is below ``eps``, unless
    ``max_terms`` is reached first. In that case the returned
    ``truncation_error`` is simply larger than ``eps``.
    """
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if x == 1.0 and not _converges_at_one(params, order):
        raise DivergentSeries(f"order-{order} series diverges at x = 1 for {params}")
    if x == 0.0:
        # only the n == order term survives: order! * r_order
        v = 0.0 if order == 0 else math.factorial(order) * float(rencontre_sequence(params, order, "exact").r[-1])
        return SeriesValue(v, 0.0, order)

    dc = derived_constants(params)
    y = dc.T * x
    s = (params.d - 1) / 2 - order
    n_min = max(threshold_N(dc.alpha, LAMBDA_TAIL), order + 1, 8)
    cu = envelope_constants(dc.alpha, LAMBDA_TAIL, params.d).upper_coeff / x**order

    n0 = n_min
    while n0 < max_terms and _quick_tail(cu, s, y, n0) > eps:
        n0 = min(2 * n0, max_terms)
    # shrink back towards the smallest sufficient cut-off
    lo, hi = n0 // 2, n0
    if lo >= n_min and _quick_tail(cu, s, y, hi) <= eps:
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if _quick_tail(cu, s, y, mid) <= eps:
                hi = mid
            else:
                lo = mid
        n0 = hi

    if order == 0:
        value = weighted_prefix(params, n0, x, 0)
    else:
        value = _derivative_prefix(params, n0, x, order)
    err = _tail_certificate(params, x, order, n0)
    return SeriesValue(value, err, n0 - 1)


def _derivative_prefix(params: WalkParams, stop: int, x: float, order: int) -> float:
    # sum_{n=order}^{stop-1} n (n-1) .. (n-order+1) r_n x^(n-order)
    log_r = log_rencontre_array(params, stop - 1)
    n = np.arange(1, stop, dtype=float)
    falling = np.ones_like(n)
    for j in range(order):
        falling *= n - j
    keep = falling > 0
    terms = np.exp(log_r[keep] + np.log(falling[keep]) + (n[keep] - order) * math.log(x))
    return math.fsum(terms.tolist())


def _radicand(params: WalkParams, x: float) -> float:
    p1, p2 = params.p
    q1, q2 = params.q
    a = p1 * p2 + q1 * q2
    b = p1 * p2 - q1 * q2
    return max(1.0 - 2.0 * x * a + x * x * b * b, 0.0)


def phi2_closed_form(params: WalkParams, x: float) -> float:
    """First-rencontre generating function for two walks, ``1 - sqrt(radicand)``."""
    if params.d != 2:
        raise ParameterError(f"closed form exists only for d=2, got d={params.d}")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    return 1.0 - math.sqrt(_radicand(params, x))


def varphi2_closed_form(params: WalkParams, x: float) -> float:
    """Rencontre generating function for two walks, ``1/sqrt(radicand) - 1``."""
    if params.d != 2:
        raise ParameterError(f"closed form exists only for d=2, got d={params.d}")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    rad = _radicand(params, x)
    if rad == 0.0:
        raise DivergentSeries("two equal walks meet infinitely often; varphi(1) is infinite")
    return 1.0 / math.sqrt(rad) - 1.0


def no_rencontre_prob(params: WalkParams, eps: float = 1e-10, max_terms: int = MAX_TERMS) -> TailProbResult:
    """Probability that the walks never meet."""
    if params.d == 2:
        p1, p2 = params.p_exact
        return TailProbResult(float(abs(p1 - p2)), "closed-form-d2", 0.0)
    if params.all_equal and params.d == 3:
        return TailProbResult(0.0, "divergence-theorem3", 0.0)
    v = varphi_series(params, 1.0, 0, eps=eps, max_terms=max_terms)
    hi = 1.0 / (1.0 + v.value)
    lo = 1.0 / (1.0 + v.value + v.truncation_error)
    return TailProbResult(hi, "series-at-1", hi - lo)


@dataclass(frozen=True)
class WitnessRow:
    x: float
    lower_bound: float


def _witness_constants(alpha: float):
    root = (alpha + 1.0) / math.sqrt(2.0 * math.pi * alpha)
    K1 = root**2
    K2 = (root * math.exp(-((alpha + 1.0) ** 2) / (2.0 * alpha))) ** 3
    # pick lambda so both envelopes imply the simpler K1/K2 forms past N
    for lam in (0.25, 0.2, 0.125, 0.1, 0.05, 0.02):
        c = envelope_constants(alpha, lam, 3)
        if c.upper_coeff <= 2.0 * K1 and c.lower_coeff >= K2 / 2.0:
            return K1, K2, max(c.N, c.L)
    raise ArithmeticError(f"no lambda validates the witness constants at alpha={alpha:g}")


def mean_divergence_witness(params: WalkParams, x_grid: Sequence[float]) -> list[WitnessRow]:
    """Certified lower bounds on ``varphi'/(1+varphi)^2`` for three equal walks.

    The bound is ``(K2/2) x^(N-1)/(1-x) / (K3 - 2 K1 log(1-x))^2`` with
    ``K3 = 1 + sum_{n<N} r_n``; it grows without limit as ``x -> 1``.
    """
    if params.d != 3 or not params.all_equal:
        raise ParameterError("the divergence witness applies to d=3 with equal probabilities")
    alpha = derived_constants(params).alpha
    K1, K2, N = _witness_constants(alpha)
    K3 = 1.0 + weighted_prefix(params, N, 1.0, 0)
    rows = []
    for x in x_grid:
        x = float(x)
        if not 0.0 <= x < 1.0:
            raise ValueError(f"grid points must lie in [0, 1), got {x}")
        num = 0.5 * K2 * x ** (N - 1) / (1.0 - x)
        den = (K3 - 2.0 * K1 * math.log1p(-x)) ** 2
        rows.append(WitnessRow(x, num / den))
    return rows
