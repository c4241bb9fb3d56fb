"""Rigorous enclosures of the tails ``sum_{n >= n0} n**(-s) * x**n``.

Every envelope in :mod:`rencontre.bounds` ends in a constant times one of
these sums, so the enclosure has to be honest in both directions: the lower
end is a partial sum of positive terms and the upper end adds a proven bound
on what was left out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_BLOCK = 1 << 16
# direct terms summed before switching to the integral bracket at x == 1
_ZETA_DIRECT = 1 << 20
_MAX_TERMS = 1 << 27


class DivergentSeries(ValueError):
    """A requested series diverges; the caller asked for a number that is infinite."""


@dataclass(frozen=True)
class Enclosure:
    lower: float
    upper: float
    terms: int = 0

    @property
    def mid(self) -> float:
        return 0.5 * (self.lower + self.upper)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def __contains__(self, value) -> bool:
        return self.lower <= value <= self.upper

    def scaled(self, c: float) -> "Enclosure":
        if c < 0:
            raise ValueError("scale factor must be non-negative")
        return Enclosure(c * self.lower, c * self.upper, self.terms)


def _block_terms(s: float, log_x: float, start: int, stop: int) -> np.ndarray:
    n = np.arange(start, stop, dtype=np.float64)
    return np.exp(n * log_x - s * np.log(n))


def _geometric_tail(s: float, x: float, n0: int, rtol: float) -> Enclosure:
    log_x = math.log(x)
    acc = 0.0
    comp = 0.0  # Kahan compensation; the sums can run to millions of terms
    m = n0
    while True:
        stop = m + _BLOCK
        block = _block_terms(s, log_x, m, stop)
        y = float(block.sum()) - comp
        t = acc + y
        comp = (t - acc) - y
        acc = t
        m = stop
        t_m = math.exp(m * log_x - s * math.log(m))
        # ratio of consecutive terms past m is at most rho
        rho = x if s >= 0 else x * (1.0 + 1.0 / m) ** (-s)
        if rho < 1.0:
            tail = t_m / (1.0 - rho)
            if tail <= rtol * acc or tail == 0.0 or m - n0 >= _MAX_TERMS:
                return Enclosure(acc, math.nextafter(acc + tail, math.inf), m - n0)
        elif m - n0 >= _MAX_TERMS:
            raise ArithmeticError("tail ratio never dropped below one within the term cap")


def polylog_tail(s: float, x: float, n0: int, rtol: float = 1e-15) -> Enclosure:
    """Enclose ``sum_{n >= n0} n**(-s) x**n`` for ``0 <= x <= 1``.

    For ``x < 1`` the terms are summed until a ratio-test bound on the
    remainder falls below ``rtol`` times the running sum. For ``x == 1`` the
    series converges only when ``s > 1``; a block is summed directly and the
    rest is bracketed by the integral test. Divergent input raises
    :class:`DivergentSeries`.
    """
    n0 = int(n0)
    if n0 < 1:
        raise ValueError(f"n0 must be >= 1, got {n0}")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if x == 0.0:
        return Enclosure(0.0, 0.0, 0)
    if x < 1.0:
        if s == 0:
            v = x ** n0 / (1.0 - x)
            return Enclosure(v, v, 0)
        return _geometric_tail(float(s), float(x), n0, rtol)
    if s <= 1:
        raise DivergentSeries(f"sum of n^(-{s:g}) diverges at x = 1")
    m = n0 + _ZETA_DIRECT
    block = _block_terms(float(s), 0.0, n0, m)
    direct = math.fsum(block[::-1].tolist())
    # integral test for the decreasing f(n) = n^-s on [m, inf)
    integral = m ** (1.0 - s) / (s - 1.0)
    return Enclosure(direct + integral, math.nextafter(direct + integral + m ** (-s), math.inf), _ZETA_DIRECT)


@dataclass(frozen=True)
class SeriesValue:
    """A truncated series or envelope value with a truncation certificate."""

    value: float
    truncation_error: float
    terms_used: int

    def as_enclosure(self) -> Enclosure:
        return Enclosure(self.value, self.value + self.truncation_error, self.terms_used)
