"""Walk parameters and the scalar constants derived from them.

A rencontre problem is fixed by ``d`` independent Bernoulli walks with success
probabilities ``p_1..p_d``. Everything downstream works with three derived
quantities::

    P = prod(p_j / q_j)      Q = prod(q_j)      T = Q * (1 + P**(1/d))**d

``T`` is the geometric decay rate of the rencontre probabilities; ``T == 1``
exactly when all ``p_j`` coincide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Sequence


class ParameterError(ValueError):
    """Base class for invalid walk parameters."""


class DimensionMismatchError(ParameterError):
    pass


class ProbabilityRangeError(ParameterError):
    pass


class DimensionTooSmallError(ParameterError):
    pass


def _as_fraction(value) -> Fraction:
    # floats go through repr so 0.3 becomes 3/10, not the nearest binary double
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, tuple) and len(value) == 2:
        return Fraction(int(value[0]), int(value[1]))
    return Fraction(repr(float(value)))


@dataclass(frozen=True)
class WalkParams:
    """Validated dimension and success probabilities.

    ``p_exact`` holds the probabilities as fractions and is what the exact
    oracle paths use; ``p`` is the float view used everywhere else.
    """

    d: int
    p_exact: tuple[Fraction, ...]
    p: tuple[float, ...] = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(float(x) for x in self.p_exact))

    @property
    def q(self) -> tuple[float, ...]:
        return tuple(1.0 - x for x in self.p)

    @property
    def q_exact(self) -> tuple[Fraction, ...]:
        return tuple(1 - x for x in self.p_exact)

    @property
    def all_equal(self) -> bool:
        # exact comparison on purpose: the divergence branches hinge on it
        return len(set(self.p_exact)) == 1

    def __str__(self):
        return f"d={self.d}, p=({', '.join(f'{x:g}' for x in self.p)})"


def new_walk_params(d: int, p: Sequence) -> WalkParams:
    """Validate ``(d, p)`` and build :class:`WalkParams`.

    Entries of ``p`` may be floats, decimal or ratio strings (``"3/10"``),
    fractions, or ``(numerator, denominator)`` pairs.
    """
    p = list(p)
    if d < 2:
        raise DimensionTooSmallError(f"need d >= 2 walks, got d={d}")
    if len(p) != d:
        raise DimensionMismatchError(f"d={d} but {len(p)} probabilities given")
    fracs = tuple(_as_fraction(x) for x in p)
    for j, x in enumerate(fracs, start=1):
        if not 0 < x < 1:
            raise ProbabilityRangeError(f"p_{j}={float(x):g} is not strictly between 0 and 1")
    return WalkParams(d, fracs)


def exact_walk_params(d: int, ratios: Sequence[tuple[int, int]]) -> WalkParams:
    """Constructor for the oracle path: probabilities as integer ratio pairs."""
    return new_walk_params(d, [Fraction(int(a), int(b)) for a, b in ratios])


def from_config(doc: dict) -> WalkParams:
    """Build parameters from a ``{"p": [...]}`` document; ``d`` is inferred."""
    p = doc["p"]
    return new_walk_params(len(p), p)


@dataclass(frozen=True)
class DerivedConstants:
    P: float
    Q: float
    T: float
    log_P: float
    log_Q: float
    alpha: float  # P**(1/d), the binomial-weight base used by the envelopes


def _log_products(params: WalkParams) -> tuple[float, float]:
    log_p = math.fsum(math.log(x) for x in params.p)
    log_q = math.fsum(math.log1p(-x) for x in params.p)
    return log_p, log_q


def derived_constants(params: WalkParams) -> DerivedConstants:
    log_p, log_q = _log_products(params)
    log_P = log_p - log_q
    d = params.d
    alpha = math.exp(log_P / d)
    if params.all_equal:
        alpha = params.p[0] / params.q[0]
        T = 1.0
    else:
        T = min(math.exp(log_q + d * math.log1p(alpha)), 1.0)
    return DerivedConstants(P=math.exp(log_P), Q=math.exp(log_q), T=T, log_P=log_P, log_Q=log_q, alpha=alpha)


def decay_rate_geometric(params: WalkParams) -> float:
    """``T`` via the geometric-mean form ``((prod p)^(1/d) + (prod q)^(1/d))^d``."""
    log_p, log_q = _log_products(params)
    d = params.d
    return (math.exp(log_p / d) + math.exp(log_q / d)) ** d


def amgm_gap(params: WalkParams) -> float:
    """``1 - ((prod p)^(1/d) + (prod q)^(1/d))``; zero iff all ``p_j`` agree."""
    if params.all_equal:
        return 0.0
    log_p, log_q = _log_products(params)
    d = params.d
    return max(1.0 - (math.exp(log_p / d) + math.exp(log_q / d)), 0.0)
