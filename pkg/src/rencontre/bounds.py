"""Stirling-type envelopes for the rencontre series and the bounds built on them.

For ``n`` past an explicit threshold the coefficient sum
``S_n = sum_k C(n,k)^d P^k`` is sandwiched as::

    lower * n^(-(d-1)/2) (1+alpha)^(dn)  <=  S_n  <=  upper * n^(-(d-1)/2) (1+alpha)^(dn)

with ``alpha = P^(1/d)``. ``upper = (M / sqrt(2 pi))^(d-1)`` holds for
``n >= N(alpha, lam)``; ``lower = (sqrt(2 pi) / e^2)^d K`` holds for
``n >= L(alpha, lam)``. Multiplying by ``Q^n`` turns these into envelopes for
``r_n`` that decay like ``T^n``, and summing them gives computable upper and
lower bounds for the generating functions at ``x = 1``. Those in turn bracket
the conditional mean ``E(J | J < inf)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Literal

import numpy as np

from .exact import EXACT_CAP, coefficient_sum, log_rencontre_array, rencontre_sequence
from .model import ParameterError, WalkParams, derived_constants, new_walk_params
from .polylog import DivergentSeries, SeriesValue, polylog_tail

Which = Literal["UB_phi", "LB_phi", "UB_phi1", "LB_phi1", "UB_phi1_plus_xphi2"]

# (uses upper constants, power of n in the coefficient, tail exponent offset)
_ENVELOPES = {
    "UB_phi": (True, 0, 1),
    "LB_phi": (False, 0, 1),
    "UB_phi1": (True, 1, 3),
    "LB_phi1": (False, 1, 3),
    "UB_phi1_plus_xphi2": (True, 2, 5),
}

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _check_lambda(lam) -> float:
    lam = float(Fraction(lam)) if isinstance(lam, str) else float(lam)
    if not 0.0 < lam < 1.0:
        raise ParameterError(f"lambda must lie strictly between 0 and 1, got {lam:g}")
    return lam


@dataclass(frozen=True)
class LambdaConfig:
    """``lambda1`` tunes the upper envelopes, ``lambda2`` the lower ones."""

    lambda1: float
    lambda2: float

    def __post_init__(self):
        object.__setattr__(self, "lambda1", _check_lambda(self.lambda1))
        object.__setattr__(self, "lambda2", _check_lambda(self.lambda2))


@dataclass(frozen=True)
class AppendixBConstants:
    alpha: float
    lam: float
    d: int
    N: int
    L: int
    M: float
    C1: float
    C2: float
    K: float

    @property
    def upper_coeff(self) -> float:
        return (self.M / _SQRT_2PI) ** (self.d - 1)

    @property
    def lower_coeff(self) -> float:
        return (_SQRT_2PI / math.e**2) ** self.d * self.K

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("alpha", "lam", "d", "N", "L", "M", "C1", "C2", "K")}


def threshold_N(alpha: float, lam: float) -> int:
    """Smallest ``n`` from which the upper coefficient envelope holds."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return max(math.floor(alpha / lam) + 1, math.floor(1.0 / (lam * alpha)) + 1)


def threshold_L(alpha: float, lam: float) -> int:
    """Smallest ``n`` from which the lower coefficient envelope holds."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    s = (alpha + 1.0) + math.sqrt((alpha + 1.0) ** 2 + 4.0 * lam * alpha)
    return max(math.floor((s / (2.0 * lam * alpha)) ** 2) + 1, math.floor((s / (2.0 * lam)) ** 2) + 1)


def envelope_constants(alpha: float, lam: float, d: int) -> AppendixBConstants:
    lam = _check_lambda(lam)
    a = float(alpha)
    if a <= 0:
        raise ValueError("alpha must be positive")
    M = (a + 1.0) / math.sqrt(a) / (1.0 - lam)
    C1 = max(4.0, (a + 1.0) ** 2 / (a * (1.0 + lam * a))) * math.exp(
        -0.5 * (1.0 + lam * a) / ((1.0 - lam) * a) * ((a + 1.0) ** 2 + lam * a / (1.0 + lam * a)))
    C2 = max(4.0, (a + 1.0) ** 2 / (a + lam)) * math.exp(
        -0.5 * (a + lam) / ((1.0 - lam) * a * a) * ((a + 1.0) ** 2 + lam * a * a / (a + lam)))
    K = ((1.0 - lam) * a + 1.0) / (a + 1.0) * C1**d + C2**d
    return AppendixBConstants(a, lam, d, threshold_N(a, lam), threshold_L(a, lam), M, C1, C2, K)


@dataclass(frozen=True)
class CoefficientSandwich:
    lower: float
    value: float
    upper: float

    @property
    def holds(self) -> bool:
        return self.lower <= self.value <= self.upper


def coeff_bounds_check(n: int, P: float, d: int, lam: float) -> CoefficientSandwich:
    """Both envelopes and the true ``log S_n``, all in log domain."""
    log_P = math.log(P)
    c = envelope_constants(math.exp(log_P / d), lam, d)
    if n < max(c.N, c.L):
        raise ValueError(f"n={n} is below the envelope threshold max(N, L) = {max(c.N, c.L)}")
    common = -(d - 1) / 2 * math.log(n) + d * n * math.log1p(c.alpha)
    return CoefficientSandwich(
        lower=math.log(c.lower_coeff) + common,
        value=coefficient_sum(n, d=d, log_P=log_P),
        upper=math.log(c.upper_coeff) + common,
    )


# -- envelope series ----------------------------------------------------------


@lru_cache(maxsize=64)
def _log_r_prefix(params: WalkParams, n_max: int) -> np.ndarray:
    arr = log_rencontre_array(params, n_max)
    arr.flags.writeable = False
    return arr


def weighted_prefix(params: WalkParams, stop: int, x: float, power: int) -> float:
    """``sum_{n=1}^{stop-1} n^power r_n x^(n-shift)``, shift 1 when ``power > 0``.

    Short prefixes are summed exactly in rationals and rounded once.
    """
    n_hi = stop - 1
    if n_hi < 1:
        return 0.0
    shift = 1 if power > 0 else 0
    if x == 0.0:
        # only the n == shift term survives (0**0 == 1)
        return 0.0 if shift == 0 else float(rencontre_sequence(params, 1, "exact").r[0])
    if n_hi <= EXACT_CAP:
        r = rencontre_sequence(params, n_hi, "exact").r
        xf = Fraction(x)
        total = sum(Fraction(n) ** power * r[n - 1] * xf ** (n - shift) for n in range(1, n_hi + 1))
        return float(total)
    log_r = _log_r_prefix(params, n_hi)
    n = np.arange(1, n_hi + 1, dtype=float)
    terms = np.exp(log_r + power * np.log(n) + (n - shift) * math.log(x))
    return math.fsum(terms.tolist())


def envelope_series(x: float, params: WalkParams, lam: float, which: Which) -> SeriesValue:
    """One of the five envelopes evaluated at ``x``.

    Upper envelopes report the top of the tail enclosure and lower envelopes
    the bottom, so the returned ``value`` is a bound in the stated direction;
    ``truncation_error`` is the width of the enclosure that was discarded.
    """
    if which not in _ENVELOPES:
        raise ValueError(f"unknown envelope {which!r}")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    upper, power, offset = _ENVELOPES[which]
    dc = derived_constants(params)
    c = envelope_constants(dc.alpha, lam, params.d)
    start = c.N if upper else c.L
    coeff = c.upper_coeff if upper else c.lower_coeff

    prefix = weighted_prefix(params, start, x, power)
    if x == 0.0:
        return SeriesValue(prefix, 0.0, start - 1)
    s = (params.d - offset) / 2
    y = dc.T * x
    try:
        tail = polylog_tail(s, y, start)
    except DivergentSeries as exc:
        raise DivergentSeries(f"{which} diverges at x={x:g} for {params}") from exc
    scale = coeff / x if power > 0 else coeff
    end = tail.upper if upper else tail.lower
    return SeriesValue(prefix + scale * end, scale * tail.width, start - 1 + tail.terms)


# -- conditional expectation --------------------------------------------------


def cond_exp_classification(params: WalkParams) -> str:
    """``"infinite"`` exactly for equal probabilities with ``d`` in 3..5."""
    if params.d < 3:
        raise ParameterError("conditional-mean classification needs d >= 3")
    return "infinite" if params.all_equal and params.d in (3, 4, 5) else "finite"


@dataclass(frozen=True)
class BoundsReport:
    lower_E: float | None
    upper_E: float | None
    constants_used: tuple[AppendixBConstants, AppendixBConstants]
    truncation_errors: dict
    classification: str
    envelopes: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {
            "classification": self.classification,
            "constants_used": {
                "lambda1": self.constants_used[0].as_dict(),
                "lambda2": self.constants_used[1].as_dict(),
            },
            "truncation_errors": dict(self.truncation_errors),
            "envelopes": dict(self.envelopes),
        }
        if self.classification == "finite":
            out["lower_E"] = self.lower_E
            out["upper_E"] = self.upper_E
        return out


def cond_exp_bounds(params: WalkParams, config: LambdaConfig) -> BoundsReport:
    """Bracket ``E(J | J < inf)`` using the envelopes at ``x = 1``.

    ``upper = UB(phi'; l1) / (LB(phi; l2) (1 + LB(phi; l2)))`` and
    ``lower = LB(phi'; l2) / (UB(phi; l1) (1 + UB(phi; l1)))``.
    """
    if params.d < 3:
        raise ParameterError("the conditional-mean bracket needs d >= 3")
    alpha = derived_constants(params).alpha
    consts = (envelope_constants(alpha, config.lambda1, params.d),
              envelope_constants(alpha, config.lambda2, params.d))
    cls = cond_exp_classification(params)
    if cls == "infinite":
        # the lower envelope for phi' diverges at x = 1 while phi stays bounded
        # or, for d = 3, phi itself diverges; either way the mean is infinite
        return BoundsReport(None, None, consts, {}, cls)

    ub_phi = envelope_series(1.0, params, config.lambda1, "UB_phi")
    ub_phi1 = envelope_series(1.0, params, config.lambda1, "UB_phi1")
    lb_phi = envelope_series(1.0, params, config.lambda2, "LB_phi")
    lb_phi1 = envelope_series(1.0, params, config.lambda2, "LB_phi1")

    upper = ub_phi1.value / (lb_phi.value * (1.0 + lb_phi.value))
    lower = lb_phi1.value / (ub_phi.value * (1.0 + ub_phi.value))
    envs = {"UB_phi": ub_phi, "UB_phi1": ub_phi1, "LB_phi": lb_phi, "LB_phi1": lb_phi1}
    return BoundsReport(
        lower_E=lower,
        upper_E=upper,
        constants_used=consts,
        truncation_errors={k: v.truncation_error for k, v in envs.items()},
        classification=cls,
        envelopes={k: v.value for k, v in envs.items()},
    )


def tail_cond_exp_upper(params: WalkParams, t: float, config: LambdaConfig,
                        subtrahend_factor: int = 2) -> float:
    """Upper bound on ``E(J | mu/t < J < inf)`` for ``t > 1``.

    ``subtrahend_factor=2`` keeps the factor that the second-moment
    identity produces; ``1`` gives the weaker variant with a single copy of
    the subtracted ratio. Both are valid upper bounds.
    """
    if params.d < 3:
        raise ParameterError("the tail bound needs d >= 3")
    if not t > 1:
        raise ParameterError(f"t must exceed 1, got {t}")
    if subtrahend_factor not in (1, 2):
        raise ValueError("subtrahend_factor must be 1 or 2")
    if cond_exp_classification(params) == "infinite":
        raise DivergentSeries(f"E(J | J < inf) is infinite for {params}")
    top = envelope_series(1.0, params, config.lambda1, "UB_phi1_plus_xphi2").value
    lb_phi1 = envelope_series(1.0, params, config.lambda2, "LB_phi1").value
    ub_phi = envelope_series(1.0, params, config.lambda1, "UB_phi").value
    bracket = top / lb_phi1 - subtrahend_factor * lb_phi1 / (1.0 + ub_phi)
    return t * t / (t - 1.0) ** 2 * bracket


def lambda_grid_search(params: WalkParams, grid1=None, grid2=None) -> tuple[LambdaConfig, BoundsReport]:
    """Extension: the tightest bracket over a small grid of ``(lambda1, lambda2)``.

    Upper bounds only depend on ``lambda1`` and lower bounds on ``lambda2``, so
    the two grids are searched independently.
    """
    grid1 = grid1 or [1 / k for k in (4, 8, 15, 30, 50, 80, 150, 300, 500)]
    grid2 = grid2 or [1 / k for k in (2, 3, 4, 6, 8, 10, 15)]
    best_hi = min(grid1, key=lambda l1: cond_exp_bounds(params, LambdaConfig(l1, grid2[0])).upper_E)
    best_lo = max(grid2, key=lambda l2: cond_exp_bounds(params, LambdaConfig(best_hi, l2)).lower_E)
    cfg = LambdaConfig(best_hi, best_lo)
    return cfg, cond_exp_bounds(params, cfg)


# -- published reference rows --------------------------------------------------


@dataclass(frozen=True)
class TableRow:
    row: int
    p: tuple[str, ...]
    lambda1: Fraction
    lambda2: Fraction
    paper_lower: float
    paper_upper: float
    printed_d: int
    note: str = ""

    @property
    def params(self) -> WalkParams:
        return new_walk_params(len(self.p), self.p)

    @property
    def config(self) -> LambdaConfig:
        return LambdaConfig(float(self.lambda1), float(self.lambda2))


_F = Fraction
TABLE1: tuple[TableRow, ...] = (
    TableRow(1, (".3", ".4", ".5"), _F(1, 80), _F(1, 8), 3.86223, 3.88172, 3),
    TableRow(2, (".45", ".5", ".55"), _F(1, 300), _F(1, 10), 9.31034, 9.84928, 3),
    TableRow(3, (".05", ".5", ".5"), _F(1, 15), _F(1, 2), 1.22586, 1.22586, 3),
    TableRow(4, (".3", ".4", ".5", ".6"), _F(1, 15), _F(1, 2), 2.3814, 2.38296, 4,
             "printed lambdas repeat row 3; lambda1=1/50, lambda2=1/4 reproduces the printed values"),
    TableRow(5, (".4", ".45", ".5", ".55"), _F(1, 250), _F(1, 8), 4.35938, 4.361, 4),
    TableRow(6, (".47", ".5", ".52", ".53"), _F(1, 500), _F(1, 15), 9.9011, 10.3937, 4),
    TableRow(7, (".5", ".5", ".6", ".6"), _F(1, 200), _F(1, 8), 4.73906, 4.75067, 4),
    TableRow(8, (".48", ".49", ".5", ".51", ".52"), _F(1, 500), _F(1, 15), 5.1569, 5.49917, 4,
             "labelled d=4 with five probabilities; evaluated as d=5"),
    TableRow(9, (".4", ".4", ".5", ".5", ".5"), _F(1, 150), _F(1, 8), 3.02342, 3.0273, 4,
             "labelled d=4 with five probabilities; evaluated as d=5"),
)

# lambdas that reproduce row 4's printed values
ROW4_ALTERNATIVE = (_F(1, 50), _F(1, 4))


def table_row_drop_last(row: TableRow) -> TableRow:
    """The d=4 reading of a five-probability row: drop the last probability."""
    return TableRow(row.row, row.p[:-1], row.lambda1, row.lambda2, row.paper_lower,
                    row.paper_upper, row.printed_d, "evaluated as d=4 with the last probability dropped")
