"""Rencontre probabilities ``r_n`` and first-rencontre probabilities ``f_n``.

Two numeric paths are provided:

* ``"float"`` — log-domain floats, usable for horizons in the tens of
  thousands;
* ``"exact"`` — arbitrary-precision integers over the common denominator
  ``D = prod(b_j)`` where ``p_j = a_j / b_j``, returned as :class:`Fraction`.

The first-rencontre law is obtained from the renewal recursion
``f_n = r_n - sum_{k<n} f_k r_{n-k}``. :func:`first_passage_inclusion_exclusion`
evaluates the same quantity independently by summing over all compositions of
``n`` and serves as the oracle for the recursion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Sequence

import numpy as np
from scipy.special import gammaln, logsumexp

from .model import WalkParams, derived_constants

Mode = Literal["float", "exact"]

EXACT_CAP = 256
INCLUSION_EXCLUSION_CAP = 20

# terms more than this far (in log) below the peak are dropped from windowed sums
_WINDOW_DROP = 80.0
_FULL_RANGE_BELOW = 2000


class ExactCapError(ValueError):
    """Exact-mode horizon larger than the configured cap."""


class NumericFailure(ArithmeticError):
    """A float-mode probability fell below the allowed negative tolerance."""


@dataclass(frozen=True)
class RencontreSequence:
    n_max: int
    r: Sequence  # np.ndarray in float mode, tuple[Fraction] in exact mode
    mode: Mode

    def __getitem__(self, n):
        """``seq[n]`` is ``r_n`` (1-based, matching the probability index)."""
        return self.r[n - 1]


@dataclass(frozen=True)
class FirstPassageSequence:
    n_max: int
    f: Sequence
    cumulative: Sequence
    defect_at_horizon: float | Fraction
    mode: Mode

    def __getitem__(self, n):
        return self.f[n - 1]


# -- float path ---------------------------------------------------------------


def _peak_window(n: int, alpha: float, d: int) -> np.ndarray:
    if n < _FULL_RANGE_BELOW:
        return np.arange(n + 1)
    centre = binomial_weight_argmax(n, alpha)
    sd = math.sqrt(n * alpha) / (1 + alpha)
    half = int(math.ceil(sd * math.sqrt(2 * _WINDOW_DROP / d) * 1.5)) + 2
    return np.arange(max(centre - half, 0), min(centre + half, n) + 1)


def _log_r(n: int, lg: np.ndarray, log_p: float, log_q: float, d: int, alpha: float) -> float:
    # lg[m] = log((m-1)!); log_p, log_q are sums over walks
    def terms(k):
        log_comb = lg[n + 1] - lg[k + 1] - lg[n - k + 1]
        return d * log_comb + k * log_p + (n - k) * log_q

    k = _peak_window(n, alpha, d)
    t = terms(k)
    if k[0] > 0 or k[-1] < n:
        # unimodal weights: small boundary terms bound everything outside the window
        peak = t.max()
        if t[0] > peak - _WINDOW_DROP or t[-1] > peak - _WINDOW_DROP:
            t = terms(np.arange(n + 1))
    return float(logsumexp(t))


def log_rencontre_array(params: WalkParams, n_max: int, start: int = 1) -> np.ndarray:
    """``log r_n`` for ``n = start..n_max``."""
    if start < 1:
        raise ValueError("rencontre times start at n=1")
    log_p = math.fsum(math.log(x) for x in params.p)
    log_q = math.fsum(math.log1p(-x) for x in params.p)
    alpha = derived_constants(params).alpha
    lg = gammaln(np.arange(n_max + 2, dtype=float))
    return np.array([_log_r(n, lg, log_p, log_q, params.d, alpha) for n in range(start, n_max + 1)])


def rencontre_array(params: WalkParams, n_max: int) -> np.ndarray:
    """Float ``r_1..r_{n_max}`` as a numpy array (index 0 holds ``r_1``)."""
    return np.exp(log_rencontre_array(params, n_max))


def log_rencontre_prob(params: WalkParams, n: int) -> float:
    return float(log_rencontre_array(params, n, start=n)[0])


def rencontre_prob(params: WalkParams, n: int) -> float:
    """Probability that all ``d`` walks agree at time ``n``.

    Sums ``prod_j C(n,k) p_j^k q_j^(n-k)`` over the common state ``k`` in log
    domain, so it stays finite for horizons where ``Q^n`` underflows.
    """
    return math.exp(log_rencontre_prob(params, n))


# -- exact path ---------------------------------------------------------------


def _integer_form(params: WalkParams) -> tuple[int, int, int]:
    """``(A, B, D)`` with ``prod_j p_j^k q_j^(n-k) = A^k B^(n-k) / D^n``."""
    A = B = D = 1
    for x in params.p_exact:
        A *= x.numerator
        B *= x.denominator - x.numerator
        D *= x.denominator
    return A, B, D


def _scaled_rencontre_integers(params: WalkParams, n_max: int) -> list[int]:
    # R[n] = r_n * D^n, an integer; R[0] = 1
    A, B, _ = _integer_form(params)
    d = params.d
    R = [1]
    for n in range(1, n_max + 1):
        total = 0
        c = 1
        a_pow = 1
        b_pow = B**n
        for k in range(n + 1):
            total += c**d * a_pow * b_pow
            c = c * (n - k) // (k + 1)
            a_pow *= A
            b_pow //= B
        R.append(total)
    return R


def rencontre_prob_exact(params: WalkParams, n: int) -> Fraction:
    if n < 1:
        raise ValueError("rencontre times start at n=1")
    _, _, D = _integer_form(params)
    return Fraction(_scaled_rencontre_integers(params, n)[n], D**n)


def rencontre_sequence(params: WalkParams, n_max: int, mode: Mode = "float",
                       exact_cap: int = EXACT_CAP) -> RencontreSequence:
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    if mode == "exact":
        if n_max > exact_cap:
            raise ExactCapError(f"exact mode limited to n_max <= {exact_cap}, got {n_max}")
        _, _, D = _integer_form(params)
        R = _scaled_rencontre_integers(params, n_max)
        r = tuple(Fraction(R[n], D**n) for n in range(1, n_max + 1))
        return RencontreSequence(n_max, r, "exact")
    if mode != "float":
        raise ValueError(f"unknown mode {mode!r}")
    return RencontreSequence(n_max, rencontre_array(params, n_max), "float")


# -- first-passage law --------------------------------------------------------


def _feller_float(r: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    f = np.empty_like(r)
    for i in range(len(r)):
        # f_{i+1} = r_{i+1} - sum_{k=1}^{i} f_k r_{i+1-k}
        f[i] = r[i] - np.dot(f[:i], r[i - 1::-1]) if i else r[0]
    worst = f.min()
    if worst < -tol:
        n = int(np.argmin(f)) + 1
        raise NumericFailure(f"f_{n} = {worst:.3e} is below -{tol:g}")
    return f


def first_passage_seq(params: WalkParams, n_max: int, mode: Mode = "float",
                      exact_cap: int = EXACT_CAP) -> FirstPassageSequence:
    """First-rencontre probabilities ``f_1..f_{n_max}`` via the renewal recursion."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    if mode == "exact":
        if n_max > exact_cap:
            raise ExactCapError(f"exact mode limited to n_max <= {exact_cap}, got {n_max}")
        _, _, D = _integer_form(params)
        R = _scaled_rencontre_integers(params, n_max)
        F = [0] * (n_max + 1)  # F[n] = f_n * D^n
        for n in range(1, n_max + 1):
            F[n] = R[n] - sum(F[k] * R[n - k] for k in range(1, n))
        f = tuple(Fraction(F[n], D**n) for n in range(1, n_max + 1))
        if any(x < 0 for x in f):
            raise NumericFailure("negative first-passage probability in exact mode")
        cum = []
        acc = Fraction(0)
        for x in f:
            acc += x
            cum.append(acc)
        return FirstPassageSequence(n_max, f, tuple(cum), 1 - acc, "exact")
    if mode != "float":
        raise ValueError(f"unknown mode {mode!r}")
    f = _feller_float(rencontre_array(params, n_max))
    cum = np.cumsum(f)
    return FirstPassageSequence(n_max, f, cum, float(1.0 - cum[-1]), "float")


def first_passage_inclusion_exclusion(params: WalkParams, n: int) -> Fraction:
    """``P(J = n)`` as a signed sum over all compositions of ``n``.

    Each composition ``j_1 + ... + j_s = n`` contributes
    ``(-1)^(s-1) r_{j_1} ... r_{j_s}``. There are ``2^(n-1)`` of them, hence the
    cap at ``n = 20``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if n > INCLUSION_EXCLUSION_CAP:
        raise ValueError(f"composition enumeration capped at n <= {INCLUSION_EXCLUSION_CAP}")
    _, _, D = _integer_form(params)
    R = _scaled_rencontre_integers(params, n)

    # depth-first over compositions; the running product is shared by prefixes
    total = 0
    stack = [(n, 1, 1)]  # (remaining, product of parts so far, sign)
    while stack:
        remaining, prod, sign = stack.pop()
        for first in range(1, remaining + 1):
            p = prod * R[first]
            if first == remaining:
                total += sign * p
            else:
                stack.append((remaining - first, p, -sign))
    return Fraction(total, D**n)


# -- binomial weights ---------------------------------------------------------


def binomial_weight_argmax(n: int, alpha) -> int:
    """Index ``k`` maximising ``C(n, k) * alpha**k`` over ``0..n``.

    Returns ``floor(alpha (n+1) / (alpha+1))``. When that quotient is an
    integer ``m``, both ``m - 1`` and ``m`` attain the maximum.
    """
    if n < 1 or alpha <= 0:
        raise ValueError("need n >= 1 and alpha > 0")
    if isinstance(alpha, (int, Fraction)):
        return math.floor(Fraction(alpha) * (n + 1) / (Fraction(alpha) + 1))
    return math.floor(alpha * (n + 1) / (alpha + 1))


def coefficient_sum(n: int, P: float | None = None, d: int = 2, *, log_P: float | None = None) -> float:
    """``log(sum_k C(n,k)^d P^k)``.

    Terms follow ``t_{k+1} = t_k ((n-k)/(k+1))^d P`` and are accumulated with
    log-sum-exp. Pass ``log_P`` directly when ``P`` itself would overflow.
    """
    if n < 1 or d < 2:
        raise ValueError("need n >= 1 and d >= 2")
    if log_P is None:
        log_P = math.log(P)
    k = np.arange(n, dtype=float)
    steps = d * (np.log(n - k) - np.log(k + 1)) + log_P
    log_terms = np.concatenate(([0.0], np.cumsum(steps)))
    return float(logsumexp(log_terms))


def _asymptote_constant(alpha: float, offset: str) -> float:
    base = (alpha + 1) / math.sqrt(2 * math.pi * alpha)
    if offset == "0":
        return base
    return base * math.exp(-((alpha + 1) ** 2) / (2 * alpha))


def stirling_trend(n: int, alpha: float, offset: str = "0") -> float:
    """Ratio of ``C(n,k) alpha^k`` to its large-``n`` asymptote.

    ``offset`` is ``"0"``, ``"-sqrt"`` or ``"+sqrt"`` and shifts
    ``k = floor(alpha (n+1)/(alpha+1) + offset)``. The asymptote is
    ``c n^(-1/2) (1+alpha)^n`` and the ratio tends to one as ``n`` grows.
    """
    shift = {"0": 0.0, "-sqrt": -math.sqrt(n), "+sqrt": math.sqrt(n)}[offset]
    k = math.floor(alpha * (n + 1) / (alpha + 1) + shift)
    if not 0 <= k <= n:
        raise ValueError(f"k={k} outside 0..{n}")
    log_weight = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1) + k * math.log(alpha)
    log_asym = math.log(_asymptote_constant(alpha, offset)) - 0.5 * math.log(n) + n * math.log1p(alpha)
    return math.exp(log_weight - log_asym)
