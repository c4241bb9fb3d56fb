"""Seeded simulation of the ``d`` walks, for cross-checking the exact law.

Only the ``d - 1`` differences ``S^j(n) - S^d(n)`` are tracked; a rencontre
happens when all of them are zero. Each replication draws from its own
splitmix64 stream derived from ``(seed, replication index)``, so results do
not depend on how replications are split across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np

from .model import WalkParams

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MASK64 = (1 << 64) - 1


@numba.njit(cache=True, inline="always")
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True)
def _stream_state(seed, rep):
    return _mix(_mix(seed) ^ _mix(np.uint64(rep) + _GOLDEN))


@numba.njit(cache=True)
def _first_rencontre(state, thresholds, horizon, diff):
    """First ``n <= horizon`` with all differences zero, else 0. Returns (n, state)."""
    d = thresholds.shape[0]
    for j in range(d - 1):
        diff[j] = 0
    for n in range(1, horizon + 1):
        # one 64-bit draw per walk; compare the top 53 bits against p_j
        state = state + _GOLDEN
        z = _mix(state)
        last = 1 if (z >> np.uint64(11)) < thresholds[d - 1] else 0
        hit = True
        for j in range(d - 1):
            state = state + _GOLDEN
            z = _mix(state)
            x = 1 if (z >> np.uint64(11)) < thresholds[j] else 0
            diff[j] += x - last
            if diff[j] != 0:
                hit = False
        if hit:
            return n, state
    return 0, state


@numba.njit(cache=True, nogil=True)
def _simulate_range(seed, thresholds, horizon, start, stop, hist):
    diff = np.zeros(max(thresholds.shape[0] - 1, 1), dtype=np.int64)
    censored = 0
    for rep in range(start, stop):
        state = _stream_state(seed, rep)
        n, _ = _first_rencontre(state, thresholds, horizon, diff)
        if n == 0:
            censored += 1
        else:
            hist[n] += 1
    return censored


def _thresholds(params: WalkParams) -> np.ndarray:
    # P(u < p) with u = k / 2^53 uniform on the 53-bit grid
    return np.array([min(int(math.ldexp(x, 53)), 1 << 53) for x in params.p], dtype=np.uint64)


def _seed64(seed: int) -> np.uint64:
    return np.uint64(int(seed) & _MASK64)


@dataclass(frozen=True)
class SimConfig:
    seed: int
    horizon: int
    replications: int

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if self.replications < 1:
            raise ValueError("replications must be at least 1")


@dataclass(frozen=True)
class SimSummary:
    histogram: np.ndarray  # histogram[n-1] counts runs with J == n
    censored: int
    replications: int
    horizon: int
    seed: int

    @property
    def hits(self) -> int:
        return int(self.histogram.sum())

    @property
    def frequencies(self) -> np.ndarray:
        return self.histogram / self.replications

    @property
    def censored_fraction(self) -> float:
        return self.censored / self.replications

    def conditional_mean(self) -> tuple[float, float]:
        """Mean of ``J`` given ``J <= horizon`` and its standard error."""
        h = self.hits
        if h == 0:
            return math.nan, math.nan
        n = np.arange(1, self.horizon + 1, dtype=float)
        m = float(np.dot(n, self.histogram)) / h
        if h == 1:
            return m, math.nan
        var = float(np.dot((n - m) ** 2, self.histogram)) / (h - 1)
        return m, math.sqrt(var / h)

    def __eq__(self, other):
        if not isinstance(other, SimSummary):
            return NotImplemented
        return (self.censored == other.censored and self.replications == other.replications
                and self.horizon == other.horizon and self.seed == other.seed
                and np.array_equal(self.histogram, other.histogram))

    def as_dict(self) -> dict:
        mean, se = self.conditional_mean()
        return {
            "seed": self.seed,
            "horizon": self.horizon,
            "replications": self.replications,
            "censored": self.censored,
            "histogram": [int(c) for c in self.histogram],
            "conditional_mean": None if math.isnan(mean) else mean,
            "conditional_mean_se": None if math.isnan(se) else se,
        }


def replication_state(seed: int, replication: int) -> int:
    """Initial stream state of one replication."""
    return int(_stream_state(_seed64(seed), replication))


def simulate_one(params: WalkParams, horizon: int, rng_state: int) -> int | None:
    """First rencontre time within ``horizon`` from stream ``rng_state``, or ``None``."""
    diff = np.zeros(max(params.d - 1, 1), dtype=np.int64)
    n, _ = _first_rencontre(np.uint64(int(rng_state) & _MASK64), _thresholds(params), int(horizon), diff)
    return int(n) if n else None


def run_batch(params: WalkParams, config: SimConfig, workers: int = 1) -> SimSummary:
    """Simulate ``config.replications`` independent runs and tabulate ``J``.

    Replication ``i`` always uses the stream ``replication_state(seed, i)``,
    and histograms are summed as integers, so the summary is identical for
    any ``workers``.
    """
    thr = _thresholds(params)
    seed = _seed64(config.seed)
    reps = config.replications
    workers = max(1, min(int(workers), reps))
    edges = np.linspace(0, reps, workers + 1).astype(np.int64)

    def chunk(i):
        hist = np.zeros(config.horizon + 1, dtype=np.int64)
        cens = _simulate_range(seed, thr, config.horizon, int(edges[i]), int(edges[i + 1]), hist)
        return hist, cens

    if workers == 1:
        parts = [chunk(0)]
    else:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(chunk, range(workers)))
    hist = sum(h for h, _ in parts)
    censored = sum(int(c) for _, c in parts)
    return SimSummary(hist[1:].copy(), censored, reps, config.horizon, int(config.seed))
