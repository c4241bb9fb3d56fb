import math

import numpy as np
import pytest

from rencontre.exact import first_passage_seq, rencontre_prob
from rencontre.model import new_walk_params
from rencontre.montecarlo import SimConfig, replication_state, run_batch, simulate_one


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(1, 0, 10)
    with pytest.raises(ValueError):
        SimConfig(1, 10, 0)


def test_single_replication_conserves_mass():
    s = run_batch(new_walk_params(3, [0.2, 0.5, 0.7]), SimConfig(5, 30, 1))
    assert s.hits + s.censored == 1 == s.replications


def test_replay_is_deterministic():
    p = new_walk_params(3, [0.4, 0.5, 0.6])
    st = replication_state(99, 17)
    assert simulate_one(p, 500, st) == simulate_one(p, 500, st)
    assert run_batch(p, SimConfig(3, 40, 5000)) == run_batch(p, SimConfig(3, 40, 5000))


def test_worker_count_does_not_matter():
    p = new_walk_params(2, [0.3, 0.6])
    cfg = SimConfig(2024, 60, 20000)
    base = run_batch(p, cfg, workers=1)
    for w in (2, 3, 7):
        assert run_batch(p, cfg, workers=w) == base


def test_batch_matches_single_runs():
    p = new_walk_params(2, [0.5, 0.5])
    cfg = SimConfig(11, 25, 300)
    s = run_batch(p, cfg)
    singles = [simulate_one(p, 25, replication_state(11, i)) for i in range(300)]
    assert s.censored == sum(x is None for x in singles)
    for n in range(1, 26):
        assert s.histogram[n - 1] == sum(x == n for x in singles)


def test_horizon_one_is_single_step_law():
    p = new_walk_params(3, [0.3, 0.4, 0.5])
    reps = 200_000
    s = run_batch(p, SimConfig(8, 1, reps))
    r1 = rencontre_prob(p, 1)
    assert s.histogram.shape == (1,)
    assert abs(s.histogram[0] / reps - r1) <= 4 * math.sqrt(r1 * (1 - r1) / reps)


def test_first_step_meeting_rule():
    # J == 1 exactly when all first increments agree; with p = (1-e, e) that is rare
    p = new_walk_params(2, [0.999, 0.001])
    s = run_batch(p, SimConfig(4, 1, 100_000))
    r1 = 0.999 * 0.001 + 0.001 * 0.999
    assert abs(s.histogram[0] / 1e5 - r1) <= 4 * math.sqrt(r1 / 1e5)


def test_frequencies_match_exact_law_on_grid():
    reps = 100_000
    cells = ok = 0
    for i, p in enumerate([[0.5, 0.5], [0.3, 0.5], [0.4, 0.5, 0.6], [0.5] * 3, [0.2, 0.3]]):
        params = new_walk_params(len(p), p)
        f = first_passage_seq(params, 20).f
        s = run_batch(params, SimConfig(100 + i, 20, reps))
        freq = s.frequencies
        for n in range(20):
            sigma = math.sqrt(f[n] * (1 - f[n]) / reps)
            cells += 1
            ok += abs(freq[n] - f[n]) <= 4 * sigma
    assert ok / cells >= 0.95


def test_conditional_mean_nondecreasing_in_horizon():
    p = new_walk_params(2, [0.5, 0.5])
    means = [run_batch(p, SimConfig(77, h, 20000)).conditional_mean()[0] for h in (5, 20, 80, 320)]
    assert all(b >= a for a, b in zip(means, means[1:]))


def test_summary_dict():
    s = run_batch(new_walk_params(2, [0.5, 0.5]), SimConfig(1, 10, 1000))
    d = s.as_dict()
    assert sum(d["histogram"]) + d["censored"] == 1000
    assert d["conditional_mean"] > 0 and d["conditional_mean_se"] > 0
    np.testing.assert_array_equal(s.histogram, d["histogram"])
