"""Simulated first rencontre times against the exact law."""

import math

from rencontre import SimConfig, first_passage_seq, new_walk_params, run_batch

p = new_walk_params(3, [0.4, 0.5, 0.6])
reps = 200_000
s = run_batch(p, SimConfig(seed=12345, horizon=200, replications=reps))
f = first_passage_seq(p, 200).f

print(" n   simulated   exact      z")
for n in range(1, 11):
    sd = math.sqrt(f[n - 1] * (1 - f[n - 1]) / reps)
    print(f"{n:2d}   {s.frequencies[n - 1]:.5f}    {f[n - 1]:.5f}   {(s.frequencies[n - 1] - f[n - 1]) / sd:+.2f}")

print("censored fraction:", s.censored_fraction, " exact defect:", round(first_passage_seq(p, 200).defect_at_horizon, 5))
mean, se = s.conditional_mean()
print(f"mean of J given J <= 200: {mean:.3f} +/- {se:.3f}")
