"""Equal walks meet surely in three dimensions but not in four."""

from rencontre import DivergentSeries, new_walk_params, no_rencontre_prob, varphi_series

for d in (3, 4, 5, 6):
    p = new_walk_params(d, [0.5] * d)
    res = no_rencontre_prob(p)
    print(f"d={d}: P(J = inf) = {res.p_infinity:.6f} +/- {res.error_bound:.1e}  [{res.method}]")

## The same story through varphi(1)
for d in (3, 4):
    try:
        v = varphi_series(new_walk_params(d, [0.5] * d), 1.0)
        print(f"d={d}: varphi(1) = {v.value:.6f}, certified tail <= {v.truncation_error:.2e}")
    except DivergentSeries as exc:
        print(f"d={d}: {exc}")

## Unequal probabilities leave a positive chance of never meeting even in d=3
print(no_rencontre_prob(new_walk_params(3, [0.3, 0.4, 0.5])))
