"""Two walks: exact law, closed form, and the probability they never meet."""

from rencontre import (first_passage_seq, new_walk_params, no_rencontre_prob, phi2_closed_form,
                       rencontre_sequence, varphi_series)

## Symmetric pair, exact rationals
p = new_walk_params(2, ["1/2", "1/2"])
r = rencontre_sequence(p, 6, "exact").r
f = first_passage_seq(p, 6, "exact").f
print("n   r_n        f_n")
for n in range(1, 7):
    print(f"{n}   {str(r[n - 1]):9s}  {f[n - 1]}")

## Unequal pair: the series and its closed form agree
p = new_walk_params(2, [0.3, 0.5])
for x in (0.25, 0.5, 0.75, 0.95):
    v = varphi_series(p, x)
    phi = v.value / (1 + v.value)
    print(f"x={x:<5} series phi={phi:.12f}  closed form={phi2_closed_form(p, x):.12f}")

## Mass that is never assigned
res = no_rencontre_prob(p)
print("P(J = inf) =", res.p_infinity, f"({res.method})")
for n_max in (10, 100, 1000, 5000):
    print(f"  defect after {n_max:5d} steps: {first_passage_seq(p, n_max).defect_at_horizon:.10f}")
