"""Bracketing E(J | J < inf) and comparing with the exact truncated mean."""

import numpy as np

from rencontre import LambdaConfig, cond_exp_bounds, first_passage_seq, new_walk_params, tail_cond_exp_upper
from rencontre.bounds import TABLE1

p = new_walk_params(3, [0.3, 0.4, 0.5])
cfg = LambdaConfig(1 / 80, 1 / 8)
rep = cond_exp_bounds(p, cfg)
print(f"{p}: {rep.lower_E:.6f} <= E(J | J < inf) <= {rep.upper_E:.6f}")

f = first_passage_seq(p, 3000).f
n = np.arange(1, 3001)
for m in (10, 100, 1000, 3000):
    print(f"  mean over J <= {m:4d}: {np.dot(n[:m], f[:m]) / f[:m].sum():.6f}")

print("tail bound E(J | mu/2 < J < inf) <=", round(tail_cond_exp_upper(p, 2.0, cfg), 6))

## Reference rows
for row in TABLE1:
    rep = cond_exp_bounds(row.params, row.config)
    flag = "" if abs(rep.upper_E - row.paper_upper) / row.paper_upper < 5e-4 else "   <- " + row.note
    print(f"{row.row}  {row.params}  [{rep.lower_E:.6g}, {rep.upper_E:.6g}]  ref [{row.paper_lower}, {row.paper_upper}]{flag}")
