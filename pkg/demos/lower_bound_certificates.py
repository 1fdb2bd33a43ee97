"""Certify the analytic lower bounds against the exact truncation gaps.

The gap decays like N**(p(2 delta - 1) + 1); the closed-form bounds must
stay below it at every level.  The script checks three bound families on a
level sweep and saves a log-log comparison figure.
"""
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from specwave import (
    SpectralModel,
    bound_delta,
    bound_exp,
    bound_inf,
    build_model,
    exp_error_lower,
    gap_exact,
)

model = build_model(c=math.pi**2, p=2, delta=0, T=1)
const = SpectralModel.with_constant_weight(c=math.pi**2, p=2, mu=1.0, T=1.0)
levels = [2**k for k in range(7)]

print("level |   exact gap   | bound_delta  | bound_inf (mu=1) | all hold")
gaps, deltas, infs = [], [], []
for N in levels:
    g = gap_exact(model, N)
    bd = bound_delta(model, N)
    bi = bound_inf(const, N)
    gaps.append(g)
    deltas.append(bd)
    infs.append(bi)
    print(f"{N:5d} | {g:.6e} | {bd:.6e} | {bi:.6e}     | {g >= bd and g >= bi}")

print()
print("Exponential test function, component 1: two nested lower bounds")
print("level | exp_error_lower | bound_exp   | chain holds")
for N in levels:
    el = exp_error_lower(model, N, 1)
    be = bound_exp(model, N, 1)
    print(f"{N:5d} | {el:.6e}  | {be:.6e} | {el >= be}")

out = Path(__file__).with_name("output")
out.mkdir(exist_ok=True)
fig, ax = plt.subplots(figsize=(6, 4.5))
ax.loglog(levels, gaps, "ko-", label="exact gap")
ax.loglog(levels, deltas, "b--s", label="power-law weight bound")
ax.loglog(levels, infs, "r:^", label="weight-infimum bound")
ax.set_xlabel("truncation level N")
ax.set_ylabel("squared-norm gap")
ax.legend()
fig.tight_layout()
fig.savefig(out / "lower_bounds.svg")
print(f"\nfigure written to {out / 'lower_bounds.svg'}")
