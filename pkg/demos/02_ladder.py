# %% [markdown]
# The surrogate ladder
#
# Build phi1 over a short stretch, look at its slope, invert it and
# check the gap t - phi1(t) against (1 - gamma) pi(t).

# %%
from __future__ import annotations

import numpy as np

from zetaladder import build_ladder, prime_pi, window_preimage
from zetaladder.ladder import GAP_CONSTANT

table = build_ladder(1e4, 1e4 + 50)
print(len(table), "knots, total rise", table.total_rise)
print("anchor (t0, phi1(t0)):", table.anchor)

# %% slope is Z~^2 >= 0 and averages about one
print("mean slope", table.dphi1.mean(), "min", table.dphi1.min())

# %% inversion
y = table.phi_anchor + np.array([1.0, 10.0, 40.0])
t = table.invert(y)
print("invert:", t, "back:", table.phi1(t) - y)

# %% gap law along the table
r = table.gap_ratios(stride=200)
print("gap ratio range", r.min(), r.max(), "c' =", GAP_CONSTANT, "pi(t0) =", prime_pi(1e4))

# %% a window [T, T+2] and its preimage
T = table.phi_anchor + 20.0
w = window_preimage(table, T)
print("preimage", w.preimage, "length", w.length, "T_bar/T", w.T_bar / T)
