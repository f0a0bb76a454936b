# %% [markdown]
# Hardy's Z on the critical line
#
# Compare the Riemann-Siegel evaluator with the Euler-Maclaurin reference
# and mpmath, then locate a few sign changes.

# %%
from __future__ import annotations

import mpmath
import numpy as np

from zetaladder import hardy_z, hardy_z_em, hardy_z_rs, hardy_z_rs_array

# %%
for t in (100.0, 1000.0, 1e4, 1e5):
    rs = hardy_z_rs(t).z
    ref = float(mpmath.siegelz(t))
    print(f"t={t:>8g}  RS {rs:+.15f}  mpmath {ref:+.15f}  diff {abs(rs - ref):.1e}")

# %%
print("EM vs RS at t=500:", hardy_z_em(500.0).z, hardy_z_rs(500.0).z)

# %% sign changes in [10, 50]
t = np.linspace(10, 50, 4001)
z = hardy_z(t)
idx = np.flatnonzero(np.sign(z[:-1]) != np.sign(z[1:]))
print("zeros near:", np.round(t[idx], 3))

# %% short-range mean of Z^2 is roughly log(t / 2 pi) + 2 gamma
t = np.linspace(1e4, 1e4 + 200, 200001)
zz = hardy_z_rs_array(t) ** 2
print("mean Z^2", zz.mean(), "vs", np.log(1e4 / (2 * np.pi)) + 2 * np.euler_gamma)
