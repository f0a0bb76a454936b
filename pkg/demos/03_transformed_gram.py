# %% [markdown]
# Transformed Gram matrices
#
# Pull Legendre and Chebyshev bases back through the ladder over a window
# and compare with the classical norms.  Then look at the |zeta|^2
# weighted ratios against ln T_bar.

# %%
from __future__ import annotations

import numpy as np

from zetaladder import asymptotic_scan, gram_transformed, ladder_for_window
from zetaladder.verify_harness import default_spec

np.set_printoptions(precision=3, linewidth=120)

T = 1e4
table = ladder_for_window(T)
for family in ("legendre", "chebyshev_t", "chebyshev_u", "general"):
    rep = gram_transformed(table, family, T=T, nmax=6)
    print(f"{family:12s} offdiag {rep.max_offdiag:.1e}  diag dev {rep.max_diag_reldev:.1e}  "
          f"route A/B {rep.route_disagreement:.1e}")
print(np.diag(rep.gram))

# %% ratio I_n(T_bar) / ln T_bar against the norm constant
scan = asymptotic_scan(None, default_spec("legendre", 1), [1e3, 1e4])
for T, r, d in zip(scan.T_values, scan.ratios, scan.reldev):
    print(f"T={T:g} ratio {r:.6f} limit {scan.limit:.6f} reldev {d:.2e}")
