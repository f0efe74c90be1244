"""Entropy of the fitted distribution as an uncertainty score."""

import numpy as np

from rotlaplace import experiments as X

rows = X.entropy_vs_error(concentrations=(2.0, 20.0), trials=8, n=300, kind="rl", level=2)
for s in (2.0, 20.0):
    h = np.array([r[2] for r in rows if r[0] == s])
    e = np.array([r[3] for r in rows if r[0] == s])
    print(f"s={s:4.0f}: mean entropy {h.mean():6.3f}, median error {np.median(e):5.2f} deg")
print(f"low-entropy fit also has the lower error in {X.paired_entropy_agreement(rows):.0%} of seeds")
