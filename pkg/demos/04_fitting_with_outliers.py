"""Fit both distributions to data with injected outliers.

A handful of seeds at level 2 keeps this under a minute; the CLI `compare`
command runs the full 50-seed version.
"""

import warnings

import numpy as np

from rotlaplace import experiments as X
from rotlaplace.exceptions import DegenerateSvd
from rotlaplace.fit import FitConfig, fit_mle
from rotlaplace.grid import hopf_so3_grid

warnings.simplefilter("ignore", DegenerateSvd)
grid = hopf_so3_grid(2)

for fraction in (0.0, 0.1, 0.3):
    errs = {"rl": [], "mf": []}
    for seed in range(8):
        data = X.synth_dataset(X.ExperimentConfig(seed=seed, n=500, s=10.0, fraction=fraction))
        for kind in errs:
            rep = fit_mle(data.rotations, FitConfig(kind=kind, level=2), grid=grid)
            errs[kind].append(X.mode_error_deg(rep, data.truth))
    rl, mf = np.array(errs["rl"]), np.array(errs["mf"])
    print(f"f={fraction:.2f}  median error RL {np.median(rl):5.2f} deg  MF {np.median(mf):5.2f} deg  RL better in {np.mean(rl <= mf):.0%}")
