"""Where does the gradient come from? Per-observation gradient norm vs error."""

import warnings

import numpy as np

from rotlaplace import experiments as X
from rotlaplace.exceptions import DegenerateSvd
from rotlaplace.fit import FitConfig, fit_mle
from rotlaplace.grid import hopf_so3_grid

warnings.simplefilter("ignore", DegenerateSvd)
grid = hopf_so3_grid(3)
data = X.synth_dataset(X.ExperimentConfig(seed=0, n=500, s=10.0, fraction=0.3))

for kind in ("mf", "rl"):
    rep = fit_mle(data.rotations, FitConfig(kind=kind), grid=grid)
    prof, bins = X.gradient_profile(kind, rep.param, data.rotations, grid)
    near = prof[prof[:, 0] < 10, 1].mean()
    far = prof[prof[:, 0] > 170, 1].mean()
    print(f"{kind}: mean |grad| below 10 deg {near:.3f}, above 170 deg {far:.3f}")
    print(f"    tail gradient share / population share = {X.tail_share_ratio(bins):.2f}")
    inlier_share = prof[~data.outlier, 1].sum() / prof[:, 1].sum()
    print(f"    inliers carry {inlier_share:.0%} of the total gradient magnitude")
