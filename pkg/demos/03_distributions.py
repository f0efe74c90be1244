"""Rotation Laplace vs matrix Fisher: normalisation, tails, entropy, quaternion form."""

import numpy as np

from rotlaplace import distributions as D
from rotlaplace.distributions import So3Param
from rotlaplace.grid import hopf_so3_grid, s3_grid
from rotlaplace.so3 import exp_map, rotmat_to_quat

grid = hopf_so3_grid(3)
A = np.diag([12.0, 8.0, 4.0])
rl, mf = So3Param(A), So3Param(A / 4)  # same mode and same tangent covariance

print("tangent covariance RL:", np.diag(D.tangent_covariance(rl, "rl")).round(4))
print("tangent covariance MF:", np.diag(D.tangent_covariance(mf, "mf")).round(4))

# density along a great circle leaving the mode
print(" angle    log p_RL    log p_MF")
lf_rl = D.log_normalization_factor("rl", rl, grid)
lf_mf = D.log_normalization_factor("mf", mf, grid)
for deg in (5, 30, 60, 90, 120, 150, 180):
    R = exp_map(np.radians(deg) * np.array([0.0, 0.0, 1.0]))
    print(f"{deg:6d}  {D.log_prob('rl', rl, R, grid, lf_rl):10.3f}  {D.log_prob('mf', mf, R, grid, lf_mf):10.3f}")

for s in (1, 2, 5, 10, 20):
    h_rl = D.entropy("rl", So3Param(s * np.eye(3)), grid)
    h_mf = D.entropy("mf", So3Param(s * np.eye(3)), grid)
    print(f"entropy at s={s:2d}: RL {h_rl:7.3f}  MF {h_mf:7.3f}")

# the quaternion Laplace built from A gives the same density ratios
qp = D.ql_from_rl(rl)
sg = s3_grid(3)
R1, R2 = exp_map([0.2, 0.1, 0.0]), exp_map([1.0, -0.5, 2.0])
r_so3 = D.log_prob("rl", rl, R1, grid) - D.log_prob("rl", rl, R2, grid)
r_s3 = D.s3_log_prob("ql", qp, rotmat_to_quat(R1), sg) - D.s3_log_prob("ql", qp, rotmat_to_quat(R2), sg)
print(f"log density ratio: SO(3) {r_so3:.10f}  S^3 {r_s3:.10f}")
