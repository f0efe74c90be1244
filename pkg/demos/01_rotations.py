"""Rotation basics: exp/log, quaternions, proper SVD and Haar sampling."""

import numpy as np

from rotlaplace.so3 import exp_map, geodesic_distance, log_map, proper_svd, quat_to_rotmat, random_rotation, rotmat_to_quat

rng = np.random.default_rng(0)

# axis-angle <-> matrix
phi = np.array([0.3, -0.2, 0.1])
R = exp_map(phi)
print("exp(phi) =\n", R.round(4))
print("log(R)   =", log_map(R).round(6))

# 180 degrees is the awkward case: the axis sign is fixed by convention
print("log(diag(1,-1,-1)) =", log_map(np.diag([1.0, -1.0, -1.0])))

# quaternions are scalar-first and canonicalised to w >= 0
q = rotmat_to_quat(R)
print("quaternion", q.round(6), "back to matrix ok:", np.allclose(quat_to_rotmat(q), R))

# proper SVD keeps det(U) = det(V) = 1 and moves the sign into s3
A = rng.standard_normal((3, 3))
svd = proper_svd(A)
print("det(A) =", round(np.linalg.det(A), 4), "singular values", svd.s.round(4))
print("det U, det V =", round(np.linalg.det(svd.u), 6), round(np.linalg.det(svd.v), 6))

# Haar rotations: mean angle to identity is pi/2 + 2/pi
theta = geodesic_distance(np.eye(3), random_rotation(rng, 100_000))
print(f"mean angle {theta.mean():.4f} (Haar value {np.pi / 2 + 2 / np.pi:.4f})")
