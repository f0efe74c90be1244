"""Equal-volume grids on SO(3) and S^3 and what they integrate."""

import numpy as np

from rotlaplace.grid import hopf_so3_grid, s3_grid
from rotlaplace.so3 import geodesic_distance, haar_angle_cdf

for level in range(4):
    g = hopf_so3_grid(level)
    tr = np.trace(g.points, axis1=1, axis2=2).mean()
    print(f"level {level}: {len(g):6d} rotations, cell radius {np.degrees(g.cell_radius):5.2f} deg, mean trace {tr:+.4f}")

g = hopf_so3_grid(2)
theta = geodesic_distance(np.eye(3), g.points)
edges = np.radians(np.arange(0, 181, 30))
print("angle histogram vs Haar mass per 30 deg bin:")
for lo, got, want in zip(np.degrees(edges[:-1]), np.histogram(theta, edges)[0] / len(g), np.diff(haar_angle_cdf(edges))):
    print(f"  {lo:5.0f}  grid {got:.4f}  haar {want:.4f}")

sg = s3_grid(2)
print(f"S^3 grid: {len(sg)} quaternions, total weight {sg.weights.sum():.6f} (2 pi^2 = {2 * np.pi**2:.6f})")
