"""SO(3) primitives: hat/vee, exp/log maps, quaternion conversion, proper SVD.

Rotations are plain ``numpy`` arrays of shape ``(..., 3, 3)`` and quaternions
are ``(..., 4)`` arrays stored scalar-first ``(w, x, y, z)``.  Every function
broadcasts over leading batch dimensions unless noted otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidRotation, NonSkewInput

SMALL_ANGLE = 1e-6
_NEAR_PI = 1e-3


def hat(phi):
    """Map 3-vectors to skew-symmetric matrices, ``hat(a) @ b == cross(a, b)``."""
    phi = np.asarray(phi, dtype=float)
    out = np.zeros(phi.shape[:-1] + (3, 3))
    x, y, z = phi[..., 0], phi[..., 1], phi[..., 2]
    out[..., 0, 1] = -z
    out[..., 0, 2] = y
    out[..., 1, 0] = z
    out[..., 1, 2] = -x
    out[..., 2, 0] = -y
    out[..., 2, 1] = x
    return out


def vee(Phi, atol=1e-8):
    """Inverse of :func:`hat`.

    Raises
    ------
    NonSkewInput
        If ``||Phi + Phi^T||_F > atol`` for any matrix in the batch.
    """
    Phi = np.asarray(Phi, dtype=float)
    asym = np.linalg.norm(Phi + np.swapaxes(Phi, -1, -2), axis=(-2, -1))
    if np.any(asym > atol):
        raise NonSkewInput(f"matrix is not skew-symmetric (||Phi + Phi^T|| = {np.max(asym):.3g})")
    return np.stack([Phi[..., 2, 1], Phi[..., 0, 2], Phi[..., 1, 0]], axis=-1)


def exp_map(phi):
    """Rodrigues formula; second-order Taylor coefficients below ``SMALL_ANGLE``."""
    phi = np.asarray(phi, dtype=float)
    theta = np.linalg.norm(phi, axis=-1)
    small = theta < SMALL_ANGLE
    safe = np.where(small, 1.0, theta)
    th2 = theta**2
    a = np.where(small, 1.0 - th2 / 6.0, np.sin(safe) / safe)
    b = np.where(small, 0.5 - th2 / 24.0, (1.0 - np.cos(safe)) / safe**2)
    K = hat(phi)
    return np.eye(3) + a[..., None, None] * K + b[..., None, None] * (K @ K)


def rotation_angle(R):
    """Rotation angle in ``[0, pi]`` from the trace (argument clamped)."""
    R = np.asarray(R, dtype=float)
    c = (np.trace(R, axis1=-2, axis2=-1) - 1.0) / 2.0
    return np.arccos(np.clip(c, -1.0, 1.0))


def _canonical_sign(v):
    """Flip each vector so its first non-negligible component is positive."""
    v = np.array(v, dtype=float)
    flat = v.reshape(-1, v.shape[-1])
    for row in flat:
        nz = np.flatnonzero(np.abs(row) > 1e-12)
        if nz.size and row[nz[0]] < 0:
            row *= -1.0
    return flat.reshape(v.shape)


def _log_single(R):
    theta = float(rotation_angle(R))
    skew = vee(0.5 * (R - R.T), atol=np.inf)
    if theta < SMALL_ANGLE:
        return skew * (1.0 + theta**2 / 6.0)
    if np.pi - theta > _NEAR_PI:
        return skew * (theta / np.sin(theta))
    # Near pi: the symmetric part carries the axis, (1 - cos) n n^T.
    c = np.cos(theta)
    B = (0.5 * (R + R.T) - c * np.eye(3)) / (1.0 - c)
    j = int(np.argmax(np.diag(B)))
    axis = B[:, j] / np.sqrt(max(B[j, j], 1e-300))
    axis /= np.linalg.norm(axis)
    s = axis @ skew
    if abs(s) > 1e-12:
        axis = axis if s > 0 else -axis
    else:
        axis = _canonical_sign(axis)
    return theta * axis


def log_map(R):
    """Logarithm map to axis-angle vectors with ``||phi|| <= pi``.

    At exactly ``pi`` the axis sign is fixed so that the first non-zero
    component is positive.
    """
    R = np.asarray(R, dtype=float)
    flat = R.reshape(-1, 3, 3)
    out = np.empty((flat.shape[0], 3))
    theta = rotation_angle(flat)
    regular = (theta >= SMALL_ANGLE) & (np.pi - theta > _NEAR_PI)
    if np.any(regular):
        Rr = flat[regular]
        skew = 0.5 * (Rr - np.swapaxes(Rr, -1, -2))
        k = theta[regular] / np.sin(theta[regular])
        out[regular] = np.stack([skew[:, 2, 1], skew[:, 0, 2], skew[:, 1, 0]], -1) * k[:, None]
    for i in np.flatnonzero(~regular):
        out[i] = _log_single(flat[i])
    return out.reshape(R.shape[:-2] + (3,))


def geodesic_distance(R1, R2):
    """Angle of ``R1^T R2`` in radians, in ``[0, pi]``.

    Uses the half-angle pair ``sin(t/2) = ||R1 - R2||_F / (2 sqrt 2)``,
    ``cos(t/2) = sqrt(1 + tr(R1^T R2)) / 2`` which equals
    ``arccos((tr - 1) / 2)`` but stays accurate near zero.
    """
    R1 = np.asarray(R1, dtype=float)
    R2 = np.asarray(R2, dtype=float)
    tr = np.einsum("...ij,...ij->...", R1, R2)
    s = np.linalg.norm(R1 - R2, axis=(-2, -1)) / (2.0 * np.sqrt(2.0))
    c = np.sqrt(np.clip(1.0 + tr, 0.0, 4.0)) / 2.0
    return 2.0 * np.arctan2(s, c)


def quat_to_rotmat(q):
    """Standard map from unit quaternions (w, x, y, z) to rotation matrices."""
    q = np.asarray(q, dtype=float)
    w, x, y, z = (q[..., i] for i in range(4))
    R = np.empty(q.shape[:-1] + (3, 3))
    R[..., 0, 0] = 1 - 2 * (y * y + z * z)
    R[..., 0, 1] = 2 * (x * y - w * z)
    R[..., 0, 2] = 2 * (x * z + w * y)
    R[..., 1, 0] = 2 * (x * y + w * z)
    R[..., 1, 1] = 1 - 2 * (x * x + z * z)
    R[..., 1, 2] = 2 * (y * z - w * x)
    R[..., 2, 0] = 2 * (x * z - w * y)
    R[..., 2, 1] = 2 * (y * z + w * x)
    R[..., 2, 2] = 1 - 2 * (x * x + y * y)
    return R


def canonical_quat(q):
    """Pick the hemisphere ``w > 0``; ties resolved by the first non-zero component."""
    q = np.array(q, dtype=float)
    flat = q.reshape(-1, 4)
    for row in flat:
        nz = np.flatnonzero(np.abs(row) > 1e-12)
        if nz.size and row[nz[0]] < 0:
            row *= -1.0
    return flat.reshape(q.shape)


def rotmat_to_quat(R):
    """Inverse of :func:`quat_to_rotmat` (Shepperd's method), canonical hemisphere."""
    R = np.asarray(R, dtype=float)
    flat = R.reshape(-1, 3, 3)
    m = flat
    tr = np.trace(m, axis1=-2, axis2=-1)
    # 4 * component^2 for w, x, y, z
    cand = np.stack(
        [
            1 + tr,
            1 + 2 * m[:, 0, 0] - tr,
            1 + 2 * m[:, 1, 1] - tr,
            1 + 2 * m[:, 2, 2] - tr,
        ],
        axis=-1,
    )
    k = np.argmax(cand, axis=-1)
    q = np.empty((flat.shape[0], 4))
    for i in range(flat.shape[0]):
        a = m[i]
        r = np.sqrt(max(cand[i, k[i]], 0.0))
        if k[i] == 0:
            q[i] = [r / 2, (a[2, 1] - a[1, 2]) / (2 * r), (a[0, 2] - a[2, 0]) / (2 * r), (a[1, 0] - a[0, 1]) / (2 * r)]
        elif k[i] == 1:
            q[i] = [(a[2, 1] - a[1, 2]) / (2 * r), r / 2, (a[0, 1] + a[1, 0]) / (2 * r), (a[0, 2] + a[2, 0]) / (2 * r)]
        elif k[i] == 2:
            q[i] = [(a[0, 2] - a[2, 0]) / (2 * r), (a[0, 1] + a[1, 0]) / (2 * r), r / 2, (a[1, 2] + a[2, 1]) / (2 * r)]
        else:
            q[i] = [(a[1, 0] - a[0, 1]) / (2 * r), (a[0, 2] + a[2, 0]) / (2 * r), (a[1, 2] + a[2, 1]) / (2 * r), r / 2]
    q /= np.linalg.norm(q, axis=-1, keepdims=True)
    return canonical_quat(q).reshape(R.shape[:-2] + (4,))


def quat_multiply(a, b):
    """Hamilton product ``a * b``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, ax, ay, az = (a[..., i] for i in range(4))
    bw, bx, by, bz = (b[..., i] for i in range(4))
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def quat_conjugate(q):
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def quat_left_matrix(a):
    """4x4 matrix ``L(a)`` with ``L(a) @ q == quat_multiply(a, q)``."""
    w, x, y, z = np.asarray(a, dtype=float)
    return np.array([[w, -x, -y, -z], [x, w, -z, y], [y, z, w, -x], [z, -y, x, w]])


def quat_right_matrix(b):
    """4x4 matrix ``Rm(b)`` with ``Rm(b) @ q == quat_multiply(q, b)``."""
    w, x, y, z = np.asarray(b, dtype=float)
    return np.array([[w, -x, -y, -z], [x, w, z, -y], [y, -z, w, x], [z, y, -x, w]])


@dataclass(frozen=True)
class ProperSvd:
    """``A = u @ diag(s) @ v.T`` with ``u, v`` in SO(3) and ``s1 >= s2 >= |s3|``."""

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray

    @property
    def mode(self):
        return self.u @ np.swapaxes(self.v, -1, -2)

    def reconstruct(self):
        return (self.u * self.s[..., None, :]) @ np.swapaxes(self.v, -1, -2)


def proper_svd(A):
    """SVD with sign corrections moving a reflection into the third singular value."""
    A = np.asarray(A, dtype=float)
    U, s, Vt = np.linalg.svd(A)
    V = np.swapaxes(Vt, -1, -2)
    du = np.linalg.det(U)
    dv = np.linalg.det(V)
    U = U.copy()
    V = V.copy()
    U[..., :, 2] *= np.sign(du)[..., None]
    V[..., :, 2] *= np.sign(dv)[..., None]
    s = s.copy()
    s[..., 2] *= np.sign(du * dv)
    return ProperSvd(U, s, V)


def project_to_so3(M):
    """Closest rotation to ``M`` in Frobenius norm, i.e. ``U V^T`` of the proper SVD."""
    return proper_svd(M).mode


def random_rotation(rng, n=None):
    """Haar-uniform rotations from normalized 4D Gaussian quaternions.

    Returns a single ``(3, 3)`` matrix when ``n`` is None, else ``(n, 3, 3)``.
    """
    size = (4,) if n is None else (n, 4)
    q = rng.standard_normal(size)
    q /= np.linalg.norm(q, axis=-1, keepdims=True)
    return quat_to_rotmat(q)


def check_rotation(R, atol=1e-9):
    """Raise :class:`InvalidRotation` unless every matrix in ``R`` is in SO(3)."""
    R = np.asarray(R, dtype=float)
    if R.shape[-2:] != (3, 3):
        raise InvalidRotation(f"expected (..., 3, 3) array, got shape {R.shape}")
    if not np.all(np.isfinite(R)):
        raise InvalidRotation("rotation contains non-finite entries")
    ortho = np.linalg.norm(R @ np.swapaxes(R, -1, -2) - np.eye(3), axis=(-2, -1))
    det = np.linalg.det(R)
    if np.any(ortho > atol) or np.any(np.abs(det - 1.0) > atol):
        raise InvalidRotation(
            f"not a rotation: max ||RR^T - I|| = {np.max(ortho):.3g}, max |det - 1| = {np.max(np.abs(det - 1)):.3g}"
        )
    return R


def check_quaternion(q, atol=1e-9):
    q = np.asarray(q, dtype=float)
    if q.shape[-1] != 4:
        raise InvalidRotation(f"expected (..., 4) array, got shape {q.shape}")
    if np.any(np.abs(np.sum(q * q, axis=-1) - 1.0) > atol):
        raise InvalidRotation("quaternion is not unit norm")
    return q


def haar_angle_cdf(theta):
    """CDF of the rotation angle of a Haar-random rotation, ``(t - sin t) / pi``."""
    theta = np.asarray(theta, dtype=float)
    return (theta - np.sin(theta)) / np.pi
