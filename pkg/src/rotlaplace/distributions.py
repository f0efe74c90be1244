"""Rotation Laplace, matrix Fisher, Quaternion Laplace and Bingham densities.

SO(3) distributions (``"rl"``, ``"mf"``) are parameterized by an unconstrained
3x3 matrix ``A`` and normalized on a :class:`~rotlaplace.grid.So3Grid`
against the Haar measure scaled to total mass one.  S^3 distributions
(``"ql"``, ``"bingham"``) use ``(M, z)`` and an :class:`~rotlaplace.grid.S3Grid`
whose weights sum to ``2 pi^2``.

All normalizers are computed in the log domain.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .exceptions import DegenerateConcentration, SingularAtOrigin
from .so3 import (
    ProperSvd,
    exp_map,
    log_map,
    proper_svd,
    quat_conjugate,
    quat_left_matrix,
    quat_right_matrix,
    rotmat_to_quat,
)

CLIP = 1e-8
SO3_KINDS = ("rl", "mf")
S3_KINDS = ("ql", "bingham")


def _kind(kind, allowed):
    k = str(kind).lower()
    if k not in allowed:
        raise ValueError(f"unknown distribution kind {kind!r}; expected one of {allowed}")
    return k


@dataclass(frozen=True, eq=False)
class So3Param:
    """Parameter ``A`` of the SO(3) distributions with a lazily cached proper SVD."""

    a: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=float).reshape(3, 3)
        if not np.all(np.isfinite(a)):
            raise ValueError("parameter A must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @functools.cached_property
    def svd(self) -> ProperSvd:
        return proper_svd(self.a)

    @property
    def mode(self):
        return self.svd.mode

    @property
    def trace_s(self):
        return float(np.sum(self.svd.s))


@dataclass(frozen=True, eq=False)
class QuatParam:
    """``(M, z)`` with ``M`` orthogonal 4x4 and ``z = (0, z1, z2, z3)``, ``0 >= z1 >= z2 >= z3``."""

    m: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=float).reshape(4, 4)
        z = np.array(self.z, dtype=float).reshape(4)
        if np.linalg.norm(m.T @ m - np.eye(4)) > 1e-8:
            raise ValueError("M must be orthogonal")
        if z[0] != 0.0 or np.any(np.diff(z) > 1e-12):
            raise ValueError("z must be (0, z1, z2, z3) with 0 >= z1 >= z2 >= z3")
        m.setflags(write=False)
        z.setflags(write=False)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "z", z)

    @property
    def matrix(self):
        """``M Z M^T``."""
        return (self.m * self.z) @ self.m.T

    @property
    def mode(self):
        return self.m[:, 0]


# --------------------------------------------------------------------------
# unnormalized log densities


def laplace_log_kernel(t):
    """``-sqrt(t) - log(t) / 2`` with ``t`` already clipped."""
    return -np.sqrt(t) - 0.5 * np.log(t)


def rl_trace_term(param, R):
    """Clipped ``max(1e-8, tr(S - A^T R))``; broadcasts over ``R``."""
    R = np.asarray(R, dtype=float)
    raw = param.trace_s - np.einsum("ij,...ij->...", param.a, R)
    return np.maximum(CLIP, raw)


def rl_log_unnormalized(param, R):
    return laplace_log_kernel(rl_trace_term(param, R))


def mf_log_unnormalized(param, R):
    R = np.asarray(R, dtype=float)
    return np.einsum("ij,...ij->...", param.a, R)


def log_unnormalized(kind, param, R):
    kind = _kind(kind, SO3_KINDS)
    if kind == "rl":
        return rl_log_unnormalized(param, R)
    return mf_log_unnormalized(param, R)


def _grid_log_unnormalized(kind, param, grid):
    kind = _kind(kind, SO3_KINDS)
    inner = grid.flat @ param.a.ravel()
    if kind == "mf":
        return inner
    return laplace_log_kernel(np.maximum(CLIP, param.trace_s - inner))


def log_normalization_factor(kind, param, grid):
    """``log F`` with ``F = sum_i exp(log_unnormalized(R_i)) * dR_i`` (log-sum-exp)."""
    return float(logsumexp(_grid_log_unnormalized(kind, param, grid)) + np.log(grid.delta))


def normalization_factor(kind, param, grid):
    return float(np.exp(log_normalization_factor(kind, param, grid)))


def log_prob(kind, param, R, grid, log_f=None):
    """Log density w.r.t. the unit-mass Haar measure; ``log_f`` may be precomputed."""
    if log_f is None:
        log_f = log_normalization_factor(kind, param, grid)
    return log_unnormalized(kind, param, R) - log_f


def prob(kind, param, R, grid):
    return np.exp(log_prob(kind, param, R, grid))


def nll_loss(kind, param, R, grid):
    return -log_prob(kind, param, R, grid)


def grid_log_prob(kind, param, grid):
    """Normalized log density at every grid point."""
    lu = _grid_log_unnormalized(kind, param, grid)
    return lu - (logsumexp(lu) + np.log(grid.delta))


def mode(kind, param):
    """``U V^T`` of the proper SVD; identical for both SO(3) kinds."""
    _kind(kind, SO3_KINDS)
    return param.mode


def entropy(kind, param, grid):
    """Discretized differential entropy ``-sum p_i log p_i dR_i``.

    ``kind`` may be an SO(3) kind with a :class:`So3Param` and SO(3) grid, or
    an S^3 kind with a :class:`QuatParam` and S^3 grid.
    """
    k = str(kind).lower()
    if k in S3_KINDS:
        lp = s3_grid_log_prob(k, param, grid)
    else:
        lp = grid_log_prob(k, param, grid)
    p = np.exp(lp)
    return float(-np.sum(p * lp) * grid.delta)


# --------------------------------------------------------------------------
# tangent-space approximation


def tangent_covariance(param, kind="rl"):
    """Covariance of the tangent-space limit at the mode.

    ``4 V diag(1/(s2+s3), 1/(s1+s3), 1/(s1+s2)) V^T`` for Rotation Laplace and
    the same without the factor 4 for matrix Fisher.
    """
    kind = _kind(kind, SO3_KINDS)
    s = param.svd.s
    pair = np.array([s[1] + s[2], s[0] + s[2], s[0] + s[1]])
    if np.any(pair <= 1e-12):
        raise DegenerateConcentration(f"pair sums of singular values must be positive, got {pair}")
    V = param.svd.v
    scale = 4.0 if kind == "rl" else 1.0
    sigma = scale * (V / pair) @ V.T
    return 0.5 * (sigma + sigma.T)


def tangent_quadratic_form(param, phi):
    """``phi^T V diag(s2+s3, s1+s3, s1+s2) V^T phi / 2``, the local trace-term model."""
    s = param.svd.s
    pair = np.array([s[1] + s[2], s[0] + s[2], s[0] + s[1]])
    mu = np.asarray(phi, dtype=float) @ param.svd.v
    return 0.5 * np.sum(pair * mu * mu, axis=-1)


def tangent_laplace_log_density(phi, sigma):
    """Normalized log density of the 3D multivariate Laplace with covariance ``sigma``.

    With ``q = x^T sigma^{-1} x`` the kernel is ``exp(-sqrt(2 q)) / sqrt(q)``.
    Substituting ``y = sigma^{-1/2} x`` and integrating in spherical shells,
    ``int exp(-sqrt2 r) / r * 4 pi r^2 dr = 4 pi / 2 = 2 pi``, so the constant is
    ``1 / (2 pi sqrt(det sigma))``.  This agrees with the general Bessel form
    because ``K_{1/2}(x) = sqrt(pi / (2x)) exp(-x)``.
    """
    phi = np.asarray(phi, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if np.any(np.linalg.norm(phi, axis=-1) < 1e-12):
        raise SingularAtOrigin("tangent Laplace density is singular at phi = 0")
    q = np.einsum("...i,ij,...j->...", phi, np.linalg.inv(sigma), phi)
    _, logdet = np.linalg.slogdet(sigma)
    return -np.sqrt(2.0 * q) - 0.5 * np.log(q) - np.log(2.0 * np.pi) - 0.5 * logdet


def tangent_laplace_density(phi, sigma):
    return np.exp(tangent_laplace_log_density(phi, sigma))


def tangent_laplace_kernel(phi, sigma):
    """Unnormalized ``exp(-sqrt(2 q)) / sqrt(q)``."""
    return tangent_laplace_density(phi, sigma) * 2.0 * np.pi * np.sqrt(np.linalg.det(sigma))


# --------------------------------------------------------------------------
# quaternion distributions


def ql_from_rl(param):
    """``(M, z)`` whose Quaternion Laplace density matches ``RL(A)`` under the double cover.

    ``M^T q = conj(u) q v`` with ``u, v`` the quaternions of the proper-SVD
    factors, and ``z = -2 (0, s2+s3, s1+s3, s1+s2)``.  Then
    ``-q^T M Z M^T q == tr(S - A^T R)``.  The same pair gives the Bingham
    equivalent of ``MF(A)`` since ``q^T M Z M^T q == tr(A^T R) - tr(S)``.
    """
    svd = param.svd
    u = rotmat_to_quat(svd.u)
    v = rotmat_to_quat(svd.v)
    mt = quat_left_matrix(quat_conjugate(u)) @ quat_right_matrix(v)
    s = svd.s
    z = -2.0 * np.array([0.0, s[1] + s[2], s[0] + s[2], s[0] + s[1]])
    z[0] = 0.0
    return QuatParam(m=mt.T, z=z)


bingham_from_mf = ql_from_rl


def _quadratic(param, q):
    q = np.asarray(q, dtype=float)
    return np.einsum("...i,ij,...j->...", q, param.matrix, q)


def ql_log_unnormalized(param, q):
    return laplace_log_kernel(np.maximum(CLIP, -_quadratic(param, q)))


def bingham_log_unnormalized(param, q):
    return _quadratic(param, q)


def s3_log_unnormalized(kind, param, q):
    kind = _kind(kind, S3_KINDS)
    if kind == "ql":
        return ql_log_unnormalized(param, q)
    return bingham_log_unnormalized(param, q)


def s3_log_normalization_factor(kind, param, grid):
    lu = s3_log_unnormalized(kind, param, grid.points)
    return float(logsumexp(lu) + np.log(grid.delta))


def s3_normalization_factor(kind, param, grid):
    return float(np.exp(s3_log_normalization_factor(kind, param, grid)))


def s3_log_prob(kind, param, q, grid, log_f=None):
    if log_f is None:
        log_f = s3_log_normalization_factor(kind, param, grid)
    return s3_log_unnormalized(kind, param, q) - log_f


def s3_grid_log_prob(kind, param, grid):
    lu = s3_log_unnormalized(kind, param, grid.points)
    return lu - (logsumexp(lu) + np.log(grid.delta))


# --------------------------------------------------------------------------
# sampling


def sample(kind, param, grid, rng, n):
    """Draw ``n`` rotations: categorical over grid cells, then jitter inside the cell.

    The jitter is ``exp`` of a tangent vector uniform in the ball of radius
    ``grid.cell_radius``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    lp = grid_log_prob(kind, param, grid)
    w = np.exp(lp) * grid.delta
    w /= w.sum()
    idx = rng.choice(len(grid), size=n, p=w)
    direction = rng.standard_normal((n, 3))
    direction /= np.linalg.norm(direction, axis=-1, keepdims=True)
    radius = grid.cell_radius * rng.random(n) ** (1.0 / 3.0)
    return grid.points[idx] @ exp_map(direction * radius[:, None])


def tangent_sample(param, mode_R, rng, n, kind="rl"):
    """Approximate sampler from the tangent-space limit at ``mode_R``.

    ``kind="rl"`` draws ``phi = sqrt(W) L g`` (``W ~ Exp(1)``, ``g ~ N(0, I)``,
    ``L L^T = Sigma``), a multivariate Laplace with covariance ``Sigma``;
    ``kind="mf"`` draws ``phi = L g``.  Draws with ``||phi|| >= pi`` are redrawn.
    """
    kind = _kind(kind, SO3_KINDS)
    L = np.linalg.cholesky(tangent_covariance(param, kind))
    out = np.empty((0, 3))
    while len(out) < n:
        m = n - len(out)
        g = rng.standard_normal((m, 3)) @ L.T
        if kind == "rl":
            g *= np.sqrt(rng.standard_exponential(m))[:, None]
        g = g[np.linalg.norm(g, axis=-1) < np.pi]
        out = np.concatenate([out, g])
    return np.asarray(mode_R, dtype=float) @ exp_map(out)


def tangent_coordinates(mode_R, R):
    """``log(mode_R^T R)``."""
    return log_map(np.swapaxes(np.asarray(mode_R), -1, -2) @ R)
