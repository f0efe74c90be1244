"""Maximum-likelihood fitting of ``A`` by gradient descent with backtracking."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .distributions import CLIP, So3Param, _kind, laplace_log_kernel, SO3_KINDS
from .exceptions import DegenerateSvd, NoProgress
from .grid import hopf_so3_grid
from .so3 import geodesic_distance, proper_svd

DEGENERATE_GAP = 1e-7
MIN_STEP = 1e-12


def _kprime(t):
    """Derivative of ``-sqrt(t) - log(t) / 2``."""
    return -0.5 / np.sqrt(t) - 0.5 / t


def _trace_s(a):
    return float(np.sum(proper_svd(a).s))


def trace_s_gradient(param, h=1e-6):
    """``d tr(S) / dA``.

    Equals ``U V^T`` away from singular-value degeneracy; when
    ``s2 - |s3| < 1e-7`` falls back to central differences and emits
    :class:`DegenerateSvd`.
    """
    s = param.svd.s
    if s[1] - abs(s[2]) >= DEGENERATE_GAP:
        return param.mode
    warnings.warn(f"near-degenerate singular values {s}; using finite differences", DegenerateSvd, stacklevel=3)
    g = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            e = np.zeros((3, 3))
            e[i, j] = h
            g[i, j] = (_trace_s(param.a + e) - _trace_s(param.a - e)) / (2 * h)
    return g


def _as_stack(observations):
    obs = np.asarray(observations, dtype=float)
    if obs.ndim == 2:
        obs = obs[None]
    if obs.ndim != 3 or obs.shape[1:] != (3, 3) or len(obs) == 0:
        raise ValueError("observations must be a non-empty (K, 3, 3) array")
    return obs


class _Objective:
    """Mean NLL over fixed observations on a fixed grid."""

    def __init__(self, kind, observations, grid):
        self.kind = _kind(kind, SO3_KINDS)
        self.obs = _as_stack(observations)
        self.obs_flat = self.obs.reshape(-1, 9)
        self.grid = grid
        self.log_delta = np.log(grid.delta)

    def _grid_terms(self, param):
        inner = self.grid.flat @ param.a.ravel()
        if self.kind == "mf":
            return inner, None
        raw = param.trace_s - inner
        t = np.maximum(CLIP, raw)
        return laplace_log_kernel(t), (t, raw > CLIP)

    def log_f(self, param):
        lu, _ = self._grid_terms(param)
        return float(logsumexp(lu) + self.log_delta)

    def data_terms(self, param):
        """Per-observation log unnormalized density and the clip mask (RL)."""
        inner = self.obs_flat @ param.a.ravel()
        if self.kind == "mf":
            return inner, None
        raw = param.trace_s - inner
        t = np.maximum(CLIP, raw)
        return laplace_log_kernel(t), (t, raw > CLIP)

    def value(self, param):
        lu, _ = self.data_terms(param)
        return float(self.log_f(param) - np.mean(lu))

    def log_f_and_grad(self, param, dtrs=None):
        lu, extra = self._grid_terms(param)
        lse = logsumexp(lu)
        w = np.exp(lu - lse)
        log_f = float(lse + self.log_delta)
        if self.kind == "mf":
            return log_f, (w @ self.grid.flat).reshape(3, 3)
        t, active = extra
        c = w * _kprime(t) * active
        # d t_i / dA = dtr(S)/dA - R_i
        grad = dtrs * c.sum() - (c @ self.grid.flat).reshape(3, 3)
        return log_f, grad

    def per_observation_data_grad(self, param, dtrs=None):
        """``d(-log p_unnorm(R_k)) / dA`` for every observation, shape (K, 3, 3)."""
        lu, extra = self.data_terms(param)
        if self.kind == "mf":
            return -self.obs
        t, active = extra
        c = -_kprime(t) * active
        return c[:, None, None] * (dtrs - self.obs)

    def value_and_grad(self, param):
        dtrs = trace_s_gradient(param) if self.kind == "rl" else None
        log_f, g_f = self.log_f_and_grad(param, dtrs)
        lu, _ = self.data_terms(param)
        g_data = self.per_observation_data_grad(param, dtrs).mean(axis=0)
        return float(log_f - np.mean(lu)), g_data + g_f


def nll(kind, param, observations, grid):
    """Mean negative log-likelihood of the observations."""
    return _Objective(kind, observations, grid).value(param)


def nll_gradient(kind, param, observations, grid):
    """Analytic ``d mean-NLL / dA`` including the normalizer term."""
    return _Objective(kind, observations, grid).value_and_grad(param)[1]


def per_observation_gradients(kind, param, observations, grid):
    """``d NLL_k / dA`` for each observation with a shared ``A``, shape (K, 3, 3)."""
    obj = _Objective(kind, observations, grid)
    dtrs = trace_s_gradient(param) if obj.kind == "rl" else None
    _, g_f = obj.log_f_and_grad(param, dtrs)
    return obj.per_observation_data_grad(param, dtrs) + g_f


@dataclass(frozen=True)
class FitConfig:
    kind: str = "rl"
    level: int = 3
    step: float = 10.0
    max_iter: int = 300
    tol: float = 1e-4
    init: object = "spread"  # "zero", "spread", or an explicit 3x3 array

    def __post_init__(self):
        _kind(self.kind, SO3_KINDS)
        if not self.step > 0:
            raise ValueError("step must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


@dataclass
class FitReport:
    a: np.ndarray
    nll: list = field(default_factory=list)
    grad_norm: float = np.nan
    converged: bool = False
    iterations: int = 0
    stalled: bool = False

    @property
    def param(self):
        return So3Param(self.a)

    @property
    def mode(self):
        return self.param.mode

    def to_dict(self):
        return {
            "A": self.a.tolist(),
            "nll": [float(x) for x in self.nll],
            "grad_norm": float(self.grad_norm),
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
            "stalled": bool(self.stalled),
            "mode": self.mode.tolist(),
        }


def initial_parameter(observations, init="spread"):
    """Starting ``A``: zeros, the projected sample mean (scale 1), or an explicit matrix."""
    if isinstance(init, str):
        if init == "zero":
            return np.zeros((3, 3))
        if init in ("spread", "spread-matched"):
            return proper_svd(np.mean(observations, axis=0)).mode
        raise ValueError(f"unknown init {init!r}")
    return np.array(init, dtype=float).reshape(3, 3)


def fit_mle(observations, config=FitConfig(), grid=None, callback=None):
    """Gradient descent on the mean NLL with step halving on increase.

    The step grows by 1.1 after each accepted move, capped at ``config.step``.
    If the step falls below 1e-12 before any move was accepted,
    :class:`NoProgress` is raised.  A stall after progress (typically the
    iterate sitting on the clipped kink of an observation under the Laplace
    kernel) ends the fit with ``stalled=True`` and ``converged=False``.
    """
    obs = _as_stack(observations)
    if len(obs) < 2:
        raise ValueError("need at least two observations")
    grid = hopf_so3_grid(config.level) if grid is None else grid
    obj = _Objective(config.kind, obs, grid)
    a = initial_parameter(obs, config.init)
    value, grad = obj.value_and_grad(So3Param(a))
    history = [value]
    step = config.step
    gnorm = float(np.linalg.norm(grad))
    converged = gnorm <= config.tol
    it = 0
    stalled = False
    while not converged and it < config.max_iter:
        while True:
            a_new = a - step * grad
            v_new = obj.value(So3Param(a_new))
            if v_new <= value:
                break
            step /= 2.0
            if step < MIN_STEP:
                break
        if step < MIN_STEP:
            if it == 0:
                raise NoProgress(f"backtracking could not decrease the NLL from {value:.6g}")
            stalled = True
            break
        a = a_new
        value, grad = obj.value_and_grad(So3Param(a))
        history.append(value)
        gnorm = float(np.linalg.norm(grad))
        it += 1
        step = min(step * 1.1, config.step)
        if callback is not None:
            callback(it, a, value, gnorm)
        converged = gnorm <= config.tol
    return FitReport(a=a, nll=history, grad_norm=gnorm, converged=converged, iterations=it, stalled=stalled)


def gradient_magnitude_profile(kind, params, observations, grid):
    """Per-observation ``(error in degrees, ||d NLL_k / dA||_F)``.

    ``params`` is one shared :class:`So3Param` or a sequence with one per
    observation; the error is the geodesic distance from that parameter's mode.
    """
    obs = _as_stack(observations)
    if isinstance(params, So3Param):
        g = per_observation_gradients(kind, params, obs, grid)
        err = geodesic_distance(params.mode, obs)
    else:
        params = list(params)
        if len(params) != len(obs):
            raise ValueError("need one parameter per observation")
        g = np.stack([per_observation_gradients(kind, p, r[None], grid)[0] for p, r in zip(params, obs)])
        err = np.array([geodesic_distance(p.mode, r) for p, r in zip(params, obs)])
    return np.column_stack([np.degrees(err), np.linalg.norm(g, axis=(-2, -1))])
