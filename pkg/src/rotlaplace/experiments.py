"""Synthetic robustness, gradient-profile and entropy-vs-error experiments.

Inliers are tangent-space Rotation Laplace draws around a Haar-random ground
truth; outliers replace a fixed fraction of them with Haar-random rotations.
All experiments are deterministic given their seeds.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .distributions import So3Param, entropy, tangent_sample
from .exceptions import DegenerateSvd
from .fit import FitConfig, fit_mle, gradient_magnitude_profile
from .grid import hopf_so3_grid
from .so3 import geodesic_distance, random_rotation

OUTLIER_FRACTIONS = (0.0, 0.01, 0.05, 0.10, 0.30)


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    n: int = 500
    s: float = 10.0
    fraction: float = 0.0
    level: int = 3
    kinds: tuple = ("rl", "mf")

    def __post_init__(self):
        if not 0.0 <= self.fraction < 1.0:
            raise ValueError(f"outlier fraction must be in [0, 1), got {self.fraction}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not self.s > 0:
            raise ValueError("inlier concentration must be positive")


@dataclass
class Dataset:
    ids: list
    rotations: np.ndarray
    truth: np.ndarray
    outlier: np.ndarray = field(default=None)

    def __len__(self):
        return len(self.ids)


def outlier_count(fraction, n):
    """``round(fraction * n)`` with halves rounded up."""
    return int(np.floor(fraction * n + 0.5))


def synth_dataset(config):
    """Draw one dataset.

    The RNG stream is consumed in a fixed order (ground truth, inliers,
    outlier indices, outlier rotations), so a seed shares its ground truth and
    inliers across outlier fractions.
    """
    rng = np.random.default_rng(config.seed)
    truth = random_rotation(rng)
    rot = tangent_sample(So3Param(config.s * np.eye(3)), truth, rng, config.n, kind="rl")
    k = outlier_count(config.fraction, config.n)
    mask = np.zeros(config.n, dtype=bool)
    if k:
        idx = rng.choice(config.n, size=k, replace=False)
        mask[idx] = True
        rot[np.sort(idx)] = random_rotation(rng, k)
    ids = [f"{config.seed}-{i}" for i in range(config.n)]
    return Dataset(ids=ids, rotations=rot, truth=truth, outlier=mask)


def mode_error_deg(report, truth):
    return float(np.degrees(geodesic_distance(report.mode, truth)))


def fit_quiet(observations, config):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateSvd)
        return fit_mle(observations, config)


def _trial(args):
    seed, fraction, n, s, level, kinds, fit_kwargs = args
    data = synth_dataset(ExperimentConfig(seed=seed, n=n, s=s, fraction=fraction, level=level))
    errors = {}
    for kind in kinds:
        rep = fit_quiet(data.rotations, FitConfig(kind=kind, level=level, **fit_kwargs))
        errors[kind] = mode_error_deg(rep, data.truth)
    return seed, fraction, errors


def _run(tasks, jobs):
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_trial, tasks))
    return [_trial(t) for t in tasks]


def compare_trials(fractions=OUTLIER_FRACTIONS, trials=50, n=500, s=10.0, level=3, kinds=("rl", "mf"), jobs=1, **fit_kwargs):
    """Fitted-mode errors (degrees) for every (fraction, seed, kind).

    Returns a list of ``(fraction, kind, seed, error)`` ordered by fraction,
    kind, seed regardless of ``jobs``.
    """
    hopf_so3_grid(level)
    tasks = [(seed, f, n, s, level, tuple(kinds), fit_kwargs) for f in fractions for seed in range(trials)]
    results = _run(tasks, jobs)
    by_key = {(frac, seed): errors for seed, frac, errors in results}
    rows = [(f, kind, seed, by_key[f, seed][kind]) for f in fractions for kind in kinds for seed in range(trials)]
    return rows


def summarize_compare(rows):
    """Rows ``(fraction, kind, median, mean, rl_win_rate)`` from :func:`compare_trials` output."""
    fractions = sorted({r[0] for r in rows})
    kinds = []
    for r in rows:
        if r[1] not in kinds:
            kinds.append(r[1])
    out = []
    for f in fractions:
        per = {k: np.array([r[3] for r in rows if r[0] == f and r[1] == k]) for k in kinds}
        win = float(np.mean(per["rl"] <= per["mf"])) if {"rl", "mf"} <= set(per) else float("nan")
        for k in kinds:
            out.append((f, k, float(np.median(per[k])), float(np.mean(per[k])), win))
    return out


def gradient_profile(kind, param, observations, grid, bin_deg=2.0):
    """Per-observation profile plus 2-degree bins.

    Bins carry ``(lo, hi, count, population_share, grad_sum, grad_share, grad_mean)``;
    the shares are fractions of the total count and total gradient magnitude.
    """
    prof = gradient_magnitude_profile(kind, param, observations, grid)
    edges = np.arange(0.0, 180.0 + bin_deg / 2, bin_deg)
    idx = np.clip(np.digitize(prof[:, 0], edges) - 1, 0, len(edges) - 2)
    count = np.bincount(idx, minlength=len(edges) - 1)
    gsum = np.bincount(idx, weights=prof[:, 1], minlength=len(edges) - 1)
    total = prof[:, 1].sum()
    bins = []
    for b in range(len(edges) - 1):
        mean = gsum[b] / count[b] if count[b] else 0.0
        bins.append((edges[b], edges[b + 1], int(count[b]), count[b] / len(prof), gsum[b], gsum[b] / total, mean))
    return prof, bins


def tail_share_ratio(bins, threshold_deg=170.0):
    """Gradient share of bins starting at or above ``threshold_deg`` over their population share."""
    pop = sum(b[3] for b in bins if b[0] >= threshold_deg)
    grad = sum(b[5] for b in bins if b[0] >= threshold_deg)
    return grad / pop if pop > 0 else float("nan")


def _entropy_trial(args):
    seed, s, n, kind, level, fit_kwargs = args
    data = synth_dataset(ExperimentConfig(seed=seed, n=n, s=s, fraction=0.0, level=level))
    rep = fit_quiet(data.rotations, FitConfig(kind=kind, level=level, **fit_kwargs))
    h = entropy(kind, rep.param, hopf_so3_grid(level))
    return s, seed, h, mode_error_deg(rep, data.truth)


def entropy_vs_error(concentrations=(2.0, 20.0), trials=25, n=500, kind="rl", level=3, jobs=1, **fit_kwargs):
    """Rows ``(s, seed, entropy, error_deg)``; group ``s`` shares seeds with the others."""
    hopf_so3_grid(level)
    tasks = [(seed, s, n, kind, level, fit_kwargs) for s in concentrations for seed in range(trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_entropy_trial, tasks))
    return [_entropy_trial(t) for t in tasks]


def paired_entropy_agreement(rows):
    """Fraction of seeds where the lowest-entropy fit also has the lowest error.

    Returns None when fewer than two groups are present.
    """
    groups = sorted({r[0] for r in rows})
    if len(groups) < 2:
        return None
    by_seed = {}
    for s, seed, h, err in rows:
        by_seed.setdefault(seed, []).append((h, err))
    hits = []
    for fits in by_seed.values():
        best_h = min(fits, key=lambda x: x[0])
        hits.append(best_h[1] == min(e for _, e in fits))
    return float(np.mean(hits))
