"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Lines are also collected and repeated in the pytest terminal summary.
Thresholds and runtime limits are the stated ones; nothing is relaxed.
"""

import time
import warnings

import numpy as np
import pytest
from scipy import stats

from rotlaplace import distributions as D
from rotlaplace import experiments as X
from rotlaplace.distributions import QuatParam, So3Param
from rotlaplace.exceptions import DegenerateSvd
from rotlaplace.fit import FitConfig, fit_mle, nll, nll_gradient
from rotlaplace.grid import hopf_so3_grid, s3_grid
from rotlaplace.so3 import (
    exp_map,
    geodesic_distance,
    haar_angle_cdf,
    log_map,
    quat_to_rotmat,
    random_rotation,
    rotmat_to_quat,
)

from conftest import ACCEPTANCE_LINES

I3 = np.eye(3)


def report(number, title, checks, elapsed, limit):
    """``checks`` is a list of (label, ok, detail)."""
    timed_ok = elapsed < limit
    ok = all(c[1] for c in checks) and timed_ok
    parts = [f"{label}: {'ok' if good else 'FAIL'} ({detail})" for label, good, detail in checks]
    parts.append(f"runtime {elapsed:.1f}s < {limit:.0f}s: {'ok' if timed_ok else 'FAIL'}")
    line = f"{'PASS' if ok else 'FAIL'} criterion {number} ({title}) | " + "; ".join(parts)
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def random_param(rng, lo, hi):
    U, V = random_rotation(rng, 2)
    return So3Param(U @ np.diag(rng.uniform(lo, hi, 3)) @ V.T)


def test_criterion_1_quaternion_identities():
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(1000):
        p = So3Param(rng.standard_normal((3, 3)))
        R = random_rotation(rng)
        q = rotmat_to_quat(R)
        qp = D.ql_from_rl(p)
        worst = max(worst, abs(-q @ qp.matrix @ q - (p.trace_s - np.trace(p.a.T @ R))))
    grid, sgrid = hopf_so3_grid(3), s3_grid(3)
    ratio_err = 0.0
    for _ in range(100):
        p = random_param(rng, 0.5, 20)
        qp = D.ql_from_rl(p)
        R = random_rotation(rng, 2)
        q = rotmat_to_quat(R)
        lf, lfq = D.log_normalization_factor("rl", p, grid), D.s3_log_normalization_factor("ql", qp, sgrid)
        rl = np.diff(D.log_prob("rl", p, R, grid, log_f=lf))[0]
        ql = np.diff(D.s3_log_prob("ql", qp, q, sgrid, log_f=lfq))[0]
        ratio_err = max(ratio_err, abs(np.exp(ql - rl) - 1))
    report(
        1,
        "quaternion identities",
        [
            ("trace identity <= 1e-8 on 1000 pairs", worst <= 1e-8, f"max {worst:.2e}"),
            ("RL/QL ratio <= 1e-6", ratio_err <= 1e-6, f"max {ratio_err:.2e}"),
        ],
        time.perf_counter() - t0,
        10,
    )


def _tangent_rel_error(kind, p, phi):
    R = p.mode @ exp_map(phi)
    quad = D.tangent_quadratic_form(p, phi)
    if kind == "rl":
        exact = p.trace_s - np.trace(p.a.T @ R)
    else:
        # tr(S) - tr(S V^T R~ V) with R~ = mode^T R
        Rt = p.mode.T @ R
        exact = p.trace_s - np.trace(np.diag(p.svd.s) @ p.svd.v.T @ Rt @ p.svd.v)
    return abs(exact - quad) / quad


def test_criterion_2_tangent_limit():
    t0 = time.perf_counter()
    rng = np.random.default_rng(202)
    norms = [1e-1, 5e-2, 2.5e-2]
    checks = []
    for kind in ("rl", "mf"):
        ratios = []
        for _ in range(100):
            p = random_param(rng, 0.5, 20)
            d = rng.standard_normal(3)
            d /= np.linalg.norm(d)
            errs = [_tangent_rel_error(kind, p, n * d) for n in norms]
            ratios += [errs[1] / errs[0], errs[2] / errs[1]]
        ratios = np.array(ratios)
        ok = np.all((ratios >= 0.35) & (ratios <= 0.65))
        checks.append((f"{kind} error ratio in [0.35, 0.65]", bool(ok), f"observed {ratios.min():.4f}..{ratios.max():.4f}"))
    report(2, "tangent limit", checks, time.perf_counter() - t0, 30)


def test_criterion_3_normalization():
    t0 = time.perf_counter()
    g3, g4 = hopf_so3_grid(3), hopf_so3_grid(4)
    rng = np.random.default_rng(303)
    params = [So3Param(s * I3) for s in (1, 5, 10, 25)]
    params += [random_param(rng, 0, 25) for _ in range(8)]
    worst = {}
    for kind in ("rl", "mf"):
        diffs = []
        for p in params:
            f3 = D.log_normalization_factor(kind, p, g3)
            f4 = D.log_normalization_factor(kind, p, g4)
            diffs.append(abs(np.expm1(f3 - f4)))
        worst[kind] = max(diffs)
    sums = [np.exp(D.grid_log_prob(k, p, g3)).sum() * g3.delta for k in ("rl", "mf") for p in params]
    sum_err = max(abs(s - 1) for s in sums)
    f_mf = D.normalization_factor("mf", So3Param(np.zeros((3, 3))), g3)
    f_bi = D.s3_normalization_factor("bingham", QuatParam(np.eye(4), np.zeros(4)), s3_grid(3))
    report(
        3,
        "normalization",
        [
            ("RL level 3 vs 4 <= 1%", worst["rl"] <= 0.01, f"max {100 * worst['rl']:.2f}%"),
            ("MF level 3 vs 4 <= 1%", worst["mf"] <= 0.01, f"max {100 * worst['mf']:.2f}%"),
            ("sum p dR = 1", sum_err <= 1e-12, f"max dev {sum_err:.1e}"),
            ("MF F(0) = 1", abs(f_mf - 1) <= 1e-12, f"{f_mf!r}"),
            ("Bingham F(0) = 2 pi^2", abs(f_bi / (2 * np.pi**2) - 1) <= 1e-12, f"{f_bi!r}"),
        ],
        time.perf_counter() - t0,
        120,
    )


def test_criterion_4_gradient():
    t0 = time.perf_counter()
    grid = hopf_so3_grid(3)
    rng = np.random.default_rng(404)
    h = 1e-5
    checks = []
    for kind in ("rl", "mf"):
        worst = 0.0
        for _ in range(100):
            p = random_param(rng, 1, 5)
            obs = p.mode @ exp_map(rng.normal(scale=0.6, size=(20, 3)))
            g = nll_gradient(kind, p, obs, grid)
            fd = np.zeros((3, 3))
            for i in range(3):
                for j in range(3):
                    e = np.zeros((3, 3))
                    e[i, j] = h
                    fd[i, j] = (nll(kind, So3Param(p.a + e), obs, grid) - nll(kind, So3Param(p.a - e), obs, grid)) / (2 * h)
            worst = max(worst, np.abs(g - fd).max() / np.abs(fd).max())
        checks.append((f"{kind} max relative error <= 1e-4", worst <= 1e-4, f"{worst:.2e}"))
    report(4, "gradient", checks, time.perf_counter() - t0, 60)


def test_criterion_5_robustness():
    t0 = time.perf_counter()
    fractions = X.OUTLIER_FRACTIONS
    rows = X.compare_trials(fractions=fractions, trials=50, n=500, s=10.0, level=3)
    table = {(f, k): (med, win) for f, k, med, _, win in X.summarize_compare(rows)}
    medians_ok = all(table[f, "rl"][0] <= table[f, "mf"][0] for f in fractions)
    med_text = ", ".join(f"f={f}: {table[f, 'rl'][0]:.2f} vs {table[f, 'mf'][0]:.2f}" for f in fractions)
    win = table[0.30, "rl"][1]
    deg_rl = table[0.30, "rl"][0] - table[0.0, "rl"][0]
    deg_mf = table[0.30, "mf"][0] - table[0.0, "mf"][0]
    report(
        5,
        "robustness",
        [
            ("RL median <= MF median at every f", medians_ok, med_text),
            ("RL win rate at f=0.30 >= 90%", win >= 0.9, f"{100 * win:.0f}%"),
            ("RL degradation <= 60% of MF", deg_rl <= 0.6 * deg_mf, f"{deg_rl:.2f} vs {deg_mf:.2f} deg"),
        ],
        time.perf_counter() - t0,
        300,
    )


def test_criterion_6_gradient_profile():
    t0 = time.perf_counter()
    grid = hopf_so3_grid(3)
    data = X.synth_dataset(X.ExperimentConfig(seed=0, n=500, s=10.0, fraction=0.30))
    ratios = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateSvd)
        for kind in ("mf", "rl"):
            rep = fit_mle(data.rotations, FitConfig(kind=kind, level=3), grid=grid)
            _, bins = X.gradient_profile(kind, rep.param, data.rotations, grid)
            ratios[kind] = (X.tail_share_ratio(bins, 170.0), rep.converged)
    report(
        6,
        "gradient profile",
        [
            ("MF >=170 deg share ratio >= 3", ratios["mf"][0] >= 3, f"{ratios['mf'][0]:.2f}, fit converged={ratios['mf'][1]}"),
            ("RL >=170 deg share ratio <= 1.5", ratios["rl"][0] <= 1.5, f"{ratios['rl'][0]:.2f}, fit converged={ratios['rl'][1]}"),
        ],
        time.perf_counter() - t0,
        60,
    )


def test_criterion_7_entropy():
    t0 = time.perf_counter()
    grid = hopf_so3_grid(3)
    checks = []
    for kind in ("rl", "mf"):
        h = [D.entropy(kind, So3Param(s * I3), grid) for s in (1, 2, 5, 10, 20)]
        checks.append((f"{kind} entropy strictly decreasing", bool(np.all(np.diff(h) < 0)), " > ".join(f"{x:.2f}" for x in h)))
    rows = X.entropy_vs_error(concentrations=(2.0, 20.0), trials=25, n=500, kind="rl", level=3)
    agree = X.paired_entropy_agreement(rows)
    checks.append(("low-entropy fit has lower error in >= 80% of 25 pairs", agree >= 0.8, f"{100 * agree:.0f}%"))
    report(7, "entropy vs uncertainty", checks, time.perf_counter() - t0, 120)


def test_criterion_8_core_geometry():
    t0 = time.perf_counter()
    rng = np.random.default_rng(808)
    phi = rng.standard_normal((1000, 3))
    phi *= (rng.uniform(0, np.pi - 1e-6, 1000) / np.linalg.norm(phi, axis=1))[:, None]
    R = random_rotation(rng, 1000)
    log_exp = np.abs(log_map(exp_map(phi)) - phi).max()
    exp_log = np.abs(exp_map(log_map(R)) - R).max()
    quat = np.abs(quat_to_rotmat(rotmat_to_quat(R)) - R).max()
    counts = [len(hopf_so3_grid(L)) for L in range(4)]
    p_rot = stats.kstest(geodesic_distance(I3, random_rotation(rng, 100_000)), haar_angle_cdf).pvalue
    p_grid = stats.kstest(geodesic_distance(I3, hopf_so3_grid(2).points), haar_angle_cdf).pvalue
    report(
        8,
        "core geometry",
        [
            ("log(exp) roundtrip", log_exp <= 1e-7, f"{log_exp:.1e}"),
            ("exp(log) roundtrip", exp_log <= 1e-7, f"{exp_log:.1e}"),
            ("quaternion roundtrip", quat <= 1e-8, f"{quat:.1e}"),
            ("grid counts 72*8^L", counts == [72 * 8**L for L in range(4)] and counts[3] == 36864, str(counts)),
            ("random_rotation Haar KS p > 0.01", p_rot > 0.01, f"p={p_rot:.3f}"),
            ("level-2 grid Haar KS p > 0.01", p_grid > 0.01, f"p={p_grid:.3f}"),
        ],
        time.perf_counter() - t0,
        30,
    )


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
