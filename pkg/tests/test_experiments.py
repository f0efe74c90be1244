import numpy as np
import pytest

from rotlaplace import experiments as X
from rotlaplace.distributions import So3Param


def test_outlier_count_rounding():
    assert X.outlier_count(0.30, 1000) == 300
    assert X.outlier_count(0.01, 50) == 1  # 0.5 rounds up
    assert X.outlier_count(0.0, 500) == 0


def test_config_validation():
    with pytest.raises(ValueError):
        X.ExperimentConfig(fraction=1.0)
    with pytest.raises(ValueError):
        X.ExperimentConfig(fraction=-0.1)
    with pytest.raises(ValueError):
        X.ExperimentConfig(n=0)


def test_synth_counts_and_pairing():
    clean = X.synth_dataset(X.ExperimentConfig(seed=4, n=1000, fraction=0.0))
    dirty = X.synth_dataset(X.ExperimentConfig(seed=4, n=1000, fraction=0.3))
    assert not clean.outlier.any()
    assert dirty.outlier.sum() == 300
    np.testing.assert_array_equal(clean.truth, dirty.truth)
    np.testing.assert_array_equal(clean.rotations[~dirty.outlier], dirty.rotations[~dirty.outlier])
    assert len(dirty) == 1000


def test_compare_trials_order_and_jobs():
    kw = dict(fractions=(0.0, 0.3), trials=3, n=100, level=1)
    rows = X.compare_trials(**kw)
    assert [(r[0], r[1], r[2]) for r in rows] == [(f, k, s) for f in (0.0, 0.3) for k in ("rl", "mf") for s in range(3)]
    assert X.compare_trials(jobs=2, **kw) == rows
    table = X.summarize_compare(rows)
    assert len(table) == 4
    assert all(0 <= t[4] <= 1 for t in table)


def test_gradient_profile_bins(grid2):
    data = X.synth_dataset(X.ExperimentConfig(seed=1, n=200, fraction=0.3))
    prof, bins = X.gradient_profile("mf", So3Param(5 * data.truth), data.rotations, grid2)
    assert len(bins) == 90
    assert bins[0][0] == 0 and bins[-1][1] == 180
    assert sum(b[2] for b in bins) == 200
    assert sum(b[5] for b in bins) == pytest.approx(1.0)
    assert sum(b[3] for b in bins) == pytest.approx(1.0)
    assert np.all((prof[:, 0] >= 0) & (prof[:, 0] <= 180))
    assert X.tail_share_ratio(bins, 170) > 1


def test_paired_entropy_agreement():
    rows = [(2.0, 0, -1.0, 5.0), (20.0, 0, -3.0, 1.0), (2.0, 1, -1.0, 1.0), (20.0, 1, -3.0, 2.0)]
    assert X.paired_entropy_agreement(rows) == 0.5
    assert X.paired_entropy_agreement(rows[:1] + rows[2:3]) is None
