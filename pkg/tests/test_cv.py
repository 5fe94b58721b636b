import numpy as np
import pytest

from floodbma.errors import DataError
from floodbma.hier import Priors
from floodbma.mcmc import run_chain
from floodbma.mcmc.models import ChainConfig
from floodbma.validation.cv import (
    BASELINE,
    IN_SAMPLE,
    LOCAL,
    OUT_OF_SAMPLE,
    CvSettings,
    default_folds,
    loo_cross_validate,
    run_fold,
    stability_stats,
    stability_table,
)
from tests.synthetic import fixed_samples, make_dataset


@pytest.fixture
def cfg():
    return ChainConfig(n_iterations=40, n_burnin=10, seed=21)


@pytest.fixture
def settings():
    return CvSettings(return_periods=[10, 50], n_bootstrap=50, sims_per_component=20)


def test_single_fold(small_dataset, cfg, settings):
    result = loo_cross_validate(small_dataset, ["st03"], config=cfg, settings=settings)
    assert len(result.folds) == 1
    fold = result.folds[0]
    assert fold.station_id == "st03"
    assert "st03" not in fold.training_ids
    assert len(fold.training_ids) == small_dataset.n_stations - 1
    assert fold.samples.n_stations == small_dataset.n_stations - 1
    # 30 years ≥ 20: the local model is scored too
    assert set(result.models) == {IN_SAMPLE, OUT_OF_SAMPLE, LOCAL}
    assert len(result.pits_for(OUT_OF_SAMPLE)) == 30
    assert {(s.model_name, s.return_period) for s in result.scores} == {
        (m, t) for m in (IN_SAMPLE, OUT_OF_SAMPLE, LOCAL) for t in (10.0, 50.0)
    }
    assert set(result.in_sample["st03"]) == {10, 50}


def test_baseline_and_no_local(small_dataset, cfg):
    settings = CvSettings(return_periods=[10], n_bootstrap=20, sims_per_component=10, local=False, baseline=True)
    result = loo_cross_validate(small_dataset, ["st00"], config=cfg, settings=settings)
    assert set(result.models) == {IN_SAMPLE, OUT_OF_SAMPLE, BASELINE}
    assert result.folds[0].local_samples is None


def test_short_record_skips_local(cfg, settings):
    data = make_dataset(n_stations=6, n_years=12)
    fold = run_fold(data, "st01", 0, Priors(), cfg, settings)
    assert LOCAL not in fold.predictions
    assert OUT_OF_SAMPLE in fold.predictions


def test_unknown_and_duplicate_folds(small_dataset, cfg, settings):
    with pytest.raises(DataError, match="unknown"):
        loo_cross_validate(small_dataset, ["zz"], config=cfg, settings=settings)
    with pytest.raises(DataError, match="unique"):
        loo_cross_validate(small_dataset, ["st01", "st01"], config=cfg, settings=settings)


def test_full_samples_must_match(small_dataset, cfg, settings):
    other = run_chain(make_dataset(n_stations=5), config=cfg)
    with pytest.raises(DataError):
        loo_cross_validate(small_dataset, ["st01"], config=cfg, settings=settings, full_samples=other)


def test_cv_is_deterministic(small_dataset, cfg, settings):
    a = loo_cross_validate(small_dataset, ["st02"], config=cfg, settings=settings)
    b = loo_cross_validate(small_dataset, ["st02"], config=cfg, settings=settings)
    assert a.scores == b.scores
    assert [p.pit for p in a.pits] == [p.pit for p in b.pits]


def test_parallel_folds_match_serial(small_dataset, cfg, settings):
    folds = ["st01", "st04", "st06"]
    serial = loo_cross_validate(small_dataset, folds, config=cfg, settings=settings)
    parallel = loo_cross_validate(
        small_dataset, folds, config=cfg, settings=settings.model_copy(update={"workers": 2})
    )
    # each fold draws from its own stream, so the pool changes nothing but speed
    assert [f.station_id for f in parallel.folds] == folds
    assert parallel.scores == serial.scores
    assert [p.pit for p in parallel.pits] == [p.pit for p in serial.pits]
    for a, b in zip(serial.folds, parallel.folds):
        np.testing.assert_array_equal(a.samples.theta["mu"], b.samples.theta["mu"])


def test_default_folds_are_stratified():
    data = make_dataset(n_stations=12)
    folds = default_folds(data, 4, seed=1)
    assert len(folds) == 4 == len(set(folds))
    assert set(folds) <= set(data.station_ids)
    assert default_folds(data, 4, seed=1) == folds
    assert len(default_folds(data, 50, seed=1)) == 12


# ---------------------------------------------------------------------------
# stability
# ---------------------------------------------------------------------------
def test_identical_folds_have_zero_spread():
    folds = [fixed_samples(mu=100.0), fixed_samples(mu=100.0), fixed_samples(mu=100.0)]
    summary = stability_stats(folds, 0, "mu")
    assert summary.spread == 0.0
    assert summary.median == pytest.approx(100.0)
    assert summary.covariate == "constant"
    assert stability_stats(folds, "constant", "mu") == summary


def test_stability_quartiles():
    folds = [fixed_samples(mu=m) for m in (1.0, 2.0, 3.0, 4.0, 5.0)]
    s = stability_stats(folds, 0, "mu")
    assert (s.minimum, s.q1, s.median, s.q3, s.maximum) == pytest.approx((1, 2, 3, 4, 5))
    assert s.n_folds == 5


def test_stability_needs_two_folds():
    with pytest.raises(DataError):
        stability_stats([fixed_samples()], 0, "mu")
    with pytest.raises(DataError):
        stability_stats([fixed_samples(), fixed_samples()], 3, "mu")
    with pytest.raises(DataError, match="unknown covariate"):
        stability_stats([fixed_samples(), fixed_samples()], "rainfall", "mu")


def test_stability_table_covers_every_coefficient(small_dataset, cfg):
    folds = [run_chain(small_dataset.without(s), config=cfg) for s in ("st00", "st01")]
    table = stability_table(folds)
    assert len(table) == 3 * small_dataset.n_covariates
    excluded = [s for s in table if s.covariate != "constant"]
    assert all(np.isfinite(s.median) for s in excluded)
