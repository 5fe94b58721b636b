import numpy as np
import pytest

from floodbma import gev
from floodbma.errors import DataError
from floodbma.hier import BLOCKS
from floodbma.validation.simulate import benchmark_truth, simulate_dataset, truth_from_metadata


def test_benchmark_truth_layout():
    truth = benchmark_truth()
    assert truth.mu.theta.size == 14
    assert truth.mu.inclusion.sum() == 6
    assert truth.mu.theta[1:6].tolist() == [0.3, -0.3, 0.3, -0.3, 0.3]
    assert truth.mu.theta[0] == 3.0
    assert not truth.xi.inclusion[1:].any()
    with pytest.raises(DataError):
        benchmark_truth(n_covariates=2, n_nonzero=3)


def test_no_random_effects_gives_exact_site_parameters():
    truth = benchmark_truth(n_covariates=3, n_nonzero=2, tau_sd=(0.0, 0.0, 0.0))
    data = simulate_dataset(truth, n_stations=6, n_years=5, seed=1)
    site = data.metadata["site_params"]
    np.testing.assert_allclose(site["mu"], data.X @ truth.mu.theta)
    np.testing.assert_allclose(np.log(site["kappa"]), data.X @ truth.kappa.theta)
    np.testing.assert_allclose(site["xi"], data.X @ truth.xi.theta)


def test_seed_fixes_the_dataset():
    truth = benchmark_truth(n_covariates=4, n_nonzero=2)
    a = simulate_dataset(truth, 5, (20, 40), seed=3)
    b = simulate_dataset(truth, 5, (20, 40), seed=3)
    c = simulate_dataset(truth, 5, (20, 40), seed=4)
    assert [s.annual_maxima for s in a] == [s.annual_maxima for s in b]
    assert [s.annual_maxima for s in a] != [s.annual_maxima for s in c]
    assert all(20 <= n <= 40 for n in a.n_years)


def test_station_means_match_gev_mean():
    truth = benchmark_truth(n_covariates=2, n_nonzero=1)
    data = simulate_dataset(truth, n_stations=4, n_years=20_000, seed=5)
    site = data.metadata["site_params"]
    for s, st in enumerate(data):
        mean = gev.gev_mean(site["mu"][s], site["kappa"][s], site["xi"][s])
        # ~8 standard errors of the sample mean
        assert np.mean(st.annual_maxima) == pytest.approx(mean, abs=0.1 / site["kappa"][s])


def test_truth_round_trip():
    truth = benchmark_truth(n_covariates=2, n_nonzero=1)
    data = simulate_dataset(truth, 4, 10, seed=6)
    back = truth_from_metadata(data)
    for b in BLOCKS:
        np.testing.assert_array_equal(back.block(b).theta, truth.block(b).theta)
        assert back.block(b).tau.size == 4
    assert data.station_ids == ["S001", "S002", "S003", "S004"]


def test_invalid_requests():
    truth = benchmark_truth(n_covariates=2, n_nonzero=1)
    with pytest.raises(DataError):
        simulate_dataset(truth, 1, 10, seed=0)
    with pytest.raises(DataError):
        simulate_dataset(truth, 3, 0, seed=0)
    with pytest.raises(DataError):
        simulate_dataset(truth, 3, 10, seed=0, covariate_names=["only_one"])
    big_xi = benchmark_truth(n_covariates=1, n_nonzero=0, xi0=1.5)
    with pytest.raises(DataError, match="xi"):
        simulate_dataset(big_xi, 3, 10, seed=0)
