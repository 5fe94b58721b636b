import numpy as np
import pytest

from floodbma.errors import DataError, NumericError
from floodbma.hier import BLOCKS, Dataset, Priors, Station
from floodbma.mcmc import Sampler, run_chain
from floodbma.mcmc.diagnostics import effective_sample_size, geweke_z, mc_standard_error
from floodbma.mcmc.models import ChainConfig, PosteriorSamples
from floodbma.validation.simulate import benchmark_truth, simulate_dataset, truth_from_metadata
from tests.synthetic import make_dataset


def _assert_same(a: PosteriorSamples, b: PosteriorSamples):
    for key, value in a.arrays().items():
        np.testing.assert_array_equal(value, b.arrays()[key], err_msg=key)


def test_chain_shapes_and_invariants(small_dataset, short_chain):
    samples = run_chain(small_dataset, config=short_chain)
    R, p, S = short_chain.n_retained, small_dataset.n_covariates, small_dataset.n_stations
    assert len(samples) == R == 40
    assert samples.theta["mu"].shape == (R, p)
    assert samples.tau["xi"].shape == (R, S)
    for b in BLOCKS:
        assert samples.inclusion[b][:, 0].all()
        assert np.all(samples.theta[b][~samples.inclusion[b]] == 0.0)
        assert np.all(samples.alpha[b] > 0)
    assert np.all(np.isfinite(samples.log_posterior))
    for s in range(S):
        _, kappa, xi = samples.site_parameters(s)
        assert np.all(kappa > 0)
        assert np.all(np.abs(xi) < short_chain.xi_bound)


def test_chain_is_deterministic(small_dataset, short_chain):
    _assert_same(run_chain(small_dataset, config=short_chain), run_chain(small_dataset, config=short_chain))


def test_seed_changes_the_chain(small_dataset, short_chain):
    a = run_chain(small_dataset, config=short_chain)
    b = run_chain(small_dataset, config=short_chain.model_copy(update={"seed": 12}))
    assert not np.array_equal(a.theta["mu"], b.theta["mu"])


def test_thinning_and_max_draws(small_dataset):
    cfg = ChainConfig(n_iterations=50, n_burnin=10, thin=4, seed=1)
    assert len(run_chain(small_dataset, config=cfg)) == 10
    capped = ChainConfig(n_iterations=50, n_burnin=10, max_draws=5, seed=1)
    assert len(run_chain(small_dataset, config=capped)) == 5


def test_callback_sees_every_iteration(small_dataset, short_chain):
    seen = []
    run_chain(small_dataset, config=short_chain, callback=seen.append)
    assert seen == list(range(1, short_chain.n_iterations + 1))


def test_acceptance_rates_reported(small_dataset, short_chain):
    samples = run_chain(small_dataset, config=short_chain)
    for key in ("tau.mu", "tau.kappa", "theta.xi", "birth.mu"):
        assert 0.0 <= samples.acceptance_rates[key] <= 1.0
    assert samples.acceptance_rates["tau.kappa"] > 0.1


def test_without_centered_moves(small_dataset, short_chain):
    cfg = short_chain.model_copy(update={"centered_moves": False})
    samples = run_chain(small_dataset, config=cfg)
    assert not any(k.startswith(("centered.", "swap.")) for k in samples.acceptance_rates)


def test_checkpoint_resume_matches_uninterrupted_run(tmp_path, small_dataset, short_chain):
    full = run_chain(small_dataset, config=short_chain)

    first = Sampler(small_dataset, config=short_chain)
    first.run(until=35, checkpoint_path=tmp_path / "checkpoint")
    assert (tmp_path / "checkpoint.json").exists()
    assert (tmp_path / "checkpoint.npz").exists()

    resumed = Sampler.from_checkpoint(tmp_path / "checkpoint.json", small_dataset)
    assert resumed.iteration == 35
    _assert_same(full, resumed.run())


def test_periodic_checkpoints(tmp_path, small_dataset):
    cfg = ChainConfig(n_iterations=30, n_burnin=5, checkpoint_every=10, seed=3)
    sampler = Sampler(small_dataset, config=cfg)
    sampler.run(until=20, checkpoint_path=tmp_path / "cp")
    resumed = Sampler.from_checkpoint(tmp_path / "cp", small_dataset)
    assert resumed.n_stored == 15


def test_checkpoint_refuses_other_stations(tmp_path, small_dataset, short_chain):
    Sampler(small_dataset, config=short_chain).checkpoint(tmp_path / "cp")
    other = make_dataset(n_stations=5)
    with pytest.raises(DataError):
        Sampler.from_checkpoint(tmp_path / "cp", other)


def test_samples_round_trip_through_parts(small_dataset, short_chain):
    samples = run_chain(small_dataset, config=short_chain)
    clone = PosteriorSamples.from_parts(samples.header(), samples.arrays())
    _assert_same(samples, clone)
    assert clone.config == samples.config
    state = clone.draw(3)
    np.testing.assert_array_equal(state.kappa.tau, samples.tau["kappa"][3])


def test_summaries(small_dataset, short_chain):
    samples = run_chain(small_dataset, config=short_chain)
    probs = samples.inclusion_probabilities()
    assert probs["mu"][0] == 1.0
    summary = samples.theta_summary(0.9)
    assert np.all(summary["mu"]["lo"] <= summary["mu"]["hi"])


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------
def test_mc_standard_error_of_iid_noise():
    x = np.random.default_rng(0).normal(size=10_000)
    assert mc_standard_error(x) == pytest.approx(0.01, rel=0.3)
    assert effective_sample_size(x) == pytest.approx(10_000, rel=0.5)


def test_ess_of_autocorrelated_trace():
    gen = np.random.default_rng(2)
    rho, n = 0.8, 20_000
    x = np.empty(n)
    x[0] = gen.normal()
    for t in range(1, n):
        x[t] = rho * x[t - 1] + np.sqrt(1 - rho**2) * gen.normal()
    assert effective_sample_size(x) == pytest.approx(n * (1 - rho) / (1 + rho), rel=0.3)
    assert mc_standard_error(x) == pytest.approx(np.sqrt((1 + rho) / (1 - rho) / n), rel=0.3)


def test_constant_trace():
    assert effective_sample_size(np.ones(50)) == 50.0
    assert mc_standard_error(np.ones(50)) == 0.0
    assert geweke_z(np.ones(100)) == 0.0


def test_geweke():
    gen = np.random.default_rng(1)
    assert abs(geweke_z(gen.normal(size=5000))) < 4
    drift = np.linspace(0, 10, 2000) + gen.normal(size=2000)
    assert abs(geweke_z(drift)) > 4


def test_diagnostics_reject_bad_traces():
    with pytest.raises(NumericError):
        mc_standard_error([1.0, 2.0])
    with pytest.raises(NumericError):
        geweke_z(np.r_[np.ones(30), np.nan])
    with pytest.raises(ValueError):
        geweke_z(np.ones(100), first=0.6, last=0.6)


# ---------------------------------------------------------------------------
# posterior behaviour on data with a known answer
# ---------------------------------------------------------------------------
@pytest.mark.slow
def test_recovers_strong_location_effect():
    truth = benchmark_truth(n_covariates=3, n_nonzero=1, mu_effect=0.6, kappa_effect=0.0)
    data = simulate_dataset(truth, n_stations=30, n_years=40, seed=8)
    cfg = ChainConfig(n_iterations=3000, n_burnin=1000, seed=8, log_every=500)
    samples = run_chain(data, config=cfg)
    probs = samples.inclusion_probabilities()
    assert probs["mu"][1] > 0.9
    assert samples.theta["mu"][:, 1].mean() == pytest.approx(0.6, abs=0.15)
    assert samples.theta["mu"][:, 0].mean() == pytest.approx(3.0, abs=0.2)


@pytest.mark.slow
def test_chain_started_at_truth_stays_stationary():
    truth = benchmark_truth(n_covariates=3, n_nonzero=2)
    data = simulate_dataset(truth, n_stations=20, n_years=40, seed=13)
    cfg = ChainConfig(n_iterations=4000, n_burnin=0, seed=13, log_every=1000)
    samples = Sampler(data, config=cfg, state=truth_from_metadata(data)).run()
    assert abs(geweke_z(samples.log_posterior)) < 3


def _with_flat_covariate(data: Dataset) -> Dataset:
    stations = [
        Station(id=st.id, annual_maxima=st.annual_maxima, covariates=[*st.covariates, 0.0]) for st in data
    ]
    return Dataset(stations, [*data.covariate_names, "flat"], [*data.standardization, (0.0, 1.0)])


@pytest.mark.parametrize("prob", [0.3, 0.7])
def test_flat_covariate_inclusion_follows_the_prior(prob):
    truth = benchmark_truth(n_covariates=1, n_nonzero=1)
    data = _with_flat_covariate(simulate_dataset(truth, n_stations=10, n_years=20, seed=14))
    cfg = ChainConfig(n_iterations=2000, n_burnin=200, seed=14)
    samples = run_chain(data, Priors(inclusion_prob=prob), cfg)
    freq = samples.inclusion_probabilities()
    for b in BLOCKS:
        # a covariate that is 0 everywhere leaves the likelihood unchanged
        assert freq[b][-1] == pytest.approx(prob, abs=0.05), b
        assert np.all(samples.theta[b][~samples.inclusion[b][:, -1], -1] == 0.0)
