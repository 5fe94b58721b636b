import numpy as np
import pytest

from floodbma.hier import BLOCKS, Priors, site_arrays
from floodbma.mcmc import initial_state
from floodbma.mcmc.models import AcceptanceTracker, ChainConfig
from floodbma.mcmc.updates import (
    conditional_log_likelihoods,
    linear_predictors,
    update_alpha,
    update_centered,
    update_inclusion,
    update_tau,
    update_theta,
)
from tests.synthetic import make_dataset


@pytest.fixture
def data():
    return make_dataset(n_stations=10, n_years=25, seed=5)


@pytest.fixture
def state(data):
    st = initial_state(data)
    st.mu.tau[:] = np.linspace(-3, 3, data.n_stations)
    return st


def _assert_valid(state):
    for b in BLOCKS:
        blk = state.block(b)
        blk.validate()


def test_initial_state(data):
    st = initial_state(data)
    _assert_valid(st)
    assert st.xi.theta[0] == 0.0
    assert st.xi.alpha == 100.0
    assert st.mu.theta[0] == pytest.approx(np.mean([np.mean(s.annual_maxima) for s in data]), rel=0.2)
    assert not st.mu.inclusion[1:].any()


def test_xi_bound_rejects_through_likelihood(data, state):
    lin = linear_predictors(state, data.X)
    lin["xi"] = np.full(data.n_stations, 0.0)
    lin["xi"][0] = 1.2
    ll = conditional_log_likelihoods(data, lin, xi_bound=1.0)
    assert ll[0] == -np.inf


@pytest.mark.parametrize("block", BLOCKS)
def test_tau_update_does_not_mutate_input(data, state, block):
    before = state.block(block).tau.copy()
    tracker = AcceptanceTracker()
    new = update_tau(block, state, data, Priors(), np.random.default_rng(0), tracker=tracker)
    np.testing.assert_array_equal(state.block(block).tau, before)
    assert new.block(block).tau.shape == before.shape
    assert tracker.attempts[f"tau.{block}"] == data.n_stations
    _assert_valid(new)


@pytest.mark.parametrize("block", BLOCKS)
def test_theta_update_keeps_exclusions(data, state, block):
    state.block(block).inclusion[2] = True
    state.block(block).theta[2] = 0.01
    new = update_theta(block, state, data, Priors(), np.random.default_rng(1))
    blk = new.block(block)
    assert blk.inclusion.tolist() == [True, False, True]
    assert blk.theta[1] == 0.0
    _assert_valid(new)


@pytest.mark.parametrize("block", ["mu", "kappa"])
def test_inclusion_certain_prior_turns_everything_on(data, state, block):
    priors = Priors(inclusion_prob=1.0)
    tracker = AcceptanceTracker()
    new = update_inclusion(block, state, data, priors, np.random.default_rng(2), tracker=tracker)
    assert new.block(block).inclusion.all()
    assert tracker.attempts[f"birth.{block}"] == data.n_covariates - 1
    # and nothing is ever removed again
    again = update_inclusion(block, new, data, priors, np.random.default_rng(3))
    assert again.block(block).inclusion.all()


def test_inclusion_never_touches_intercept(data, state):
    rng = np.random.default_rng(4)
    for _ in range(20):
        state = update_inclusion("mu", state, data, Priors(), rng)
        assert state.mu.inclusion[0]
        _assert_valid(state)


@pytest.mark.parametrize("block", BLOCKS)
def test_centered_moves_leave_site_parameters_unchanged(data, state, block):
    state.block(block).inclusion[1] = True
    state.block(block).theta[1] = 0.3
    before = site_arrays(state, data.X)
    rng = np.random.default_rng(5)
    new = state
    for _ in range(10):
        new = update_centered(block, new, data, Priors(), rng)
        _assert_valid(new)
    after = site_arrays(new, data.X)
    for a, b in zip(before, after):
        np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-10)


def test_centered_moves_toggle_inclusion(data, state):
    rng = np.random.default_rng(6)
    seen = set()
    for _ in range(200):
        state = update_centered("mu", state, data, Priors(), rng)
        seen.add(bool(state.mu.inclusion[1]))
    assert seen == {True, False}


def test_alpha_is_conjugate(data, state):
    priors = Priors(alpha_shape=2.0, alpha_rate=3.0)
    tau = state.mu.tau
    expected = (2.0 + tau.size / 2) / (3.0 + tau @ tau / 2)
    rng = np.random.default_rng(7)
    draws = [update_alpha("mu", state, priors, rng).mu.alpha for _ in range(4000)]
    assert np.mean(draws) == pytest.approx(expected, rel=0.03)
    assert min(draws) > 0


def test_tracker_round_trip():
    tracker = AcceptanceTracker()
    tracker.record("tau.mu", np.array([True, False, True, True]))
    tracker.record_fallback("tau.mu", np.array([False, True, False, False]))
    assert tracker.rates() == {"tau.mu": 0.75}
    assert tracker.fallback_rates() == {"tau.mu": 0.25}
    clone = AcceptanceTracker.from_dict(tracker.to_dict())
    assert clone.rates() == tracker.rates()


def test_chain_config_validation():
    with pytest.raises(ValueError):
        ChainConfig(n_iterations=10, n_burnin=10)
    cfg = ChainConfig(n_iterations=1000, n_burnin=0, max_draws=100)
    assert cfg.effective_thin == 10
    assert cfg.n_retained == 100
    assert ChainConfig(n_iterations=100, n_burnin=50, thin=5).n_retained == 10
    assert cfg.step("kappa") == cfg.step_kappa
