import math

import numpy as np
import pytest
from scipy import stats

from floodbma import gev
from floodbma.errors import DomainError
from floodbma.gev import GevParams


def _scipy(mu, kappa, xi):
    # scipy's shape c has the opposite sign
    return stats.genextreme(c=-xi, loc=mu, scale=1.0 / kappa)


@pytest.mark.parametrize("xi", [-0.3, 0.1, 0.4])
def test_logpdf_matches_scipy(xi):
    mu, kappa = 100.0, 0.05
    dist = _scipy(mu, kappa, xi)
    ys = dist.ppf([0.05, 0.3, 0.5, 0.9, 0.99])
    np.testing.assert_allclose(gev.logpdf(ys, mu, kappa, xi), dist.logpdf(ys), rtol=1e-10)
    np.testing.assert_allclose(gev.cdf(ys, mu, kappa, xi), [0.05, 0.3, 0.5, 0.9, 0.99], rtol=1e-10)


def test_gumbel_branch_below_threshold():
    ys = np.linspace(50, 250, 7)
    ref = stats.gumbel_r(loc=100, scale=20)
    np.testing.assert_allclose(gev.logpdf(ys, 100, 0.05, 1e-9), ref.logpdf(ys), rtol=1e-12)
    np.testing.assert_allclose(gev.cdf(ys, 100, 0.05, 0.0), ref.cdf(ys), rtol=1e-12)
    np.testing.assert_allclose(gev.ppf(0.99, 100, 0.05, 0.0), ref.ppf(0.99), rtol=1e-12)


def test_gev_converges_to_gumbel_as_xi_shrinks():
    y = 150.0
    near = gev.logpdf(y, 100, 0.05, 1e-6)
    at = gev.logpdf(y, 100, 0.05, 0.0)
    assert abs(near - at) < 1e-4


def test_out_of_support():
    # ξ > 0: lower endpoint μ − 1/(κξ) = 100 − 40 = 60
    p = GevParams(mu=100, kappa=0.05, xi=0.5)
    assert p.lower_endpoint == pytest.approx(60.0)
    assert p.upper_endpoint == math.inf
    assert not p.in_support(55.0)
    assert p.in_support(61.0)
    assert gev.gev_log_density(55.0, p) == -math.inf
    assert gev.gev_cdf(55.0, p) == 0.0
    # ξ < 0: upper endpoint
    q = GevParams(mu=100, kappa=0.05, xi=-0.5)
    assert q.upper_endpoint == pytest.approx(140.0)
    assert q.lower_endpoint == -math.inf
    assert not q.in_support(150.0)
    assert gev.gev_log_density(150.0, q) == -math.inf
    assert gev.gev_cdf(150.0, q) == 1.0


def test_support_follows_gumbel_threshold():
    # below XI_EPS the density is Gumbel, so support and endpoints must agree
    tiny = GevParams(mu=100, kappa=0.05, xi=gev.XI_EPS / 2)
    assert tiny.lower_endpoint == -math.inf
    assert tiny.upper_endpoint == math.inf
    assert tiny.in_support(-1e12)
    assert math.isfinite(gev.gev_log_density(-1e3, tiny))
    neg = GevParams(mu=100, kappa=0.05, xi=-gev.XI_EPS / 2)
    assert neg.upper_endpoint == math.inf
    assert neg.in_support(1e12)
    at_eps = GevParams(mu=100, kappa=0.05, xi=gev.XI_EPS)
    assert math.isfinite(at_eps.lower_endpoint)


@pytest.mark.parametrize("xi", [-0.2, 0.0, 0.3])
def test_quantile_inverts_cdf(xi):
    p = GevParams(mu=80, kappa=0.1, xi=xi)
    for prob in (0.01, 0.5, 0.9, 0.999):
        assert gev.gev_cdf(gev.gev_quantile(prob, p), p) == pytest.approx(prob, rel=1e-10)


def test_quantile_known_value():
    # Gumbel: z^p = μ − log(−log p)/κ
    p = GevParams(mu=0, kappa=1, xi=0)
    assert gev.gev_quantile(0.99, p) == pytest.approx(-math.log(-math.log(0.99)))


@pytest.mark.parametrize("prob", [0.0, 1.0, -0.1, float("nan")])
def test_quantile_rejects_bad_probability(prob):
    with pytest.raises(DomainError):
        gev.gev_quantile(prob, GevParams(mu=0, kappa=1, xi=0))


def test_scalar_api_rejects_non_finite():
    with pytest.raises(DomainError):
        gev.gev_log_density(float("inf"), GevParams(mu=0, kappa=1, xi=0))


def test_params_validation():
    with pytest.raises(ValueError):
        GevParams(mu=0, kappa=0, xi=0)
    with pytest.raises(ValueError):
        GevParams(mu=float("nan"), kappa=1, xi=0)


def test_sample_is_reproducible_and_in_support():
    p = GevParams(mu=100, kappa=0.05, xi=0.3)
    a = gev.gev_sample(p, 500, rng=3)
    b = gev.gev_sample(p, 500, rng=3)
    np.testing.assert_array_equal(a, b)
    assert np.all(a > p.lower_endpoint)
    with pytest.raises(DomainError):
        gev.gev_sample(p, 0)


def test_sample_distribution():
    p = GevParams(mu=100, kappa=0.05, xi=0.1)
    draws = gev.gev_sample(p, 5000, rng=np.random.default_rng(1))
    ks = stats.kstest(draws, _scipy(100, 0.05, 0.1).cdf)
    assert ks.pvalue > 0.001


def test_mean():
    np.testing.assert_allclose(gev.gev_mean(100, 0.05, 0.2), _scipy(100, 0.05, 0.2).mean())
    assert gev.gev_mean(0, 1, 0.0) == pytest.approx(np.euler_gamma)
    assert np.isinf(gev.gev_mean(0, 1, 1.2))


def test_return_periods():
    assert gev.return_period_of(0.99) == pytest.approx(100.0)
    assert gev.prob_of_return_period(10) == pytest.approx(0.9)
    with pytest.raises(DomainError):
        gev.prob_of_return_period(1.0)


@pytest.mark.parametrize(
    "y, p, expected",
    [
        (3.0, GevParams(mu=3.0, kappa=2.0, xi=0.2), math.log(2.0) - 1.0),
        (0.0, GevParams(mu=0.0, kappa=1.0, xi=0.0), -1.0),
    ],
)
def test_density_at_location(y, p, expected):
    assert gev.gev_log_density(y, p) == pytest.approx(expected, abs=1e-14)
    assert gev.gev_cdf(y, p) == pytest.approx(math.exp(-1.0))


def test_density_integrates_to_one():
    from scipy.integrate import quad

    cuts = [1e-12, 1e-3, 0.05, 0.3, 0.6, 0.9, 0.99, 0.999, 1 - 1e-12]
    for xi in (-0.3, 0.0, 0.25):
        p = GevParams(mu=1.0, kappa=0.7, xi=xi)
        edges = [gev.gev_quantile(c, p) for c in cuts]
        total = sum(
            quad(lambda y: math.exp(gev.gev_log_density(y, p)), a, b, epsabs=1e-12)[0]
            for a, b in zip(edges, edges[1:])
        )
        assert total == pytest.approx(1.0, abs=1e-6)


def test_quantile_reference_values():
    assert gev.gev_quantile(0.99, GevParams(mu=0, kappa=1, xi=0)) == pytest.approx(4.6001, abs=1e-4)
    assert gev.gev_quantile(0.99, GevParams(mu=0, kappa=1, xi=0.2)) == pytest.approx(7.546, abs=1e-3)
    for xi in (-0.4, 0.0, 0.7):
        p = GevParams(mu=12.0, kappa=3.0, xi=xi)
        assert gev.gev_quantile(math.exp(-1.0), p) == pytest.approx(12.0)


def test_bounded_tail_sample():
    p = GevParams(mu=0, kappa=1, xi=-0.3)
    draws = gev.gev_sample(p, 2000, rng=4)
    assert np.all(draws <= 1 / 0.3)
