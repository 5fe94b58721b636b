import numpy as np
import pytest

from floodbma import gev
from floodbma.errors import SupportError
from floodbma.mcmc.proposals import (
    accept_log_ratio,
    central_derivatives,
    dloglik_dtau_kappa,
    gaussian_approx,
    gaussian_approx_proposal,
    gaussian_mh_step,
    kappa_derivatives,
    kappa_dh_dtau,
    kappa_h,
    log_acceptance_ratio,
    mh_accept,
    normal_logpdf,
)


def test_gaussian_approx_moments():
    mean, var = gaussian_approx_proposal(2.0, -4.0, 1.0)
    assert mean == pytest.approx(1.5)
    assert var == pytest.approx(0.25)


@pytest.mark.parametrize("f1, f2", [(1.0, 0.0), (1.0, 3.0), (np.nan, -1.0), (1.0, -np.inf)])
def test_gaussian_approx_signals_fallback(f1, f2):
    assert gaussian_approx_proposal(f1, f2, 0.0) is None


def test_gaussian_approx_vectorized():
    mean, var, ok = gaussian_approx([1.0, 1.0], [-1.0, 1.0], [0.0, 0.0])
    assert ok.tolist() == [True, False]
    assert mean[0] == 1.0 and var[0] == 1.0
    assert np.isnan(mean[1])


def test_normal_logpdf():
    assert normal_logpdf(1.0, 0.0, 4.0) == pytest.approx(-0.5 * (np.log(2 * np.pi * 4.0) + 0.25))


# ---------------------------------------------------------------------------
# acceptance
# ---------------------------------------------------------------------------
def test_acceptance_ratio_and_nan_rejects():
    assert log_acceptance_ratio(-1.0, -2.0, -0.5, -0.25) == pytest.approx(0.75)
    rng = np.random.default_rng(0)
    assert accept_log_ratio(np.nan, rng) is False
    assert accept_log_ratio(np.inf, rng) is True
    out = accept_log_ratio(np.array([np.nan, 0.0, -np.inf]), rng)
    assert out.tolist() == [False, True, False]


def test_mh_accept_from_minus_inf_always_moves():
    rng = np.random.default_rng(1)
    assert mh_accept(-10.0, -np.inf, 0.0, 0.0, rng) is True
    assert mh_accept(-np.inf, -10.0, 0.0, 0.0, rng) is False


def test_acceptance_frequency_matches_ratio():
    rng = np.random.default_rng(2)
    hits = accept_log_ratio(np.full(20_000, np.log(0.3)), rng)
    assert hits.mean() == pytest.approx(0.3, abs=0.02)


# ---------------------------------------------------------------------------
# κ derivatives
# ---------------------------------------------------------------------------
def _fd(y, mu, xi, eta, step=1e-4):
    f = lambda e: gev.logpdf(y, mu, np.exp(e), xi)  # noqa: E731
    first = (f(eta + step) - f(eta - step)) / (2 * step)
    second = (f(eta + step) - 2 * f(eta) + f(eta - step)) / step**2
    return first, second


@pytest.mark.parametrize("xi", [-0.3, -0.05, 0.0, 0.2, 0.6])
@pytest.mark.parametrize("y", [70.0, 100.0, 130.0, 180.0])
def test_kappa_derivatives_match_finite_differences(xi, y):
    mu, eta = 100.0, np.log(0.05)
    if 1 + xi * 0.05 * (y - mu) <= 0:
        pytest.skip("outside support")
    first, second = kappa_derivatives(y, mu, xi, eta)
    fd1, fd2 = _fd(y, mu, xi, eta)
    assert first == pytest.approx(fd1, rel=1e-5, abs=1e-6)
    assert second == pytest.approx(fd2, rel=1e-3, abs=1e-4)


@pytest.mark.parametrize("xi", [-0.4, 0.0, 0.3])
def test_kappa_derivatives_at_location(xi):
    # y = μ gives h = 1, where the derivatives are 1 and 0 for every ξ
    first, second = kappa_derivatives(50.0, 50.0, xi, 0.3)
    assert first == pytest.approx(1.0)
    assert second == pytest.approx(0.0, abs=1e-12)


def test_kappa_derivatives_continuous_at_gumbel():
    a = kappa_derivatives(140.0, 100.0, 1e-7, np.log(0.05))
    b = kappa_derivatives(140.0, 100.0, 0.0, np.log(0.05))
    np.testing.assert_allclose(a, b, rtol=1e-5)


def test_kappa_derivatives_nan_out_of_support():
    first, second = kappa_derivatives(0.0, 100.0, 0.5, np.log(0.05))
    assert np.isnan(first) and np.isnan(second)
    with pytest.raises(SupportError):
        dloglik_dtau_kappa(0.0, 100.0, 0.5, np.log(0.05), 0.0)


def test_dtau_is_shifted_eta_derivative():
    got = dloglik_dtau_kappa(130.0, 100.0, 0.1, -3.0, 0.2)
    want = kappa_derivatives(130.0, 100.0, 0.1, -2.8)
    np.testing.assert_allclose(got, np.ravel(want))


@pytest.mark.parametrize("xi", [0.0, 0.25])
def test_dh_dtau(xi):
    args = (130.0, 100.0, xi, -3.0)
    step = 1e-6
    fd = (kappa_h(*args, 0.1 + step) - kappa_h(*args, 0.1 - step)) / (2 * step)
    assert kappa_dh_dtau(*args, 0.1) == pytest.approx(fd, rel=1e-6)


# ---------------------------------------------------------------------------
# numeric derivatives and the MH step
# ---------------------------------------------------------------------------
def test_central_derivatives():
    x = np.array([0.5, 2.0, -30.0])
    f1, f2 = central_derivatives(lambda v: -(v**3), x)
    np.testing.assert_allclose(f1, -3 * x**2, rtol=1e-6)
    np.testing.assert_allclose(f2, -6 * x, rtol=1e-3)


def _gaussian_target(m, s2):
    def log_target(x):
        return -0.5 * (x - m) ** 2 / s2

    def derivatives(x, _lt):
        return -(x - m) / s2, np.full_like(x, -1.0 / s2)

    return log_target, derivatives


def test_exact_gaussian_target_always_accepts():
    log_target, derivatives = _gaussian_target(3.0, 4.0)
    rng = np.random.default_rng(3)
    x = np.zeros(500)
    x_new, accepted, fallback, lt_new = gaussian_mh_step(x, log_target, derivatives, 0.1, rng)
    assert accepted.all()
    assert not fallback.any()
    np.testing.assert_allclose(lt_new, log_target(x_new))
    assert x_new.mean() == pytest.approx(3.0, abs=0.3)
    assert x_new.var() == pytest.approx(4.0, rel=0.2)


def test_fallback_random_walk_when_curvature_is_wrong():
    def log_target(x):
        return -np.abs(x)

    def derivatives(x, _lt):
        return -np.sign(x), np.zeros_like(x)

    rng = np.random.default_rng(4)
    x = np.full(10, 2.0)
    x_new, accepted, fallback, _ = gaussian_mh_step(x, log_target, derivatives, 0.5, rng)
    assert fallback.all()
    assert np.all((x_new == x) | accepted)


def test_step_is_reproducible():
    log_target, derivatives = _gaussian_target(0.0, 1.0)
    a = gaussian_mh_step(np.ones(5), log_target, derivatives, 0.1, np.random.default_rng(9))
    b = gaussian_mh_step(np.ones(5), log_target, derivatives, 0.1, np.random.default_rng(9))
    for u, v in zip(a, b):
        np.testing.assert_array_equal(u, v)


def test_chain_on_one_parameter_target_matches_quadrature():
    from scipy.integrate import quad

    from floodbma.mcmc.diagnostics import mc_standard_error

    ys = gev.rvs(5.0, 1.0, 0.1, size=40, rng=np.random.default_rng(10))

    def log_target(v):
        v = np.atleast_1d(v)
        return np.array([gev.logpdf(ys, m, 1.0, 0.1).sum() for m in v]) - 0.5 * (v / 100.0) ** 2

    def derivatives(v, lt):
        return central_derivatives(log_target, v, lt)

    grid_lo, grid_hi = np.median(ys) - 10, ys.min() + 10  # upper end: support edge
    peak = log_target(np.array([np.median(ys)]))[0]
    dens = lambda m: float(np.exp(log_target(np.array([m]))[0] - peak))  # noqa: E731
    z = quad(dens, grid_lo, grid_hi, points=[np.median(ys)], limit=200)[0]
    mean = quad(lambda m: m * dens(m), grid_lo, grid_hi, points=[np.median(ys)], limit=200)[0] / z
    var = quad(lambda m: (m - mean) ** 2 * dens(m), grid_lo, grid_hi, points=[np.median(ys)], limit=200)[0] / z

    rng = np.random.default_rng(11)
    x = np.array([np.median(ys)])
    lt = log_target(x)
    trace = np.empty(8000)
    for t in range(trace.size):
        x, _, _, lt = gaussian_mh_step(x, log_target, derivatives, 0.5, rng, lt)
        trace[t] = x[0]
    trace = trace[500:]
    assert abs(trace.mean() - mean) < 3 * mc_standard_error(trace) + 1e-3
    assert trace.var() == pytest.approx(var, rel=0.15)
