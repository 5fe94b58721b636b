# floodbma/hier/__init__.py
"""
Log-posterior of the hierarchical GEV regression

    μ_s = x_s·θ^μ + τ^μ_s,   log κ_s = x_s·θ^κ + τ^κ_s,   ξ_s = x_s·θ^ξ + τ^ξ_s
    τ^ν_s ~ N(0, 1/α^ν),     θ^ν_i ~ N(0, theta_sd²) (included i),   α^ν ~ Gamma

Everything here is a pure function of (state, data, priors).
"""

from __future__ import annotations

import numpy as np
from scipy import stats

from floodbma import gev
from floodbma.errors import DataError
from floodbma.gev.models import GevParams
from floodbma.hier.models import (
    BLOCKS,
    CONSTANT,
    BlockName,
    Dataset,
    HierState,
    Priors,
    RegressionBlock,
    Station,
    check_standardized,
    standardize_columns,
)

__all__ = [
    "BLOCKS",
    "CONSTANT",
    "BlockName",
    "Dataset",
    "HierState",
    "Priors",
    "RegressionBlock",
    "Station",
    "check_standardized",
    "standardize_columns",
    "site_arrays",
    "site_params",
    "station_log_likelihoods",
    "station_log_likelihood",
    "log_prior",
    "log_model_prior",
    "log_posterior",
]


def _check_dims(state: HierState, X: np.ndarray) -> None:
    for name in BLOCKS:
        blk = state.block(name)
        if blk.theta.size != X.shape[1] or blk.tau.size != X.shape[0]:
            raise DataError(
                f"{name} block has shape (p={blk.theta.size}, S={blk.tau.size}); "
                f"covariates have (S={X.shape[0]}, p={X.shape[1]})"
            )


def site_arrays(state: HierState, X: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(μ_s, κ_s, ξ_s) for every row of the design matrix *X*."""
    _check_dims(state, X)
    mu = X @ state.mu.theta + state.mu.tau
    with np.errstate(over="ignore"):
        kappa = np.exp(X @ state.kappa.theta + state.kappa.tau)
    xi = X @ state.xi.theta + state.xi.tau
    return mu, kappa, xi


def _check_station(data: Dataset, station_index: int) -> None:
    if not 0 <= station_index < data.n_stations:
        raise DataError(f"station index {station_index} out of range")


def site_params(state: HierState, data: Dataset, station_index: int) -> GevParams:
    _check_station(data, station_index)
    mu, kappa, xi = site_arrays(state, data.X)
    return GevParams(mu=mu[station_index], kappa=kappa[station_index], xi=xi[station_index])


def station_log_likelihoods(
    data: Dataset, mu: np.ndarray, kappa: np.ndarray, xi: np.ndarray
) -> np.ndarray:
    """Per-station Σ_t log f(y_ts); -inf where any observation is out of support."""
    lp = gev.logpdf(data.Y, mu[:, None], kappa[:, None], xi[:, None])
    out = np.where(data.mask, lp, 0.0).sum(axis=1)
    bad = ~(np.isfinite(mu) & np.isfinite(kappa) & np.isfinite(xi) & (kappa > 0))
    return np.where(bad, -np.inf, out)


def station_log_likelihood(state: HierState, data: Dataset, station_index: int) -> float:
    _check_station(data, station_index)
    mu, kappa, xi = site_arrays(state, data.X)
    return float(station_log_likelihoods(data, mu, kappa, xi)[station_index])


def _block_log_prior(blk: RegressionBlock, priors: Priors) -> float:
    theta = blk.theta[blk.inclusion]
    lp = stats.norm.logpdf(theta, 0.0, priors.theta_sd).sum()
    lp += stats.norm.logpdf(blk.tau, 0.0, 1.0 / np.sqrt(blk.alpha)).sum()
    lp += stats.gamma.logpdf(blk.alpha, priors.alpha_shape, scale=1.0 / priors.alpha_rate)
    return float(lp)


def log_prior(state: HierState, priors: Priors) -> float:
    """θ (included only), τ and α prior terms of all three blocks."""
    return sum(_block_log_prior(state.block(name), priors) for name in BLOCKS)


def log_model_prior(state: HierState, priors: Priors) -> float:
    """Bernoulli(inclusion_prob) over the non-intercept indicators."""
    p = priors.inclusion_prob
    total = 0.0
    for name in BLOCKS:
        inc = state.block(name).inclusion[1:]
        k = int(inc.sum())
        with np.errstate(divide="ignore"):
            total += k * np.log(p) + (inc.size - k) * np.log1p(-p)
    return float(total)


def log_posterior(state: HierState, data: Dataset, priors: Priors) -> float:
    """Unnormalised log-posterior for a fixed model (inclusion pattern)."""
    mu, kappa, xi = site_arrays(state, data.X)
    loglik = station_log_likelihoods(data, mu, kappa, xi).sum()
    if not np.isfinite(loglik):
        return -np.inf
    return float(loglik + log_prior(state, priors))
