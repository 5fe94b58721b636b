# floodbma/gev/__init__.py
"""
GEV and Gumbel distribution functions in the inverse-scale parametrization

    f(y) = κ h^{-(ξ+1)/ξ} exp(-h^{-1/ξ}),   h = 1 + ξ κ (y - μ) > 0

with the Gumbel limit f(y) = κ h exp(-h), h = exp(-κ (y - μ)) used whenever
|ξ| < XI_EPS.

Two layers:

* array kernels ``logpdf``, ``cdf``, ``ppf``, ``rvs`` – broadcast over numpy
  arrays, never raise, return -inf / 0 / 1 outside the support.  The sampler
  and the prediction code use these.
* scalar entry points ``gev_log_density``, ``gev_cdf``, ``gev_quantile``,
  ``gev_sample`` taking a `GevParams` and validating their inputs.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.typing import ArrayLike
from scipy.special import gamma as gamma_fn

from floodbma.errors import DomainError
from floodbma.gev.models import XI_EPS, GevParams
from floodbma.rng import RngLike, as_generator

__all__ = [
    "XI_EPS",
    "GevParams",
    "logpdf",
    "cdf",
    "ppf",
    "rvs",
    "gev_log_density",
    "gev_cdf",
    "gev_quantile",
    "gev_sample",
    "gev_mean",
    "return_period_of",
    "prob_of_return_period",
]


# ──────────────────────────────────────────────────────────────
# array kernels
# ──────────────────────────────────────────────────────────────
def _broadcast(*args: ArrayLike) -> list[np.ndarray]:
    return [np.asarray(a, dtype=float) for a in np.broadcast_arrays(*args)]


def logpdf(y: ArrayLike, mu: ArrayLike, kappa: ArrayLike, xi: ArrayLike) -> np.ndarray:
    """Log-density; -inf outside the support."""
    y, mu, kappa, xi = _broadcast(y, mu, kappa, xi)
    z = kappa * (y - mu)
    gumbel = np.abs(xi) < XI_EPS
    xi_safe = np.where(gumbel, 1.0, xi)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        arg = xi_safe * z
        ok = arg > -1.0
        logh = np.log1p(np.where(ok, arg, 0.0))
        gev = np.log(kappa) - (1.0 + 1.0 / xi_safe) * logh - np.exp(-logh / xi_safe)
        gev = np.where(ok, gev, -np.inf)
        gum = np.log(kappa) - z - np.exp(-z)
    out = np.where(gumbel, gum, gev)
    return np.where(np.isnan(out), -np.inf, out)


def cdf(y: ArrayLike, mu: ArrayLike, kappa: ArrayLike, xi: ArrayLike) -> np.ndarray:
    """Distribution function exp(-h^{-1/ξ}); 0 below / 1 above finite endpoints."""
    y, mu, kappa, xi = _broadcast(y, mu, kappa, xi)
    z = kappa * (y - mu)
    gumbel = np.abs(xi) < XI_EPS
    xi_safe = np.where(gumbel, 1.0, xi)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        arg = xi_safe * z
        ok = arg > -1.0
        logh = np.log1p(np.where(ok, arg, 0.0))
        gev = np.exp(-np.exp(-logh / xi_safe))
        # h <= 0: below the lower endpoint (ξ>0) or above the upper one (ξ<0)
        gev = np.where(ok, gev, np.where(xi_safe > 0, 0.0, 1.0))
        gum = np.exp(-np.exp(-z))
    return np.clip(np.where(gumbel, gum, gev), 0.0, 1.0)


def ppf(prob: ArrayLike, mu: ArrayLike, kappa: ArrayLike, xi: ArrayLike) -> np.ndarray:
    """Quantile function μ - {1 - [-log p]^{-ξ}} / (κ ξ); Gumbel μ - log(-log p)/κ."""
    prob, mu, kappa, xi = _broadcast(prob, mu, kappa, xi)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        log_l = np.log(-np.log(prob))
        gumbel = np.abs(xi) < XI_EPS
        xi_safe = np.where(gumbel, 1.0, xi)
        gev = mu + np.expm1(-xi_safe * log_l) / (kappa * xi_safe)
        gum = mu - log_l / kappa
    return np.where(gumbel, gum, gev)


def rvs(
    mu: ArrayLike,
    kappa: ArrayLike,
    xi: ArrayLike,
    size: int | tuple[int, ...] | None = None,
    rng: RngLike = None,
) -> np.ndarray:
    """Inverse-transform draws; *size* defaults to the broadcast parameter shape."""
    gen = as_generator(rng)
    mu, kappa, xi = _broadcast(mu, kappa, xi)
    shape = mu.shape if size is None else size
    u = gen.random(shape)
    u = np.clip(u, np.finfo(float).tiny, None)  # Generator.random is [0, 1)
    return ppf(u, mu, kappa, xi)


# ──────────────────────────────────────────────────────────────
# validated scalar API
# ──────────────────────────────────────────────────────────────
def _require_finite(**values: float) -> None:
    bad = [k for k, v in values.items() if not math.isfinite(v)]
    if bad:
        raise DomainError(f"non-finite input: {', '.join(bad)}")


def _require_prob(prob: float) -> None:
    if not math.isfinite(prob) or not 0.0 < prob < 1.0:
        raise DomainError(f"probability must lie in (0, 1) (got {prob})")


def gev_log_density(y: float, p: GevParams) -> float:
    """Log of the GEV (or Gumbel, |ξ| < XI_EPS) density; -inf out of support."""
    _require_finite(y=y, mu=p.mu, kappa=p.kappa, xi=p.xi)
    return float(logpdf(y, p.mu, p.kappa, p.xi))


def gev_cdf(y: float, p: GevParams) -> float:
    _require_finite(y=y, mu=p.mu, kappa=p.kappa, xi=p.xi)
    return float(cdf(y, p.mu, p.kappa, p.xi))


def gev_quantile(prob: float, p: GevParams) -> float:
    """Return level z^p with cdf(z^p) = prob."""
    _require_prob(prob)
    return float(ppf(prob, p.mu, p.kappa, p.xi))


def gev_sample(p: GevParams, n: int, rng: RngLike = None) -> np.ndarray:
    """*n* draws gev_quantile(u), u ~ U(0, 1) from *rng*."""
    if n < 1:
        raise DomainError(f"n must be >= 1 (got {n})")
    return rvs(p.mu, p.kappa, p.xi, size=n, rng=rng)


def gev_mean(mu: ArrayLike, kappa: ArrayLike, xi: ArrayLike) -> np.ndarray:
    """μ + (Γ(1-ξ) - 1)/(κ ξ) for ξ < 1; Gumbel μ + γ/κ; +inf for ξ >= 1."""
    mu, kappa, xi = _broadcast(mu, kappa, xi)
    gumbel = np.abs(xi) < XI_EPS
    xi_safe = np.where(gumbel | (xi >= 1), 0.5, xi)
    gev = mu + (gamma_fn(1.0 - xi_safe) - 1.0) / (kappa * xi_safe)
    out = np.where(gumbel, mu + np.euler_gamma / kappa, gev)
    return np.where(xi >= 1, np.inf, out)


# ──────────────────────────────────────────────────────────────
# return periods
# ──────────────────────────────────────────────────────────────
def return_period_of(prob: float) -> float:
    """T = 1/(1-p): the level exceeded on average once every T years."""
    _require_prob(prob)
    return 1.0 / (1.0 - prob)


def prob_of_return_period(period: float) -> float:
    """Inverse map p = 1 - 1/T, T > 1."""
    if not math.isfinite(period) or period <= 1.0:
        raise DomainError(f"return period must be > 1 (got {period})")
    return 1.0 - 1.0 / period
