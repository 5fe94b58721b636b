# floodbma/local/__init__.py
"""
Single-station Bayesian GEV/Gumbel fit following the record-length rule:

    n_years <  min_years           refused
    n_years <  gev_min_years       Gumbel (ξ ≡ 0)
    otherwise                      three-parameter GEV

The MH updates for μ, η = log κ and ξ reuse the hierarchical sampler's
Gaussian-approximation step.  The result is a one-station, intercept-only
`PosteriorSamples` (kind ``"local"``, no random effects), so every
prediction function accepts it.
"""

from __future__ import annotations

from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from floodbma import gev
from floodbma.errors import DataError
from floodbma.hier import BLOCKS, CONSTANT, Station
from floodbma.logger import get_logger
from floodbma.mcmc import gumbel_moment_estimates
from floodbma.mcmc.models import AcceptanceTracker, ChainConfig, PosteriorSamples
from floodbma.mcmc.proposals import (
    central_derivatives,
    gaussian_mh_step,
    kappa_derivatives,
    normal_logpdf,
)
from floodbma.prediction import DEFAULT_CREDIBLE, DEFAULT_SIMS_PER_COMPONENT, return_level_posterior
from floodbma.prediction.models import ReturnLevelSummary
from floodbma.rng import RngLike, stream

logger = get_logger(__name__)

Family = Literal["gev", "gumbel"]


class LocalSettings(BaseModel):
    """Record-length thresholds and the prior sds of the local model."""

    model_config = ConfigDict(extra="forbid")

    min_years: int = Field(20, ge=2)
    gev_min_years: int = Field(50, ge=2)
    mu_sd: float = Field(1e4, gt=0, description="sd of the N(0, ·) prior on μ")
    eta_sd: float = Field(10.0, gt=0, description="sd of the N(0, ·) prior on log κ")
    xi_sd: float = Field(0.25, gt=0, description="sd of the N(0, ·) prior on ξ")

    @model_validator(mode="after")
    def _order(self) -> "LocalSettings":
        if self.gev_min_years < self.min_years:
            raise ValueError("gev_min_years must be >= min_years")
        return self


def model_family(n_years: int, settings: LocalSettings | None = None) -> Family:
    settings = settings or LocalSettings()
    if n_years < settings.min_years:
        raise DataError(
            f"local model needs at least {settings.min_years} years of maxima (got {n_years})"
        )
    return "gev" if n_years >= settings.gev_min_years else "gumbel"


class _LocalPosterior:
    """Log-posterior of (μ, η, ξ) for one station and the per-parameter targets."""

    def __init__(self, y: np.ndarray, settings: LocalSettings, xi_bound: float):
        self.y = y
        self.s = settings
        self.xi_bound = xi_bound

    def log_likelihood(self, mu: float, eta: float, xi: float) -> float:
        if abs(xi) >= self.xi_bound:
            return -np.inf
        with np.errstate(over="ignore"):
            return float(gev.logpdf(self.y, mu, np.exp(eta), xi).sum())

    def log_prior(self, mu: float, eta: float, xi: float) -> float:
        return float(
            normal_logpdf(mu, 0.0, self.s.mu_sd**2)
            + normal_logpdf(eta, 0.0, self.s.eta_sd**2)
            + normal_logpdf(xi, 0.0, self.s.xi_sd**2)
        )

    def log_posterior(self, params: np.ndarray) -> float:
        return self.log_likelihood(*params) + self.log_prior(*params)

    def target(self, params: np.ndarray, j: int):
        def log_target(v: np.ndarray) -> np.ndarray:
            p = params.copy()
            p[j] = v[0]
            return np.array([self.log_posterior(p)])

        return log_target

    def derivatives(self, params: np.ndarray, j: int, log_target):
        if j != 1:
            return lambda v, lt: central_derivatives(log_target, v, lt)

        def eta_derivatives(v: np.ndarray, lt: np.ndarray):
            f1, f2 = kappa_derivatives(self.y, params[0], params[2], v[0])
            prec = 1.0 / self.s.eta_sd**2
            return np.array([f1.sum()]) - prec * v, np.array([f2.sum()]) - prec

        return eta_derivatives


def fit_local(
    station: Station,
    config: ChainConfig | None = None,
    settings: LocalSettings | None = None,
    rng: RngLike = None,
) -> PosteriorSamples:
    """Fit the record-length-rule local model to one station's maxima."""
    config = config or ChainConfig()
    settings = settings or LocalSettings()
    family = model_family(station.n_years, settings)
    gen = rng if isinstance(rng, np.random.Generator) else stream(
        config.seed if rng is None else int(rng), "local"
    )
    y = np.asarray(station.annual_maxima, dtype=float)
    post = _LocalPosterior(y, settings, config.xi_bound)
    params = np.array([*gumbel_moment_estimates(y), 0.0])
    steps = (config.step_mu, config.step_kappa, config.step_xi)
    updated = (0, 1, 2) if family == "gev" else (0, 1)
    tracker = AcceptanceTracker()

    n, burn, thin = config.n_retained, config.n_burnin, config.effective_thin
    draws = np.empty((n, 3))
    trace = np.empty(n)
    stored = 0
    logger.info("local fit %s: %s, %d years", station.id, family, station.n_years)
    for t in range(1, config.n_iterations + 1):
        for j in updated:
            log_target = post.target(params, j)
            new, accepted, fallback, _ = gaussian_mh_step(
                params[j : j + 1], log_target, post.derivatives(params, j, log_target), steps[j], gen
            )
            params[j] = new[0]
            key = f"local.{BLOCKS[j]}"
            tracker.record(key, accepted)
            tracker.record_fallback(key, fallback)
        if t > burn and (t - burn) % thin == 0 and stored < n:
            draws[stored] = params
            trace[stored] = post.log_posterior(params)
            stored += 1

    draws, trace = draws[:stored], trace[:stored]
    ones = np.ones((stored, 1), dtype=bool)
    zeros = np.zeros((stored, 1))
    return PosteriorSamples(
        theta={b: draws[:, [j]] for j, b in enumerate(BLOCKS)},
        inclusion={b: ones.copy() for b in BLOCKS},
        alpha={b: np.full(stored, np.inf) for b in BLOCKS},
        tau={b: zeros.copy() for b in BLOCKS},
        log_posterior=trace,
        config=config,
        acceptance_rates=tracker.rates(),
        covariates=np.ones((1, 1)),
        station_ids=[station.id],
        covariate_names=[CONSTANT],
        standardization=[(0.0, 1.0)],
        kind="local",
    )


def local_return_level(
    samples: PosteriorSamples,
    prob: float,
    credible: float = DEFAULT_CREDIBLE,
    sims_per_component: int = DEFAULT_SIMS_PER_COMPONENT,
    rng: RngLike = None,
) -> ReturnLevelSummary:
    """Return-level summary of a single-site posterior."""
    if samples.n_stations != 1:
        raise DataError(f"expected a single-site posterior (got {samples.n_stations} stations)")
    return return_level_posterior(samples, 0, prob, credible, sims_per_component, rng)
