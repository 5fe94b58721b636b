# floodbma/prediction/__init__.py
"""
Return levels at gauged and ungauged sites.

In-sample (gauged) predictions use the chain's own τ draws for the station;
a new site gets fresh τ^ν ~ N(0, 1/α^ν) per draw on top of the fixed effects.
Both produce a `MixtureComponents` from which the per-draw return-level
summary and the mixture predictive quantile are computed.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike

from floodbma import gev
from floodbma.errors import DomainError
from floodbma.hier import check_standardized
from floodbma.mcmc.models import PosteriorSamples
from floodbma.prediction.models import MixtureComponents, ReturnLevelSummary
from floodbma.rng import RngLike, stream

DEFAULT_SIMS_PER_COMPONENT = 50
DEFAULT_CREDIBLE = 0.8

__all__ = [
    "MixtureComponents",
    "ReturnLevelSummary",
    "site_components",
    "new_site_components",
    "summarize",
    "mixture_quantile",
    "return_level_posterior",
    "predictive_quantile",
    "predict_new_site",
    "return_level_curve",
]


def _rng(samples: PosteriorSamples, rng: RngLike, *extra: int) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return stream(samples.config.seed if rng is None else int(rng), "prediction", *extra)


def _generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return stream(0 if rng is None else int(rng), "prediction")


# ──────────────────────────────────────────────────────────────
# mixture components
# ──────────────────────────────────────────────────────────────
def site_components(samples: PosteriorSamples, station_index: int) -> MixtureComponents:
    mu, kappa, xi = samples.site_parameters(station_index)
    return MixtureComponents(mu, kappa, xi)


def new_site_components(
    samples: PosteriorSamples, x_new: ArrayLike, rng: RngLike = None
) -> MixtureComponents:
    """
    Compose parameters for an ungauged site with standardized covariates
    *x_new*: per draw, x·θ^ν plus a fresh τ^ν ~ N(0, 1/α^ν); κ via exp.
    """
    x = check_standardized(x_new, samples.n_covariates)
    gen = _rng(samples, rng)
    parts = {}
    for block in ("mu", "kappa", "xi"):
        sd = 1.0 / np.sqrt(samples.alpha[block])
        parts[block] = samples.fixed_effects(block, x) + sd * gen.standard_normal(len(samples))
    return MixtureComponents(parts["mu"], np.exp(parts["kappa"]), parts["xi"])


# ──────────────────────────────────────────────────────────────
# summaries
# ──────────────────────────────────────────────────────────────
def mixture_quantile(
    components: MixtureComponents,
    prob: float,
    sims_per_component: int = DEFAULT_SIMS_PER_COMPONENT,
    rng: RngLike = None,
) -> float:
    """Empirical *prob*-quantile of R·m draws pooled over the mixture."""
    if not 0 < prob < 1:
        raise DomainError(f"probability must lie in (0, 1) (got {prob})")
    gen = _generator(rng)
    pooled = components.sample(sims_per_component, gen).ravel()
    return float(np.quantile(pooled, prob))


def _summary(
    levels: np.ndarray, prob: float, credible: float, predictive: float, station_id: str | None
) -> ReturnLevelSummary:
    lo, med, hi = np.quantile(levels, [(1 - credible) / 2, 0.5, (1 + credible) / 2])
    return ReturnLevelSummary(
        prob=prob,
        return_period=gev.return_period_of(prob),
        posterior_median=float(med),
        posterior_mean=float(levels.mean()),
        credible_lo=float(lo),
        credible_hi=float(hi),
        credible_level=credible,
        predictive_quantile=predictive,
        station_id=station_id,
    )


def summarize(
    components: MixtureComponents,
    prob: float,
    credible: float = DEFAULT_CREDIBLE,
    sims_per_component: int = DEFAULT_SIMS_PER_COMPONENT,
    rng: RngLike = None,
    station_id: str | None = None,
) -> ReturnLevelSummary:
    """Per-draw z^p summarised empirically, plus the mixture predictive quantile."""
    predictive = mixture_quantile(components, prob, sims_per_component, rng)
    return _summary(components.return_levels(prob), prob, credible, predictive, station_id)


# ──────────────────────────────────────────────────────────────
# public operations
# ──────────────────────────────────────────────────────────────
def return_level_posterior(
    samples: PosteriorSamples,
    station_index: int,
    prob: float,
    credible: float = DEFAULT_CREDIBLE,
    sims_per_component: int = DEFAULT_SIMS_PER_COMPONENT,
    rng: RngLike = None,
) -> ReturnLevelSummary:
    """Return-level summary for training station *station_index*."""
    components = site_components(samples, station_index)
    return summarize(
        components,
        prob,
        credible,
        sims_per_component,
        _rng(samples, rng, station_index),
        station_id=samples.station_ids[station_index],
    )


def predictive_quantile(
    samples: PosteriorSamples,
    station_index: int,
    prob: float,
    sims_per_component: int = DEFAULT_SIMS_PER_COMPONENT,
    rng: RngLike = None,
) -> float:
    components = site_components(samples, station_index)
    return mixture_quantile(components, prob, sims_per_component, _rng(samples, rng, station_index))


def predict_new_site(
    samples: PosteriorSamples,
    x_new: ArrayLike,
    prob: float,
    credible: float = DEFAULT_CREDIBLE,
    sims_per_component: int = DEFAULT_SIMS_PER_COMPONENT,
    rng: RngLike = None,
    station_id: str | None = None,
) -> ReturnLevelSummary:
    """Return-level summary for an ungauged site with standardized covariates *x_new*."""
    gen = _rng(samples, rng)
    components = new_site_components(samples, x_new, gen)
    return summarize(components, prob, credible, sims_per_component, gen, station_id=station_id)


def return_level_curve(
    components: MixtureComponents,
    return_periods: Sequence[float],
    credible: float = DEFAULT_CREDIBLE,
    sims_per_component: int = DEFAULT_SIMS_PER_COMPONENT,
    rng: RngLike = None,
    station_id: str | None = None,
) -> list[ReturnLevelSummary]:
    """Summaries over a grid of return periods (one shared pooled sample)."""
    gen = _generator(rng)
    probs = [gev.prob_of_return_period(float(t)) for t in return_periods]
    pooled = components.sample(sims_per_component, gen).ravel()
    return [
        _summary(components.return_levels(p), p, credible, float(np.quantile(pooled, p)), station_id)
        for p in probs
    ]
