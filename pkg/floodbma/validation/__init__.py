# floodbma/validation/__init__.py
"""
Reliability diagnostics: PIT values of the mixture predictive, PP-plot and
histogram data, and quantile scores with bootstrap intervals.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike
from scipy import stats

from floodbma import gev
from floodbma.errors import DataError, DomainError
from floodbma.prediction.models import MixtureComponents
from floodbma.rng import RngLike, stream
from floodbma.validation.models import (
    FoldResult,
    PitHistogram,
    PitRecord,
    PpData,
    ScoreReport,
    StabilitySummary,
)

DEFAULT_BOOTSTRAP = 1000
DEFAULT_SCORE_LEVEL = 0.9

__all__ = [
    "FoldResult",
    "PitHistogram",
    "PitRecord",
    "PpData",
    "ScoreReport",
    "StabilitySummary",
    "pit_value",
    "pit_values",
    "pit_records",
    "pp_plot_data",
    "pit_histogram",
    "quantile_score",
    "quantile_scores",
    "mean_quantile_score",
]


# ──────────────────────────────────────────────────────────────
# PIT
# ──────────────────────────────────────────────────────────────
def pit_values(components: MixtureComponents, ys: ArrayLike) -> np.ndarray:
    """Mixture CDF (1/R) Σ_r F_r(y) at each y."""
    return np.clip(components.cdf(np.asarray(ys, dtype=float)), 0.0, 1.0)


def pit_value(components: MixtureComponents, y: float) -> float:
    return float(pit_values(components, [y])[0])


def pit_records(
    components: MixtureComponents, station_id: str, ys: ArrayLike, model: str = "regional"
) -> list[PitRecord]:
    return [
        PitRecord(station_id=station_id, year_index=t, pit=float(u), model=model)
        for t, u in enumerate(pit_values(components, ys))
    ]


def _as_pits(pits: Iterable[PitRecord | float]) -> np.ndarray:
    vals = np.array([p.pit if isinstance(p, PitRecord) else float(p) for p in pits], dtype=float)
    if vals.size == 0:
        raise DataError("no PIT values")
    return vals


def pp_plot_data(pits: Iterable[PitRecord | float]) -> PpData:
    """Sorted PITs against i/(n+1); max_gap is the largest vertical deviation."""
    u = np.sort(_as_pits(pits))
    n = u.size
    theoretical = np.arange(1, n + 1) / (n + 1)
    ks = stats.kstest(u, "uniform")
    return PpData(
        empirical=u.tolist(),
        theoretical=theoretical.tolist(),
        max_gap=float(np.abs(u - theoretical).max()),
        ks_statistic=float(ks.statistic),
        ks_pvalue=float(ks.pvalue),
    )


def pit_histogram(pits: Iterable[PitRecord | float], n_bins: int = 10) -> PitHistogram:
    """Equal-width bin counts on [0, 1] and the χ² statistic against a flat histogram."""
    if n_bins < 2:
        raise DomainError(f"n_bins must be >= 2 (got {n_bins})")
    u = _as_pits(pits)
    counts, edges = np.histogram(u, bins=n_bins, range=(0.0, 1.0))
    chi2 = stats.chisquare(counts)
    return PitHistogram(
        edges=edges.tolist(),
        counts=counts.astype(int).tolist(),
        chi2=float(chi2.statistic),
        p_value=float(chi2.pvalue),
    )


# ──────────────────────────────────────────────────────────────
# quantile scores
# ──────────────────────────────────────────────────────────────
def quantile_scores(quantiles: ArrayLike, ys: ArrayLike, tau: float) -> np.ndarray:
    """(y − q)(τ − 1{y ≤ q}) elementwise; nonnegative, 0 iff y = q."""
    if not 0 < tau < 1:
        raise DomainError(f"tau must lie in (0, 1) (got {tau})")
    q = np.asarray(quantiles, dtype=float)
    y = np.asarray(ys, dtype=float)
    return (y - q) * (tau - (y <= q))


def quantile_score(predictive_quantile_value: float, y: float, tau: float) -> float:
    return float(quantile_scores(predictive_quantile_value, y, tau))


def mean_quantile_score(
    quantiles: ArrayLike,
    observations: ArrayLike,
    return_period: float,
    n_bootstrap: int = DEFAULT_BOOTSTRAP,
    model_name: str = "regional",
    level: float = DEFAULT_SCORE_LEVEL,
    rng: RngLike = None,
    groups: Sequence[str] | None = None,
) -> ScoreReport:
    """
    Mean score over station-years at τ = 1 − 1/T, with a percentile bootstrap
    interval.  Observations are resampled i.i.d. unless *groups* (one station
    id per observation) is given, in which case whole stations are resampled.
    """
    tau = gev.prob_of_return_period(return_period)
    scores = quantile_scores(quantiles, observations, tau).ravel()
    if scores.size == 0:
        raise DataError("no held-out observations to score")
    if n_bootstrap < 1:
        raise DomainError(f"n_bootstrap must be >= 1 (got {n_bootstrap})")
    gen = rng if isinstance(rng, np.random.Generator) else stream(0 if rng is None else int(rng), "bootstrap")
    mean = float(scores.mean())

    if groups is None:
        idx = gen.integers(0, scores.size, size=(n_bootstrap, scores.size))
        boot = scores[idx].mean(axis=1)
    else:
        labels = np.asarray(groups)
        if labels.size != scores.size:
            raise DataError("groups must have one label per observation")
        keys, inverse = np.unique(labels, return_inverse=True)
        sums = np.bincount(inverse, weights=scores, minlength=keys.size)
        sizes = np.bincount(inverse, minlength=keys.size)
        picks = gen.integers(0, keys.size, size=(n_bootstrap, keys.size))
        boot = sums[picks].sum(axis=1) / sizes[picks].sum(axis=1)

    lo, hi = np.quantile(boot, [(1 - level) / 2, (1 + level) / 2])
    return ScoreReport(
        model_name=model_name,
        return_period=float(return_period),
        mean_score=mean,
        ci_lo=min(float(lo), mean),
        ci_hi=max(float(hi), mean),
        n_observations=int(scores.size),
        level=level,
    )
