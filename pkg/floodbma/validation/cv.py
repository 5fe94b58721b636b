# floodbma/validation/cv.py
"""
Leave-one-station-out cross-validation and coefficient stability.

For each fold station the regional model is refitted without it and the
station is predicted as if ungauged; the full-data fit supplies the
in-sample counterpart.  Optionally the record-length-rule local model and an
intercept-only regional baseline are scored alongside.

Seeds: fold k uses ``stream(seed, "fold", k, j)`` with j = 0 chain,
1 prediction, 2 local fit, 3 baseline chain; the full-data fit uses the
``"chain"`` stream and its in-sample predictions ``("prediction", s)``.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from floodbma.errors import DataError
from floodbma.hier import BLOCKS, BlockName, Dataset, Priors
from floodbma.local import LocalSettings, fit_local, model_family
from floodbma.logger import get_logger
from floodbma.mcmc import run_chain
from floodbma.mcmc.models import ChainConfig, PosteriorSamples
from floodbma.prediction import new_site_components, return_level_curve, site_components
from floodbma.prediction.models import MixtureComponents
from floodbma.rng import stream
from floodbma.validation import mean_quantile_score, pit_records
from floodbma.validation.models import FoldResult, PitRecord, ScoreReport, StabilitySummary

logger = get_logger(__name__)

IN_SAMPLE = "in_sample"
OUT_OF_SAMPLE = "out_of_sample"
LOCAL = "local"
BASELINE = "baseline"
MODELS = (IN_SAMPLE, OUT_OF_SAMPLE, LOCAL, BASELINE)


class CvSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    return_periods: list[float] = Field(default_factory=lambda: [10.0, 50.0, 100.0])
    n_folds: int = Field(27, ge=1, description="size of the default stratified fold list")
    sims_per_component: int = Field(50, ge=1)
    credible: float = Field(0.8, gt=0, lt=1)
    n_bootstrap: int = Field(1000, ge=1)
    block_bootstrap: bool = False
    local: bool = True
    baseline: bool = False
    workers: int = Field(1, ge=1)
    local_settings: LocalSettings = Field(default_factory=LocalSettings)

    @field_validator("return_periods")
    @classmethod
    def _periods(cls, v: list[float]) -> list[float]:
        if not v or any(t <= 1 for t in v):
            raise ValueError("return periods must be > 1")
        return v


@dataclass
class CvResult:
    full_samples: PosteriorSamples
    folds: list[FoldResult]
    in_sample: dict[str, dict[float, float]]
    pits: list[PitRecord]
    scores: list[ScoreReport]

    def pits_for(self, model: str) -> list[PitRecord]:
        return [p for p in self.pits if p.model == model]

    @property
    def models(self) -> list[str]:
        return sorted({p.model for p in self.pits})

    def fold_samples(self) -> list[PosteriorSamples]:
        return [f.samples for f in self.folds]


# ──────────────────────────────────────────────────────────────
# fold selection
# ──────────────────────────────────────────────────────────────
def default_folds(data: Dataset, n_folds: int, seed: int) -> list[str]:
    """
    Random subset stratified by record length: stations sorted by n_years are
    cut into *n_folds* contiguous strata and one station drawn from each.
    """
    n_folds = min(n_folds, data.n_stations)
    order = np.argsort(data.n_years, kind="stable")
    gen = stream(seed, "fold", 1_000_000)
    picks = [int(gen.choice(stratum)) for stratum in np.array_split(order, n_folds)]
    return [data.station_ids[i] for i in sorted(picks)]


# ──────────────────────────────────────────────────────────────
# one fold
# ──────────────────────────────────────────────────────────────
def _record(
    fold: FoldResult,
    model: str,
    components: MixtureComponents,
    ys: Sequence[float],
    settings: CvSettings,
    rng: np.random.Generator,
) -> None:
    fold.pits.extend(pit_records(components, fold.station_id, ys, model))
    summaries = return_level_curve(
        components,
        settings.return_periods,
        settings.credible,
        settings.sims_per_component,
        rng,
        station_id=fold.station_id,
    )
    fold.predictions[model] = summaries
    fold.quantiles[model] = {t: s.predictive_quantile for t, s in zip(settings.return_periods, summaries)}


def _check_disjoint(train: Dataset, station_id: str) -> None:
    if station_id in train.station_ids:
        raise DataError(f"fold for {station_id!r} would train on its own data")


def run_fold(
    data: Dataset,
    station_id: str,
    position: int,
    priors: Priors,
    config: ChainConfig,
    settings: CvSettings,
) -> FoldResult:
    idx = data.index_of(station_id)
    station = data.stations[idx]
    train = data.without(station_id)
    _check_disjoint(train, station_id)
    logger.info("fold %d (%s): training on %d stations", position, station_id, train.n_stations)

    samples = run_chain(train, priors, config, stream(config.seed, "fold", position, 0))
    fold = FoldResult(station_id=station_id, training_ids=train.station_ids, samples=samples)
    pred_rng = stream(config.seed, "fold", position, 1)
    # covariates stay on the full-data scale
    components = new_site_components(samples, data.X[idx], pred_rng)
    _record(fold, OUT_OF_SAMPLE, components, station.annual_maxima, settings, pred_rng)

    if settings.baseline:
        base_train = train.select_covariates([])
        base = run_chain(base_train, priors, config, stream(config.seed, "fold", position, 3))
        components = new_site_components(base, [1.0], pred_rng)
        _record(fold, BASELINE, components, station.annual_maxima, settings, pred_rng)

    if settings.local:
        try:
            model_family(station.n_years, settings.local_settings)
        except DataError as exc:
            logger.warning("fold %s: local model skipped (%s)", station_id, exc)
        else:
            local_rng = stream(config.seed, "fold", position, 2)
            local = fit_local(station, config, settings.local_settings, local_rng)
            fold.local_samples = local
            _record(fold, LOCAL, site_components(local, 0), station.annual_maxima, settings, pred_rng)

    logger.info("fold %d (%s) done", position, station_id)
    return fold


# ──────────────────────────────────────────────────────────────
# full protocol
# ──────────────────────────────────────────────────────────────
def _scores(
    data: Dataset,
    per_station: dict[str, dict[str, dict[float, float]]],
    settings: CvSettings,
    seed: int,
) -> list[ScoreReport]:
    """Pool every scored station-year per (model, T); bootstrap streams ('bootstrap', model, k)."""
    reports = []
    models = sorted({m for by_model in per_station.values() for m in by_model})
    for model in models:
        ids = [sid for sid, by_model in per_station.items() if model in by_model]
        for k, t in enumerate(settings.return_periods):
            q, y, g = [], [], []
            for sid in ids:
                ys = data.stations[data.index_of(sid)].annual_maxima
                q.extend([per_station[sid][model][t]] * len(ys))
                y.extend(ys)
                g.extend([sid] * len(ys))
            reports.append(
                mean_quantile_score(
                    q,
                    y,
                    t,
                    settings.n_bootstrap,
                    model_name=model,
                    rng=stream(seed, "bootstrap", MODELS.index(model), k),
                    groups=g if settings.block_bootstrap else None,
                )
            )
    return reports


def loo_cross_validate(
    data: Dataset,
    fold_ids: Sequence[str] | None = None,
    priors: Priors | None = None,
    config: ChainConfig | None = None,
    settings: CvSettings | None = None,
    full_samples: PosteriorSamples | None = None,
) -> CvResult:
    """Run the leave-one-station-out protocol over *fold_ids*."""
    priors = priors or Priors()
    config = config or ChainConfig()
    settings = settings or CvSettings()
    if fold_ids is None:
        fold_ids = default_folds(data, settings.n_folds, config.seed)
    unknown = [sid for sid in fold_ids if sid not in data.station_ids]
    if unknown:
        raise DataError(f"unknown fold station ids: {unknown}")
    if len(set(fold_ids)) != len(fold_ids):
        raise DataError("fold station ids must be unique")

    if full_samples is None:
        logger.info("cv: full-data fit on %d stations", data.n_stations)
        full_samples = run_chain(data, priors, config)
    elif full_samples.station_ids != data.station_ids:
        raise DataError("full-data samples were fitted on different stations")

    args = [(data, sid, k, priors, config, settings) for k, sid in enumerate(fold_ids)]
    if settings.workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=settings.workers) as pool:
            folds = list(pool.map(run_fold, *zip(*args)))
    else:
        folds = [run_fold(*a) for a in args]

    in_sample: dict[str, dict[float, float]] = {}
    pits: list[PitRecord] = []
    per_station: dict[str, dict[str, dict[float, float]]] = {}
    for fold in folds:
        idx = data.index_of(fold.station_id)
        station = data.stations[idx]
        holder = FoldResult(station_id=fold.station_id, training_ids=data.station_ids, samples=full_samples)
        rng = stream(config.seed, "prediction", idx)
        _record(holder, IN_SAMPLE, site_components(full_samples, idx), station.annual_maxima, settings, rng)
        fold.predictions[IN_SAMPLE] = holder.predictions[IN_SAMPLE]
        in_sample[fold.station_id] = holder.quantiles[IN_SAMPLE]
        pits.extend(holder.pits)
        pits.extend(fold.pits)
        per_station[fold.station_id] = {IN_SAMPLE: holder.quantiles[IN_SAMPLE], **fold.quantiles}

    return CvResult(
        full_samples=full_samples,
        folds=folds,
        in_sample=in_sample,
        pits=pits,
        scores=_scores(data, per_station, settings, config.seed),
    )


# ──────────────────────────────────────────────────────────────
# stability
# ──────────────────────────────────────────────────────────────
def stability_stats(
    fold_samples: Sequence[PosteriorSamples], covariate: int | str, block: BlockName
) -> StabilitySummary:
    """Min / quartiles / max of the per-fold posterior means of θ^block_covariate."""
    if len(fold_samples) < 2:
        raise DataError(f"stability needs at least 2 folds (got {len(fold_samples)})")
    names = fold_samples[0].covariate_names
    if isinstance(covariate, str):
        if covariate not in names:
            raise DataError(f"unknown covariate {covariate!r}; known: {', '.join(names)}")
        i = names.index(covariate)
    else:
        i = int(covariate)
    if not 0 <= i < len(names):
        raise DataError(f"covariate index {i} out of range")
    means = np.array([s.theta[block][:, i].mean() for s in fold_samples])
    q = np.quantile(means, [0.0, 0.25, 0.5, 0.75, 1.0])
    return StabilitySummary(
        block=block,
        covariate=names[i],
        n_folds=len(fold_samples),
        minimum=float(q[0]),
        q1=float(q[1]),
        median=float(q[2]),
        q3=float(q[3]),
        maximum=float(q[4]),
        fold_means=means.tolist(),
    )


def stability_table(fold_samples: Sequence[PosteriorSamples]) -> list[StabilitySummary]:
    p = fold_samples[0].n_covariates
    return [stability_stats(fold_samples, i, b) for b in BLOCKS for i in range(p)]
