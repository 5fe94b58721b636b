# floodbma/validation/models.py
from __future__ import annotations

from dataclasses import dataclass, field

from pydantic import BaseModel, ConfigDict, Field, model_validator

from floodbma.mcmc.models import PosteriorSamples
from floodbma.prediction.models import ReturnLevelSummary


class PitRecord(BaseModel):
    """Probability integral transform of one held-out (or held-in) observation."""

    model_config = ConfigDict(frozen=True)

    station_id: str
    year_index: int = Field(..., ge=0)
    pit: float = Field(..., ge=0.0, le=1.0)
    model: str = "regional"


class PpData(BaseModel):
    """Sorted PITs against uniform plotting positions i/(n+1)."""

    empirical: list[float]
    theoretical: list[float]
    max_gap: float
    ks_statistic: float
    ks_pvalue: float


class PitHistogram(BaseModel):
    edges: list[float]
    counts: list[int]
    chi2: float
    p_value: float


class ScoreReport(BaseModel):
    """Mean quantile score of one model at one return period, with a bootstrap interval."""

    model_config = ConfigDict(frozen=True)

    model_name: str
    return_period: float = Field(..., gt=1)
    mean_score: float
    ci_lo: float
    ci_hi: float
    n_observations: int
    level: float = 0.9

    @model_validator(mode="after")
    def _ordered(self) -> "ScoreReport":
        if not self.ci_lo <= self.mean_score <= self.ci_hi:
            raise ValueError(f"[{self.ci_lo}, {self.ci_hi}] does not contain {self.mean_score}")
        return self


class StabilitySummary(BaseModel):
    """Box-plot data of per-fold posterior means of one coefficient."""

    block: str
    covariate: str
    n_folds: int
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    fold_means: list[float]

    @property
    def spread(self) -> float:
        return self.maximum - self.minimum


@dataclass
class FoldResult:
    """Everything produced for one left-out station."""

    station_id: str
    training_ids: list[str]
    samples: PosteriorSamples
    predictions: dict[str, list[ReturnLevelSummary]] = field(default_factory=dict)
    pits: list[PitRecord] = field(default_factory=list)
    quantiles: dict[str, dict[float, float]] = field(default_factory=dict)
    local_samples: PosteriorSamples | None = None
