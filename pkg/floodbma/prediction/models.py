# floodbma/prediction/models.py
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, Field, model_validator

from floodbma import gev
from floodbma.errors import DomainError, NumericError


class ReturnLevelSummary(BaseModel):
    """Posterior summary of the return level z^p at one site."""

    model_config = ConfigDict(frozen=True)

    prob: float = Field(..., gt=0, lt=1)
    return_period: float
    posterior_median: float
    posterior_mean: float
    credible_lo: float
    credible_hi: float
    credible_level: float = Field(0.8, gt=0, lt=1)
    predictive_quantile: float
    station_id: str | None = None

    @model_validator(mode="after")
    def _ordered(self) -> "ReturnLevelSummary":
        if not self.credible_lo <= self.posterior_median <= self.credible_hi:
            raise ValueError(
                f"credible interval [{self.credible_lo}, {self.credible_hi}] "
                f"does not contain the median {self.posterior_median}"
            )
        return self

    def row(self) -> dict:
        return self.model_dump()


@dataclass(frozen=True)
class MixtureComponents:
    """
    The posterior predictive distribution at one site: an equal-weight
    mixture of R GEV components, one per posterior draw.
    """

    mu: np.ndarray
    kappa: np.ndarray
    xi: np.ndarray

    def __post_init__(self) -> None:
        for name in ("mu", "kappa", "xi"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).ravel())
        if not (self.mu.size == self.kappa.size == self.xi.size) or self.mu.size == 0:
            raise NumericError("mixture components must be non-empty and of equal length")

    def __len__(self) -> int:
        return self.mu.size

    def return_levels(self, prob: float) -> np.ndarray:
        """z^p of every component."""
        return gev.ppf(prob, self.mu, self.kappa, self.xi)

    def cdf(self, y: ArrayLike) -> np.ndarray:
        """Average of the component CDFs at each y."""
        y = np.asarray(y, dtype=float)
        return gev.cdf(y[..., None], self.mu, self.kappa, self.xi).mean(axis=-1)

    def sample(self, per_component: int, rng: np.random.Generator) -> np.ndarray:
        """*per_component* draws from every component, shape (R, m)."""
        if per_component < 1:
            raise DomainError(f"per_component must be >= 1 (got {per_component})")
        u = np.clip(rng.random((len(self), per_component)), np.finfo(float).tiny, None)
        return gev.ppf(u, self.mu[:, None], self.kappa[:, None], self.xi[:, None])
