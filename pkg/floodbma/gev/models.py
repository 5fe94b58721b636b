# floodbma/gev/models.py
"""Pure-data GEV parameter triple in the inverse-scale parametrization."""

from __future__ import annotations

import math

from pydantic import BaseModel, ConfigDict, Field, model_validator

XI_EPS = 1e-8


class GevParams(BaseModel):
    """
    One site's GEV parameters.

    ``mu`` location (flood units), ``kappa`` inverse scale (1/flood units,
    so the usual scale is ``1/kappa``), ``xi`` shape.
    """

    model_config = ConfigDict(frozen=True)

    mu: float = Field(..., description="Location")
    kappa: float = Field(..., description="Inverse scale, > 0")
    xi: float = Field(0.0, description="Shape; 0 is Gumbel")

    @model_validator(mode="after")
    def _check(self) -> "GevParams":
        if not all(math.isfinite(v) for v in (self.mu, self.kappa, self.xi)):
            raise ValueError("GEV parameters must be finite")
        if self.kappa <= 0:
            raise ValueError(f"kappa must be > 0 (got {self.kappa})")
        return self

    @property
    def scale(self) -> float:
        return 1.0 / self.kappa

    @property
    def lower_endpoint(self) -> float:
        """Finite only for ξ >= XI_EPS (Fréchet type)."""
        return self.mu - 1.0 / (self.kappa * self.xi) if self.xi >= XI_EPS else -math.inf

    @property
    def upper_endpoint(self) -> float:
        """Finite only for ξ <= -XI_EPS (Weibull type)."""
        return self.mu - 1.0 / (self.kappa * self.xi) if self.xi <= -XI_EPS else math.inf

    def in_support(self, y: float) -> bool:
        if abs(self.xi) < XI_EPS:
            return True
        return 1.0 + self.xi * self.kappa * (y - self.mu) > 0
