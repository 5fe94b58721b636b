# floodbma/mcmc/models.py
"""
Sampler configuration and output.

• `ChainConfig` is pydantic (it comes from preferences / CLI flags).
• `PosteriorSamples` stores the retained draws column-wise (one array per
  block and parameter) rather than as a list of `HierState` objects; `draw(r)`
  rebuilds the r-th state on demand.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from floodbma.errors import DataError
from floodbma.hier.models import BLOCKS, BlockName, HierState, RegressionBlock


class ChainConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_iterations: int = Field(100_000, ge=1)
    n_burnin: int = Field(20_000, ge=0)
    thin: int = Field(1, ge=1)
    seed: int = 2024

    # random-walk fallback step sizes (used when the Gaussian approximation
    # has non-negative curvature or the expansion point is out of support)
    step_mu: float = Field(1.0, gt=0)
    step_kappa: float = Field(0.1, gt=0)
    step_xi: float = Field(0.05, gt=0)

    xi_bound: float = Field(1.0, gt=0, description="proposals with any |ξ_s| >= bound are rejected")
    max_draws: int | None = Field(None, ge=1, description="cap on stored draws; raises thinning")
    centered_moves: bool = Field(True, description="add τ-compensated θ and inclusion moves")
    checkpoint_every: int = Field(0, ge=0, description="0 → checkpoint only at the end")
    log_every: int = Field(1000, ge=1)

    @model_validator(mode="after")
    def _check(self) -> "ChainConfig":
        if self.n_burnin >= self.n_iterations:
            raise ValueError(
                f"n_burnin ({self.n_burnin}) must be < n_iterations ({self.n_iterations})"
            )
        return self

    @property
    def effective_thin(self) -> int:
        kept = self.n_iterations - self.n_burnin
        if self.max_draws is not None and kept > self.max_draws * self.thin:
            return math.ceil(kept / self.max_draws)
        return self.thin

    @property
    def n_retained(self) -> int:
        return (self.n_iterations - self.n_burnin) // self.effective_thin

    def step(self, block: BlockName) -> float:
        return getattr(self, f"step_{block}")


# ---------------------------------------------------------------------------
# Acceptance bookkeeping
# ---------------------------------------------------------------------------


@dataclass
class AcceptanceTracker:
    """Counts proposals / acceptances per update type (``"tau.kappa"``, ``"birth.mu"``, …)."""

    attempts: Counter = field(default_factory=Counter)
    accepts: Counter = field(default_factory=Counter)
    fallbacks: Counter = field(default_factory=Counter)

    def record(self, key: str, accepted) -> None:
        arr = np.atleast_1d(np.asarray(accepted, dtype=bool))
        self.attempts[key] += int(arr.size)
        self.accepts[key] += int(arr.sum())

    def record_fallback(self, key: str, used) -> None:
        self.fallbacks[key] += int(np.count_nonzero(used))

    def rates(self) -> dict[str, float]:
        return {k: self.accepts[k] / n for k, n in sorted(self.attempts.items()) if n}

    def fallback_rates(self) -> dict[str, float]:
        """Share of proposals that used the random-walk fallback, per update type."""
        return {k: self.fallbacks[k] / self.attempts[k] for k in sorted(self.fallbacks) if self.attempts[k]}

    def to_dict(self) -> dict:
        return {
            "attempts": dict(self.attempts),
            "accepts": dict(self.accepts),
            "fallbacks": dict(self.fallbacks),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AcceptanceTracker":
        return cls(
            Counter(data.get("attempts", {})),
            Counter(data.get("accepts", {})),
            Counter(data.get("fallbacks", {})),
        )


# ---------------------------------------------------------------------------
# Posterior samples
# ---------------------------------------------------------------------------


@dataclass
class PosteriorSamples:
    """
    R retained draws of the hierarchical state, plus what is needed to
    predict without the original dataset (design matrix, covariate scale).
    """

    theta: dict[str, np.ndarray]  # (R, p)
    inclusion: dict[str, np.ndarray]  # (R, p) bool
    alpha: dict[str, np.ndarray]  # (R,)
    tau: dict[str, np.ndarray]  # (R, S)
    log_posterior: np.ndarray  # (R,)
    config: ChainConfig
    acceptance_rates: dict[str, float]
    covariates: np.ndarray  # (S, p) training design matrix
    station_ids: list[str]
    covariate_names: list[str]
    standardization: list[tuple[float, float]]
    log_covariates: tuple[str, ...] = ()
    kind: Literal["regional", "local"] = "regional"

    def __len__(self) -> int:
        return int(self.log_posterior.shape[0])

    @property
    def n_stations(self) -> int:
        return self.covariates.shape[0]

    @property
    def n_covariates(self) -> int:
        return self.covariates.shape[1]

    def station_index(self, station_id: str) -> int:
        try:
            return self.station_ids.index(station_id)
        except ValueError:
            raise DataError(f"unknown station id {station_id!r}") from None

    def draw(self, r: int) -> HierState:
        return HierState(
            **{
                b: RegressionBlock(
                    self.theta[b][r], self.inclusion[b][r], float(self.alpha[b][r]), self.tau[b][r]
                )
                for b in BLOCKS
            }
        )

    @property
    def draws(self) -> Iterator[HierState]:
        return (self.draw(r) for r in range(len(self)))

    # ---------- parameter draws ---------------------------------------------

    def fixed_effects(self, block: BlockName, x: np.ndarray) -> np.ndarray:
        """x·θ^ν for every draw – shape (R,)."""
        return self.theta[block] @ np.asarray(x, dtype=float)

    def site_parameters(self, station_index: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(μ_s, κ_s, ξ_s) per draw, using the chain's own random effects."""
        if not 0 <= station_index < self.n_stations:
            raise DataError(f"station index {station_index} out of range (S={self.n_stations})")
        x = self.covariates[station_index]
        mu = self.fixed_effects("mu", x) + self.tau["mu"][:, station_index]
        kappa = np.exp(self.fixed_effects("kappa", x) + self.tau["kappa"][:, station_index])
        xi = self.fixed_effects("xi", x) + self.tau["xi"][:, station_index]
        return mu, kappa, xi

    # ---------- summaries ---------------------------------------------------

    def inclusion_probabilities(self) -> dict[str, np.ndarray]:
        return {b: self.inclusion[b].mean(axis=0) for b in BLOCKS}

    def theta_summary(self, level: float = 0.9) -> dict[str, dict[str, np.ndarray]]:
        lo, hi = (1 - level) / 2, (1 + level) / 2
        return {
            b: {
                "mean": self.theta[b].mean(axis=0),
                "sd": self.theta[b].std(axis=0),
                "lo": np.quantile(self.theta[b], lo, axis=0),
                "hi": np.quantile(self.theta[b], hi, axis=0),
            }
            for b in BLOCKS
        }

    # ---------- persistence -------------------------------------------------

    def arrays(self) -> dict[str, np.ndarray]:
        out: dict[str, np.ndarray] = {"log_posterior": self.log_posterior, "covariates": self.covariates}
        for b in BLOCKS:
            out[f"theta_{b}"] = self.theta[b]
            out[f"inclusion_{b}"] = self.inclusion[b]
            out[f"alpha_{b}"] = self.alpha[b]
            out[f"tau_{b}"] = self.tau[b]
        return out

    def header(self) -> dict:
        return {
            "kind": self.kind,
            "n_draws": len(self),
            "station_ids": list(self.station_ids),
            "covariate_names": list(self.covariate_names),
            "standardization": [list(p) for p in self.standardization],
            "log_covariates": list(self.log_covariates),
            "acceptance_rates": self.acceptance_rates,
            "config": self.config.model_dump(),
        }

    @classmethod
    def from_parts(cls, header: dict, arrays: dict[str, np.ndarray]) -> "PosteriorSamples":
        return cls(
            theta={b: arrays[f"theta_{b}"] for b in BLOCKS},
            inclusion={b: arrays[f"inclusion_{b}"].astype(bool) for b in BLOCKS},
            alpha={b: arrays[f"alpha_{b}"] for b in BLOCKS},
            tau={b: arrays[f"tau_{b}"] for b in BLOCKS},
            log_posterior=arrays["log_posterior"],
            config=ChainConfig.model_validate(header["config"]),
            acceptance_rates=dict(header.get("acceptance_rates", {})),
            covariates=arrays["covariates"],
            station_ids=list(header["station_ids"]),
            covariate_names=list(header["covariate_names"]),
            standardization=[tuple(p) for p in header["standardization"]],
            log_covariates=tuple(header.get("log_covariates", ())),
            kind=header.get("kind", "regional"),
        )
