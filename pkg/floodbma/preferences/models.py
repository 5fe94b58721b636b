# floodbma/preferences/models.py
"""
Typed view of the layered configuration.

Every YAML section maps onto one pydantic model; `RunConfig` aggregates them
with ``extra="forbid"`` so a misspelt key fails loudly (exit code 2).
"""

from __future__ import annotations

from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from floodbma.errors import ConfigError
from floodbma.hier import Priors
from floodbma.local import LocalSettings
from floodbma.mcmc.models import ChainConfig
from floodbma.validation.cv import CvSettings


def _check_periods(v: list[float]) -> list[float]:
    if not v:
        raise ValueError("at least one return period is required")
    if any(t <= 1 for t in v):
        raise ValueError(f"return periods must be > 1 (got {v})")
    return v


class DataSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    maxima: Path | None = None
    covariates: Path | None = None
    sites: Path | None = None
    covariate_columns: list[str] | None = None
    log_covariates: list[str] = Field(default_factory=list)
    min_years: int = Field(20, ge=1)


class PredictionSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    return_periods: list[float] = Field(default_factory=lambda: [10.0, 50.0, 100.0, 1000.0])
    credible: float = Field(0.8, gt=0, lt=1)
    sims_per_component: int = Field(50, ge=1)
    curve_periods: list[float] = Field(
        default_factory=lambda: [1.1, 1.5, 2, 3, 5, 10, 20, 50, 100, 200, 500, 1000]
    )

    @field_validator("return_periods", "curve_periods")
    @classmethod
    def _periods(cls, v: list[float]) -> list[float]:
        return _check_periods(v)


class ValidationSettings(CvSettings):
    folds: list[str] | None = Field(None, description="fold station ids; null → stratified default")


class SelectionSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    log_response: bool = False


class SimulationSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_stations: int = Field(50, ge=2)
    n_years: int = Field(60, ge=1)
    n_covariates: int = Field(13, ge=0)
    n_nonzero: int = Field(5, ge=0)


class OutputSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    directory: Path = Path("runs")
    progress: bool = True


class RunConfig(BaseModel):
    """The fully resolved configuration of one command invocation."""

    model_config = ConfigDict(extra="forbid")

    seed: int = 2024
    data: DataSettings = Field(default_factory=DataSettings)
    priors: Priors = Field(default_factory=Priors)
    chain: ChainConfig = Field(default_factory=ChainConfig)
    prediction: PredictionSettings = Field(default_factory=PredictionSettings)
    local: LocalSettings = Field(default_factory=LocalSettings)
    validation: ValidationSettings = Field(default_factory=ValidationSettings)
    selection: SelectionSettings = Field(default_factory=SelectionSettings)
    simulation: SimulationSettings = Field(default_factory=SimulationSettings)
    output: OutputSettings = Field(default_factory=OutputSettings)

    @model_validator(mode="after")
    def _master_seed(self) -> "RunConfig":
        # the chain stream is derived from the run's master seed
        if self.chain.seed != self.seed:
            self.chain = self.chain.model_copy(update={"seed": self.seed})
        return self

    def require_inputs(self, *names: str) -> list[Path]:
        """Paths of the named data files; `ConfigError` if unset or missing."""
        paths = []
        for name in names:
            value = getattr(self.data, name)
            if value is None:
                raise ConfigError(f"data.{name} is not set (use --{name} or the config file)")
            if not Path(value).exists():
                raise ConfigError(f"data.{name} does not exist: {value}")
            paths.append(Path(value))
        return paths

    def echo(self) -> dict:
        """JSON-compatible dict in declaration order, for config.yml."""
        return self.model_dump(mode="json")


SECTION_MODELS: dict[str, type[BaseModel]] = {
    "data": DataSettings,
    "priors": Priors,
    "chain": ChainConfig,
    "prediction": PredictionSettings,
    "local": LocalSettings,
    "validation": ValidationSettings,
    "selection": SelectionSettings,
    "simulation": SimulationSettings,
    "output": OutputSettings,
}
