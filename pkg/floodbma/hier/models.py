# floodbma/hier/models.py
"""
Data model of the hierarchical regression.

• `Station`, `Priors` are pydantic v2 models (validated at the boundary).
• `Dataset`, `RegressionBlock`, `HierState` are numpy-backed dataclasses:
  they sit in the sampler's hot path, where validation per copy would cost
  more than the update itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterator, Literal, Sequence

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from floodbma.errors import DataError

BlockName = Literal["mu", "kappa", "xi"]
BLOCKS: tuple[BlockName, ...] = ("mu", "kappa", "xi")
CONSTANT = "constant"

# Standardized covariates beyond this magnitude almost surely were not
# standardized with the training statistics.
MAX_ABS_Z = 10.0


# ---------------------------------------------------------------------------
# Station
# ---------------------------------------------------------------------------


class Station(BaseModel):
    """One gauged site: its annual maxima and standardized covariates (x[0] ≡ 1)."""

    model_config = ConfigDict(frozen=True)

    id: str
    annual_maxima: list[float] = Field(..., min_length=1)
    covariates: list[float] = Field(..., min_length=1)

    @field_validator("annual_maxima")
    @classmethod
    def _finite_maxima(cls, v: list[float]) -> list[float]:
        if not all(math.isfinite(y) for y in v):
            raise ValueError("annual maxima must be finite")
        return v

    @field_validator("covariates")
    @classmethod
    def _leading_one(cls, v: list[float]) -> list[float]:
        if v[0] != 1.0:
            raise ValueError("first covariate must be the constant 1")
        if not all(math.isfinite(x) for x in v):
            raise ValueError("covariates must be finite")
        return v

    @property
    def n_years(self) -> int:
        return len(self.annual_maxima)


# ---------------------------------------------------------------------------
# Standardization
# ---------------------------------------------------------------------------


def standardize_columns(raw: ArrayLike) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Column-wise z-scores of a (stations × covariates) matrix.

    Returns ``(z, means, sds)``; sds use ddof=1.  A constant column cannot be
    standardized and raises `DataError`.
    """
    raw = np.atleast_2d(np.asarray(raw, dtype=float))
    means = raw.mean(axis=0)
    sds = raw.std(axis=0, ddof=1) if raw.shape[0] > 1 else np.zeros(raw.shape[1])
    flat = ~(sds > 0)
    if flat.any():
        raise DataError(
            f"covariate column(s) {np.flatnonzero(flat).tolist()} are constant across stations; cannot standardize"
        )
    return (raw - means) / sds, means, sds


# ---------------------------------------------------------------------------
# Dataset
# ---------------------------------------------------------------------------


@dataclass
class Dataset:
    """
    The set of stations plus the covariate bookkeeping needed to map raw
    covariates of a new site onto the training scale.

    ``covariate_names[0]`` is always ``"constant"``; ``standardization`` is
    aligned with it and holds ``(0.0, 1.0)`` for the constant.
    """

    stations: list[Station]
    covariate_names: list[str]
    standardization: list[tuple[float, float]]
    log_covariates: tuple[str, ...] = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.stations:
            raise DataError("dataset has no stations")
        p = len(self.covariate_names)
        if self.covariate_names[0] != CONSTANT:
            raise DataError(f"first covariate must be {CONSTANT!r}")
        if len(self.standardization) != p:
            raise DataError("standardization does not match covariate names")
        for st in self.stations:
            if len(st.covariates) != p:
                raise DataError(
                    f"station {st.id} has {len(st.covariates)} covariates, expected {p}"
                )
        for name, (_, sd) in zip(self.covariate_names[1:], self.standardization[1:]):
            if not sd > 0:
                raise DataError(f"covariate {name!r} has non-positive sd")
        ids = [st.id for st in self.stations]
        if len(set(ids)) != len(ids):
            raise DataError("duplicate station ids in dataset")

    # ---------- shapes -------------------------------------------------------

    @property
    def n_stations(self) -> int:
        return len(self.stations)

    @property
    def n_covariates(self) -> int:
        return len(self.covariate_names)

    @cached_property
    def station_ids(self) -> list[str]:
        return [st.id for st in self.stations]

    @cached_property
    def X(self) -> np.ndarray:
        """Design matrix, stations × covariates."""
        return np.array([st.covariates for st in self.stations], dtype=float)

    @cached_property
    def n_years(self) -> np.ndarray:
        return np.array([st.n_years for st in self.stations], dtype=int)

    @cached_property
    def Y(self) -> np.ndarray:
        """Annual maxima padded to stations × max(n_years); padding is 0, see `mask`."""
        out = np.zeros((self.n_stations, int(self.n_years.max())))
        for i, st in enumerate(self.stations):
            out[i, : st.n_years] = st.annual_maxima
        return out

    @cached_property
    def mask(self) -> np.ndarray:
        return np.arange(self.Y.shape[1])[None, :] < self.n_years[:, None]

    @property
    def n_observations(self) -> int:
        return int(self.n_years.sum())

    def __iter__(self) -> Iterator[Station]:
        return iter(self.stations)

    # ---------- lookup / slicing --------------------------------------------

    def index_of(self, station_id: str) -> int:
        try:
            return self.station_ids.index(station_id)
        except ValueError:
            raise DataError(f"unknown station id {station_id!r}") from None

    def subset(self, indices: Sequence[int]) -> "Dataset":
        """Stations at *indices*; covariate scale (training standardization) unchanged."""
        return replace(
            self,
            stations=[self.stations[i] for i in indices],
            metadata={**self.metadata, "parent_stations": self.n_stations},
        )

    def without(self, station_id: str) -> "Dataset":
        drop = self.index_of(station_id)
        return self.subset([i for i in range(self.n_stations) if i != drop])

    def select_covariates(self, columns: Sequence[int]) -> "Dataset":
        """Keep covariate *columns* (0 is forced in) – e.g. an intercept-only baseline."""
        cols = sorted(set([0, *columns]))
        return replace(
            self,
            stations=[
                st.model_copy(update={"covariates": [st.covariates[c] for c in cols]})
                for st in self.stations
            ],
            covariate_names=[self.covariate_names[c] for c in cols],
            standardization=[self.standardization[c] for c in cols],
            log_covariates=tuple(n for n in self.log_covariates if n in {self.covariate_names[c] for c in cols}),
        )

    # ---------- covariate scale ---------------------------------------------

    def standardize(self, raw: ArrayLike) -> np.ndarray:
        """
        Map raw covariates (ordered as ``covariate_names[1:]``) of one or more
        sites onto the training scale, prepending the constant.
        """
        return standardize_raw(raw, self.covariate_names[1:], self.standardization, self.log_covariates)

    @classmethod
    def from_raw(
        cls,
        station_ids: Sequence[str],
        maxima: Sequence[Sequence[float]],
        raw_covariates: ArrayLike,
        covariate_names: Sequence[str],
        log_covariates: Sequence[str] = (),
        metadata: dict | None = None,
    ) -> "Dataset":
        """Build a dataset, standardizing *raw_covariates* on these stations."""
        raw = np.atleast_2d(np.asarray(raw_covariates, dtype=float)).copy()
        names = list(covariate_names)
        unknown = set(log_covariates) - set(names)
        if unknown:
            raise DataError(f"log transform requested for unknown covariates {sorted(unknown)}")
        for j, name in enumerate(names):
            if name in log_covariates:
                if np.any(raw[:, j] <= 0):
                    raise DataError(f"covariate {name!r} must be > 0 to take logs")
                raw[:, j] = np.log(raw[:, j])
        if raw.shape[1]:
            z, means, sds = standardize_columns(raw)
        else:
            z, means, sds = raw, np.zeros(0), np.zeros(0)
        stations = [
            Station(id=str(sid), annual_maxima=list(map(float, ys)), covariates=[1.0, *map(float, row)])
            for sid, ys, row in zip(station_ids, maxima, z)
        ]
        return cls(
            stations=stations,
            covariate_names=[CONSTANT, *names],
            standardization=[(0.0, 1.0), *zip(map(float, means), map(float, sds))],
            log_covariates=tuple(log_covariates),
            metadata=dict(metadata or {}),
        )


def standardize_raw(
    raw: ArrayLike,
    names: Sequence[str],
    standardization: Sequence[tuple[float, float]],
    log_covariates: Sequence[str] = (),
) -> np.ndarray:
    """Rows of raw covariates (ordered as *names*) → design rows with the leading 1."""
    raw = np.atleast_2d(np.asarray(raw, dtype=float)).copy()
    if raw.shape[1] != len(names):
        raise DataError(f"expected {len(names)} raw covariates, got {raw.shape[1]}")
    for j, name in enumerate(names):
        if name in log_covariates:
            if np.any(raw[:, j] <= 0):
                raise DataError(f"covariate {name!r} must be > 0 to take logs")
            raw[:, j] = np.log(raw[:, j])
    means = np.array([m for m, _ in standardization[1:]])
    sds = np.array([s for _, s in standardization[1:]])
    return np.hstack([np.ones((raw.shape[0], 1)), (raw - means) / sds])


def check_standardized(x: ArrayLike, n_covariates: int, limit: float = MAX_ABS_Z) -> np.ndarray:
    """
    Validate one standardized covariate vector of a new site.

    Raises `DataError` on a dimension mismatch, a missing leading 1, or a
    value whose magnitude shows it is still on the raw scale.
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.size != n_covariates:
        raise DataError(f"covariate vector has length {x.size}, expected {n_covariates}")
    if x[0] != 1.0:
        raise DataError("first element of a covariate vector must be the constant 1")
    if not np.all(np.isfinite(x)):
        raise DataError("covariate vector contains non-finite values")
    big = np.flatnonzero(np.abs(x[1:]) > limit)
    if big.size:
        raise DataError(
            f"covariate(s) {(big + 1).tolist()} exceed |z| > {limit}; "
            "pass raw values through Dataset.standardize first"
        )
    return x


# ---------------------------------------------------------------------------
# Hierarchical state
# ---------------------------------------------------------------------------


@dataclass
class RegressionBlock:
    """θ^ν, its inclusion indicators M^ν, random-effect precision α^ν and τ^ν_s."""

    theta: np.ndarray
    inclusion: np.ndarray
    alpha: float
    tau: np.ndarray

    def __post_init__(self) -> None:
        self.theta = np.asarray(self.theta, dtype=float)
        self.inclusion = np.asarray(self.inclusion, dtype=bool)
        self.tau = np.asarray(self.tau, dtype=float)
        self.alpha = float(self.alpha)

    def validate(self) -> None:
        if self.theta.shape != self.inclusion.shape:
            raise DataError("theta and inclusion differ in length")
        if not self.inclusion[0]:
            raise DataError("intercept must always be included")
        if np.any(self.theta[~self.inclusion] != 0.0):
            raise DataError("excluded coefficients must be exactly zero")
        if not self.alpha > 0:
            raise DataError(f"alpha must be > 0 (got {self.alpha})")

    def copy(self) -> "RegressionBlock":
        return RegressionBlock(self.theta.copy(), self.inclusion.copy(), self.alpha, self.tau.copy())

    def fixed_effect(self, X: np.ndarray) -> np.ndarray:
        return X @ self.theta

    def to_dict(self) -> dict:
        return {
            "theta": self.theta.tolist(),
            "inclusion": self.inclusion.tolist(),
            "alpha": self.alpha,
            "tau": self.tau.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RegressionBlock":
        return cls(data["theta"], data["inclusion"], data["alpha"], data["tau"])


@dataclass
class HierState:
    """One point of the parameter space: a regression block per GEV parameter."""

    mu: RegressionBlock
    kappa: RegressionBlock
    xi: RegressionBlock

    def block(self, name: BlockName) -> RegressionBlock:
        return getattr(self, name)

    def with_block(self, name: BlockName, block: RegressionBlock) -> "HierState":
        """New state sharing the untouched blocks; blocks are never mutated in place."""
        return replace(self, **{name: block})

    def copy(self) -> "HierState":
        return HierState(self.mu.copy(), self.kappa.copy(), self.xi.copy())

    def validate(self, data: "Dataset | None" = None) -> None:
        for name in BLOCKS:
            blk = self.block(name)
            blk.validate()
            if data is not None:
                if blk.theta.size != data.n_covariates or blk.tau.size != data.n_stations:
                    raise DataError(
                        f"{name} block has shape (p={blk.theta.size}, S={blk.tau.size}); "
                        f"dataset has (p={data.n_covariates}, S={data.n_stations})"
                    )

    def to_dict(self) -> dict:
        return {name: self.block(name).to_dict() for name in BLOCKS}

    @classmethod
    def from_dict(cls, data: dict) -> "HierState":
        return cls(**{name: RegressionBlock.from_dict(data[name]) for name in BLOCKS})

    @classmethod
    def zeros(cls, n_covariates: int, n_stations: int, alpha: float = 1.0) -> "HierState":
        def _blk() -> RegressionBlock:
            inc = np.zeros(n_covariates, dtype=bool)
            inc[0] = True
            return RegressionBlock(np.zeros(n_covariates), inc, alpha, np.zeros(n_stations))

        return cls(_blk(), _blk(), _blk())


# ---------------------------------------------------------------------------
# Priors
# ---------------------------------------------------------------------------


class Priors(BaseModel):
    """
    θ^ν_i ~ N(0, theta_sd²) for included coefficients, α^ν ~ Gamma(shape, rate),
    each non-intercept covariate included with probability ``inclusion_prob``.
    """

    model_config = ConfigDict(extra="forbid")

    theta_sd: float = Field(1.0, gt=0, description="sd of the normal θ prior (standardized scale)")
    alpha_shape: float = Field(0.1, gt=0)
    alpha_rate: float = Field(0.1, gt=0)
    inclusion_prob: float = Field(0.5, gt=0, le=1, description="prior Bernoulli inclusion probability")

    @model_validator(mode="after")
    def _finite(self) -> "Priors":
        for k in ("theta_sd", "alpha_shape", "alpha_rate"):
            if not math.isfinite(getattr(self, k)):
                raise ValueError(f"{k} must be finite")
        return self
