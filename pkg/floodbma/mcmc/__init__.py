# floodbma/mcmc/__init__.py
"""
Metropolis-Hastings-within-Gibbs sampler for the hierarchical GEV model.

One sweep visits the blocks μ → κ → ξ and, per block, runs
θ → inclusion → τ → (τ-compensated moves) → α.  The chain is strictly
sequential; independent chains only share the master seed, from which each
derives its own stream.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Callable

import numpy as np

from floodbma.errors import DataError
from floodbma.hier import (
    BLOCKS,
    Dataset,
    HierState,
    Priors,
    RegressionBlock,
    log_model_prior,
    log_posterior,
)
from floodbma.logger import get_logger
from floodbma.mcmc.checkpoint import Checkpoint, load_checkpoint, restore_generator, save_checkpoint
from floodbma.mcmc.diagnostics import effective_sample_size, geweke_z, mc_standard_error
from floodbma.mcmc.models import AcceptanceTracker, ChainConfig, PosteriorSamples
from floodbma.mcmc.proposals import dloglik_dtau_kappa, gaussian_approx_proposal, mh_accept
from floodbma.mcmc.updates import (
    update_alpha,
    update_centered,
    update_inclusion,
    update_tau,
    update_theta,
)
from floodbma.rng import RngLike, stream

logger = get_logger(__name__)

EULER_GAMMA = 0.5772156649015329
FALLBACK_WARN_SHARE = 0.5

__all__ = [
    "AcceptanceTracker",
    "ChainConfig",
    "PosteriorSamples",
    "Sampler",
    "initial_state",
    "gumbel_moment_estimates",
    "run_chain",
    "gaussian_approx_proposal",
    "mh_accept",
    "dloglik_dtau_kappa",
    "update_tau",
    "update_theta",
    "update_inclusion",
    "update_centered",
    "update_alpha",
    "geweke_z",
    "mc_standard_error",
    "effective_sample_size",
]


def gumbel_moment_estimates(y: np.ndarray, fallback_sd: float = 1.0) -> tuple[float, float]:
    """(μ, log κ) of the Gumbel with the sample mean and sd of *y*: σ = √6·sd/π, μ = mean − γσ."""
    y = np.asarray(y, dtype=float)
    sd = float(np.std(y, ddof=1)) if y.size > 1 else fallback_sd
    sd = max(sd, 1e-6 * max(abs(float(y.mean())), 1.0))
    sigma = math.sqrt(6.0) * sd / math.pi
    return float(y.mean()) - EULER_GAMMA * sigma, -math.log(sigma)


def initial_state(data: Dataset) -> HierState:
    """
    Intercept-only starting point from per-station Gumbel moment estimates;
    random effects start at 0 and the precisions at the inverse spread of
    the station estimates.
    """
    pooled_sd = float(np.std(np.concatenate([st.annual_maxima for st in data]))) or 1.0
    estimates = np.array([gumbel_moment_estimates(st.annual_maxima, pooled_sd) for st in data])
    mu_hat, eta_hat = estimates[:, 0], estimates[:, 1]

    def _block(values: np.ndarray | None, alpha: float) -> RegressionBlock:
        theta = np.zeros(data.n_covariates)
        inclusion = np.zeros(data.n_covariates, dtype=bool)
        inclusion[0] = True
        theta[0] = 0.0 if values is None else float(values.mean())
        return RegressionBlock(theta, inclusion, alpha, np.zeros(data.n_stations))

    def _precision(values: np.ndarray) -> float:
        var = float(values.var(ddof=1)) if values.size > 1 else 0.0
        return 1.0 / var if var > 0 else 1.0

    return HierState(
        mu=_block(mu_hat, _precision(mu_hat)),
        kappa=_block(eta_hat, _precision(eta_hat)),
        xi=_block(None, 100.0),
    )


def _allocate(n: int, p: int, s: int) -> dict[str, np.ndarray]:
    buf: dict[str, np.ndarray] = {"log_posterior": np.empty(n)}
    for b in BLOCKS:
        buf[f"theta_{b}"] = np.empty((n, p))
        buf[f"inclusion_{b}"] = np.empty((n, p), dtype=bool)
        buf[f"alpha_{b}"] = np.empty(n)
        buf[f"tau_{b}"] = np.empty((n, s))
    return buf


class Sampler:
    """
    Stateful chain: `sweep()` advances one iteration, `run()` drives the
    sweeps to ``config.n_iterations`` storing the retained draws, and
    `checkpoint()` / `from_checkpoint()` persist and resume it.
    """

    def __init__(
        self,
        data: Dataset,
        priors: Priors | None = None,
        config: ChainConfig | None = None,
        rng: RngLike = None,
        state: HierState | None = None,
    ):
        self.data = data
        self.priors = priors or Priors()
        self.config = config or ChainConfig()
        if isinstance(rng, np.random.Generator):
            self.rng = rng
        else:
            self.rng = stream(self.config.seed if rng is None else int(rng), "chain")
        self.state = initial_state(data) if state is None else state
        self.state.validate(data)
        self.iteration = 0
        self.n_stored = 0
        self.tracker = AcceptanceTracker()
        self.thin = self.config.effective_thin
        self._buffers = _allocate(self.config.n_retained, data.n_covariates, data.n_stations)

    # ---------- one iteration ------------------------------------------------

    def sweep(self) -> HierState:
        state, data, priors, cfg, rng, tr = (
            self.state, self.data, self.priors, self.config, self.rng, self.tracker,
        )
        for block in BLOCKS:
            state = update_theta(block, state, data, priors, rng, cfg, tr)
            state = update_inclusion(block, state, data, priors, rng, cfg, tr)
            state = update_tau(block, state, data, priors, rng, cfg, tr)
            if cfg.centered_moves:
                state = update_centered(block, state, data, priors, rng, cfg, tr)
            state = update_alpha(block, state, priors, rng)
        self.state = state
        self.iteration += 1
        if self._retained(self.iteration):
            self._store()
        return state

    def _retained(self, t: int) -> bool:
        burn = self.config.n_burnin
        return t > burn and (t - burn) % self.thin == 0 and self.n_stored < self.config.n_retained

    def _store(self) -> None:
        r = self.n_stored
        buf = self._buffers
        for b in BLOCKS:
            blk = self.state.block(b)
            buf[f"theta_{b}"][r] = blk.theta
            buf[f"inclusion_{b}"][r] = blk.inclusion
            buf[f"alpha_{b}"][r] = blk.alpha
            buf[f"tau_{b}"][r] = blk.tau
        buf["log_posterior"][r] = log_posterior(self.state, self.data, self.priors) + log_model_prior(
            self.state, self.priors
        )
        self.n_stored += 1

    # ---------- full run -----------------------------------------------------

    @property
    def finished(self) -> bool:
        return self.iteration >= self.config.n_iterations

    def run(
        self,
        until: int | None = None,
        callback: Callable[[int], None] | None = None,
        checkpoint_path: Path | None = None,
    ) -> PosteriorSamples:
        """
        Sweep until iteration *until* (default: the configured total),
        calling *callback(iteration)* after each sweep.  Returns the draws
        retained so far.
        """
        cfg = self.config
        stop = cfg.n_iterations if until is None else min(until, cfg.n_iterations)
        if self.iteration == 0:
            logger.info(
                "chain start: S=%d p=%d iterations=%d burnin=%d thin=%d seed=%d",
                self.data.n_stations,
                self.data.n_covariates,
                cfg.n_iterations,
                cfg.n_burnin,
                self.thin,
                cfg.seed,
            )
        while self.iteration < stop:
            self.sweep()
            t = self.iteration
            if t % cfg.log_every == 0:
                logger.debug("iteration %d acceptance %s", t, self.tracker.rates())
            if checkpoint_path is not None and cfg.checkpoint_every and t % cfg.checkpoint_every == 0:
                self.checkpoint(checkpoint_path)
            if callback is not None:
                callback(t)

        if checkpoint_path is not None:
            self.checkpoint(checkpoint_path)
        if self.finished:
            self._report()
        return self.samples()

    def _report(self) -> None:
        logger.info("chain finished: %d draws, acceptance %s", self.n_stored, self.tracker.rates())
        for key, share in self.tracker.fallback_rates().items():
            if share > FALLBACK_WARN_SHARE:
                logger.warning("%s: random-walk fallback used for %.0f%% of proposals", key, 100 * share)

    def samples(self) -> PosteriorSamples:
        n = self.n_stored
        buf = {k: v[:n].copy() for k, v in self._buffers.items()}
        buf["covariates"] = self.data.X.copy()
        header = {
            "station_ids": self.data.station_ids,
            "covariate_names": self.data.covariate_names,
            "standardization": self.data.standardization,
            "log_covariates": self.data.log_covariates,
            "acceptance_rates": self.tracker.rates(),
            "config": self.config.model_dump(),
        }
        return PosteriorSamples.from_parts(header, buf)

    # ---------- persistence --------------------------------------------------

    def checkpoint(self, path: Path) -> Path:
        cp = Checkpoint(
            iteration=self.iteration,
            n_stored=self.n_stored,
            state=self.state.to_dict(),
            rng_state=self.rng.bit_generator.state,
            tracker=self.tracker.to_dict(),
            config=self.config,
            priors=self.priors,
            station_ids=self.data.station_ids,
        )
        return save_checkpoint(cp, self._buffers, path)

    @classmethod
    def from_checkpoint(cls, path: Path, data: Dataset) -> "Sampler":
        cp, arrays = load_checkpoint(path)
        if cp.station_ids != data.station_ids:
            raise DataError("checkpoint was written for a different set of stations", path=path)
        sampler = cls(
            data,
            cp.priors,
            cp.config,
            rng=restore_generator(cp.rng_state),
            state=HierState.from_dict(cp.state),
        )
        sampler.iteration = cp.iteration
        sampler.n_stored = cp.n_stored
        sampler.tracker = AcceptanceTracker.from_dict(cp.tracker)
        for k, v in arrays.items():
            sampler._buffers[k][: cp.n_stored] = v
        logger.info("resumed chain at iteration %d from %s", cp.iteration, path)
        return sampler


def run_chain(
    data: Dataset,
    priors: Priors | None = None,
    config: ChainConfig | None = None,
    rng: RngLike = None,
    callback: Callable[[int], None] | None = None,
    checkpoint_path: Path | None = None,
) -> PosteriorSamples:
    """Run a full chain; the result is bit-identical for a fixed seed."""
    return Sampler(data, priors, config, rng).run(callback=callback, checkpoint_path=checkpoint_path)
