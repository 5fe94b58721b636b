# floodbma/mcmc/updates.py
"""
The five conditional updates of one Gibbs sweep, per regression block ν:

    update_theta       MH on each included θ^ν_i
    update_inclusion   reversible-jump birth/death on each non-intercept M^ν_i
    update_tau         MH on every τ^ν_s (vectorised, independent per station)
    update_centered    τ-compensated translation and birth/death of θ^ν_i
    update_alpha       conjugate Gibbs draw of α^ν

Each update returns a new `HierState`; input states are never mutated.
The κ block uses the analytic derivatives in `proposals.kappa_derivatives`,
the μ and ξ blocks central differences of the same log-target.
"""

from __future__ import annotations

import numpy as np

from floodbma.hier import BLOCKS, BlockName, Dataset, HierState, Priors, RegressionBlock
from floodbma.hier import station_log_likelihoods
from floodbma.mcmc.models import AcceptanceTracker, ChainConfig
from floodbma.mcmc.proposals import (
    accept_log_ratio,
    central_derivatives,
    gaussian_mh_step,
    kappa_derivatives,
    normal_logpdf,
    proposal_moments,
)

DEFAULT_CHAIN = ChainConfig()

__all__ = [
    "linear_predictors",
    "conditional_log_likelihoods",
    "update_tau",
    "update_theta",
    "update_inclusion",
    "update_centered",
    "update_alpha",
]


# ──────────────────────────────────────────────────────────────
# helpers
# ──────────────────────────────────────────────────────────────
def linear_predictors(state: HierState, X: np.ndarray) -> dict[str, np.ndarray]:
    """x_s·θ^ν + τ^ν_s for each block (κ on the log scale)."""
    return {b: X @ state.block(b).theta + state.block(b).tau for b in BLOCKS}


def conditional_log_likelihoods(
    data: Dataset, lin: dict[str, np.ndarray], xi_bound: float
) -> np.ndarray:
    """Per-station log-likelihood; -inf for stations with |ξ_s| ≥ xi_bound."""
    with np.errstate(over="ignore"):
        kappa = np.exp(lin["kappa"])
    ll = station_log_likelihoods(data, lin["mu"], kappa, lin["xi"])
    return np.where(np.abs(lin["xi"]) >= xi_bound, -np.inf, ll)


def _station_kappa_derivatives(
    data: Dataset, lin: dict[str, np.ndarray], eta: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Σ_t ∂/∂η and ∂²/∂η² of station log-likelihoods at log κ_s = eta_s."""
    f1, f2 = kappa_derivatives(data.Y, lin["mu"][:, None], lin["xi"][:, None], eta[:, None])
    return np.where(data.mask, f1, 0.0).sum(axis=1), np.where(data.mask, f2, 0.0).sum(axis=1)


def _with(lin: dict[str, np.ndarray], block: BlockName, values: np.ndarray) -> dict[str, np.ndarray]:
    out = dict(lin)
    out[block] = values
    return out


class _Coefficient:
    """
    Log-likelihood and derivatives of one θ^ν_i with everything else fixed,
    as a function of a length-1 vector (so it plugs into `gaussian_mh_step`).
    """

    def __init__(
        self,
        block: BlockName,
        i: int,
        state: HierState,
        data: Dataset,
        lin: dict[str, np.ndarray],
        priors: Priors,
        xi_bound: float,
    ):
        self.block = block
        self.data = data
        self.lin = lin
        self.xi_bound = xi_bound
        self.sd2 = priors.theta_sd**2
        self.x = data.X[:, i]
        self.base = lin[block] - state.block(block).theta[i] * self.x

    def linear(self, v: float) -> dict[str, np.ndarray]:
        return _with(self.lin, self.block, self.base + v * self.x)

    def log_likelihood(self, v: np.ndarray) -> np.ndarray:
        return np.array(
            [conditional_log_likelihoods(self.data, self.linear(float(v[0])), self.xi_bound).sum()]
        )

    def log_target(self, v: np.ndarray) -> np.ndarray:
        return self.log_likelihood(v) + normal_logpdf(v, 0.0, self.sd2)

    def derivatives(self, v: np.ndarray, lt: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self.block != "kappa":
            return central_derivatives(self.log_target, v, lt)
        lin = self.linear(float(v[0]))
        g1, g2 = _station_kappa_derivatives(self.data, lin, lin["kappa"])
        f1 = np.array([np.dot(self.x, g1)]) - v / self.sd2
        f2 = np.array([np.dot(self.x**2, g2)]) - 1.0 / self.sd2
        return f1, f2


# ──────────────────────────────────────────────────────────────
# τ
# ──────────────────────────────────────────────────────────────
def update_tau(
    block: BlockName,
    state: HierState,
    data: Dataset,
    priors: Priors,
    rng: np.random.Generator,
    config: ChainConfig = DEFAULT_CHAIN,
    tracker: AcceptanceTracker | None = None,
) -> HierState:
    """
    One MH step for every station's τ^ν_s.  Stations are conditionally
    independent given the rest of the state, so the S steps are done at once
    with one accept decision each.
    """
    blk = state.block(block)
    lin = linear_predictors(state, data.X)
    fixed = lin[block] - blk.tau
    alpha = blk.alpha

    def log_target(t: np.ndarray) -> np.ndarray:
        ll = conditional_log_likelihoods(data, _with(lin, block, fixed + t), config.xi_bound)
        return ll - 0.5 * alpha * t**2

    if block == "kappa":

        def derivatives(t: np.ndarray, lt: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
            f1, f2 = _station_kappa_derivatives(data, lin, fixed + t)
            return f1 - alpha * t, f2 - alpha

    else:

        def derivatives(t: np.ndarray, lt: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
            return central_derivatives(log_target, t, lt)

    tau, accepted, fallback, _ = gaussian_mh_step(
        blk.tau, log_target, derivatives, config.step(block), rng
    )
    if tracker is not None:
        tracker.record(f"tau.{block}", accepted)
        tracker.record_fallback(f"tau.{block}", fallback)
    return state.with_block(block, RegressionBlock(blk.theta.copy(), blk.inclusion.copy(), alpha, tau))


# ──────────────────────────────────────────────────────────────
# θ
# ──────────────────────────────────────────────────────────────
def update_theta(
    block: BlockName,
    state: HierState,
    data: Dataset,
    priors: Priors,
    rng: np.random.Generator,
    config: ChainConfig = DEFAULT_CHAIN,
    tracker: AcceptanceTracker | None = None,
) -> HierState:
    """MH update of each included θ^ν_i in index order; excluded entries stay 0."""
    blk = state.block(block)
    theta = blk.theta.copy()
    lin = linear_predictors(state, data.X)
    current = state.with_block(block, RegressionBlock(theta, blk.inclusion, blk.alpha, blk.tau))

    for i in np.flatnonzero(blk.inclusion):
        coef = _Coefficient(block, int(i), current, data, lin, priors, config.xi_bound)
        new, accepted, fallback, _ = gaussian_mh_step(
            theta[i : i + 1], coef.log_target, coef.derivatives, config.step(block), rng
        )
        if accepted[0]:
            theta[i] = new[0]
            lin = coef.linear(float(new[0]))
        if tracker is not None:
            tracker.record(f"theta.{block}", accepted)
            tracker.record_fallback(f"theta.{block}", fallback)

    return state.with_block(
        block, RegressionBlock(theta, blk.inclusion.copy(), blk.alpha, blk.tau.copy())
    )


# ──────────────────────────────────────────────────────────────
# M (inclusion)
# ──────────────────────────────────────────────────────────────
def update_inclusion(
    block: BlockName,
    state: HierState,
    data: Dataset,
    priors: Priors,
    rng: np.random.Generator,
    config: ChainConfig = DEFAULT_CHAIN,
    tracker: AcceptanceTracker | None = None,
) -> HierState:
    """
    Birth/death move per non-intercept covariate.

    Both directions use the proposal q = Gaussian approximation of the
    θ_i-conditional (likelihood × N(0, theta_sd²)) built at θ_i = 0:

        birth:  log r = g(v) + log π − L(0) − log(1−π) − log q(v)
        death:  log r = L(0) + log(1−π) + log q(θ_i) − g(θ_i) − log π

    with g = log-likelihood + θ prior and L(0) the log-likelihood at θ_i = 0.
    """
    blk = state.block(block)
    theta = blk.theta.copy()
    inclusion = blk.inclusion.copy()
    lin = linear_predictors(state, data.X)
    with np.errstate(divide="ignore"):
        log_pi = np.log(priors.inclusion_prob)
        log_1mpi = np.log1p(-priors.inclusion_prob)
    step = config.step(block)

    for i in range(1, theta.size):
        current = state.with_block(block, RegressionBlock(theta, inclusion, blk.alpha, blk.tau))
        coef = _Coefficient(block, i, current, data, lin, priors, config.xi_bound)
        zero = np.zeros(1)
        l0 = coef.log_likelihood(zero)
        g0 = l0 + normal_logpdf(zero, 0.0, coef.sd2)
        mean, var, ok = proposal_moments(zero, g0, coef.derivatives, step)

        if inclusion[i]:
            key = f"death.{block}"
            v = theta[i : i + 1]
            with np.errstate(invalid="ignore"):
                log_r = l0 + log_1mpi + normal_logpdf(v, mean, var) - coef.log_target(v) - log_pi
            accepted = accept_log_ratio(log_r, rng)
            if accepted[0]:
                theta[i] = 0.0
                inclusion[i] = False
                lin = coef.linear(0.0)
        else:
            key = f"birth.{block}"
            v = mean + np.sqrt(var) * rng.standard_normal(1)
            with np.errstate(invalid="ignore"):
                log_r = coef.log_target(v) + log_pi - l0 - log_1mpi - normal_logpdf(v, mean, var)
            accepted = accept_log_ratio(log_r, rng)
            if accepted[0]:
                theta[i] = float(v[0])
                inclusion[i] = True
                lin = coef.linear(float(v[0]))

        if tracker is not None:
            tracker.record(key, accepted)
            tracker.record_fallback(key, ~ok)

    return state.with_block(block, RegressionBlock(theta, inclusion, blk.alpha, blk.tau.copy()))


# ──────────────────────────────────────────────────────────────
# τ-compensated moves
# ──────────────────────────────────────────────────────────────
def update_centered(
    block: BlockName,
    state: HierState,
    data: Dataset,
    priors: Priors,
    rng: np.random.Generator,
    config: ChainConfig = DEFAULT_CHAIN,
    tracker: AcceptanceTracker | None = None,
) -> HierState:
    """
    Moves that shift θ^ν_i by δ and τ^ν by −δ·x_i together, leaving every
    site parameter (hence the likelihood) unchanged.  Only the θ and τ priors
    enter, so both moves are exact:

    * included i: Gibbs draw δ ~ N(m, 1/P) with
      P = 1/sd² + α Σ x², m = (−θ_i/sd² + α Σ τ x) / P
    * non-intercept i: birth/death that toggles M_i, absorbing θ_i x_i into τ
      on death and drawing θ_i from the conditional on birth, accepted with
      log r = ±(log π − log(1−π) + log Z),
      log Z = −½ log(sd² P) + (α Σ τ x)² / (2P)
    """
    blk = state.block(block)
    theta = blk.theta.copy()
    inclusion = blk.inclusion.copy()
    tau = blk.tau.copy()
    alpha = blk.alpha
    sd2 = priors.theta_sd**2
    with np.errstate(divide="ignore"):
        log_odds = np.log(priors.inclusion_prob) - np.log1p(-priors.inclusion_prob)

    X = data.X
    for i in range(theta.size):
        x = X[:, i]
        prec = 1.0 / sd2 + alpha * float(x @ x)

        if inclusion[i]:
            mean = (-theta[i] / sd2 + alpha * float(tau @ x)) / prec
            delta = mean + rng.standard_normal() / np.sqrt(prec)
            theta[i] += delta
            tau -= delta * x
            if tracker is not None:
                tracker.record(f"centered.{block}", True)

        if i == 0:
            continue

        if inclusion[i]:
            tau_star = tau + theta[i] * x
            b = alpha * float(tau_star @ x)
            log_z = -0.5 * np.log(sd2 * prec) + b**2 / (2 * prec)
            accepted = accept_log_ratio(-(log_odds + log_z), rng)
            if accepted:
                theta[i] = 0.0
                inclusion[i] = False
                tau = tau_star
        else:
            b = alpha * float(tau @ x)
            log_z = -0.5 * np.log(sd2 * prec) + b**2 / (2 * prec)
            accepted = accept_log_ratio(log_odds + log_z, rng)
            if accepted:
                delta = b / prec + rng.standard_normal() / np.sqrt(prec)
                theta[i] = delta
                inclusion[i] = True
                tau = tau - delta * x
        if tracker is not None:
            tracker.record(f"swap.{block}", accepted)

    return state.with_block(block, RegressionBlock(theta, inclusion, alpha, tau))


# ──────────────────────────────────────────────────────────────
# α
# ──────────────────────────────────────────────────────────────
def update_alpha(
    block: BlockName,
    state: HierState,
    priors: Priors,
    rng: np.random.Generator,
) -> HierState:
    """Gibbs draw α^ν ~ Gamma(shape + S/2, rate + Σ τ²/2)."""
    blk = state.block(block)
    shape = priors.alpha_shape + blk.tau.size / 2
    rate = priors.alpha_rate + float(blk.tau @ blk.tau) / 2
    alpha = float(rng.gamma(shape, 1.0 / rate))
    return state.with_block(
        block, RegressionBlock(blk.theta.copy(), blk.inclusion.copy(), alpha, blk.tau.copy())
    )
