# floodbma/mcmc/proposals.py
"""
Proposal machinery shared by every Metropolis-Hastings update.

The Gaussian-approximation proposal expands the target log-density to second
order around the current value x₀:

    log π(x) ≈ const + b x − c x² / 2,   c = −f2,  b = f1 − f2·x₀

and proposes from N(b/c, 1/c).  When c ≤ 0 (or the derivatives are not
finite) the update falls back to a symmetric random walk.

Vectorised throughout: `gaussian_mh_step` moves k independent scalar targets
at once (one per station for τ, k=1 for a single θ coefficient).
"""

from __future__ import annotations

from typing import Callable

import numpy as np
from numpy.typing import ArrayLike

from floodbma.errors import SupportError
from floodbma.gev import XI_EPS

LOG_2PI = float(np.log(2 * np.pi))
NUMERIC_REL_STEP = 1e-5

LogTarget = Callable[[np.ndarray], np.ndarray]
Derivatives = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]


# ──────────────────────────────────────────────────────────────
# Gaussian approximation
# ──────────────────────────────────────────────────────────────
def gaussian_approx(
    f1: ArrayLike, f2: ArrayLike, current: ArrayLike
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Array form: ``(mean, variance, ok)``; mean/variance are NaN where ``ok`` is False."""
    f1 = np.asarray(f1, dtype=float)
    f2 = np.asarray(f2, dtype=float)
    current = np.asarray(current, dtype=float)
    c = -f2
    ok = np.isfinite(f1) & np.isfinite(c) & (c > 0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        mean = np.where(ok, current + f1 / c, np.nan)
        var = np.where(ok, 1.0 / c, np.nan)
    ok &= np.isfinite(mean) & np.isfinite(var) & (var > 0)
    return mean, var, ok


def gaussian_approx_proposal(f1: float, f2: float, current: float) -> tuple[float, float] | None:
    """
    Proposal moments ``(mean, variance)`` from the first/second derivative of
    the target at *current*; ``None`` signals that the caller must fall back
    to a random walk.
    """
    mean, var, ok = gaussian_approx(f1, f2, current)
    if not bool(ok):
        return None
    return float(mean), float(var)


def normal_logpdf(x: ArrayLike, mean: ArrayLike, var: ArrayLike) -> np.ndarray:
    x, mean, var = (np.asarray(a, dtype=float) for a in (x, mean, var))
    return -0.5 * (LOG_2PI + np.log(var) + (x - mean) ** 2 / var)


# ──────────────────────────────────────────────────────────────
# acceptance
# ──────────────────────────────────────────────────────────────
def log_acceptance_ratio(
    log_target_new: ArrayLike,
    log_target_old: ArrayLike,
    log_q_old_given_new: ArrayLike,
    log_q_new_given_old: ArrayLike,
) -> np.ndarray:
    new = np.asarray(log_target_new, dtype=float)
    old = np.asarray(log_target_old, dtype=float)
    with np.errstate(invalid="ignore"):
        log_r = (new - old) + (np.asarray(log_q_old_given_new) - np.asarray(log_q_new_given_old))
    # -inf target never accepted; leaving an impossible state always is
    log_r = np.where(np.isneginf(new), -np.inf, log_r)
    log_r = np.where(np.isneginf(old) & np.isfinite(new), np.inf, log_r)
    return np.where(np.isnan(log_r), -np.inf, log_r)


def accept_log_ratio(log_r: ArrayLike, rng: np.random.Generator):
    """Accept when log U < log r; NaN ratios are rejections."""
    log_r = np.asarray(log_r, dtype=float)
    log_r = np.where(np.isnan(log_r), -np.inf, log_r)
    accepted = np.log(rng.random(log_r.shape)) < log_r
    return bool(accepted) if accepted.ndim == 0 else accepted


def mh_accept(
    log_target_new: ArrayLike,
    log_target_old: ArrayLike,
    log_q_old_given_new: ArrayLike,
    log_q_new_given_old: ArrayLike,
    rng: np.random.Generator,
):
    """
    Accept with probability min(r, 1).  Scalar inputs give a bool, array
    inputs an elementwise boolean array (one uniform per element).
    """
    log_r = log_acceptance_ratio(
        log_target_new, log_target_old, log_q_old_given_new, log_q_new_given_old
    )
    return accept_log_ratio(log_r, rng)


# ──────────────────────────────────────────────────────────────
# analytic τ^κ derivatives
# ──────────────────────────────────────────────────────────────
def kappa_h(y: ArrayLike, mu: ArrayLike, xi: ArrayLike, eta_hat: ArrayLike, tau: ArrayLike) -> np.ndarray:
    """h as a function of τ^κ: 1 + ξ ε e^{η̂+τ} (GEV) or exp(−e^{η̂+τ} ε) (Gumbel)."""
    y, mu, xi, eta_hat, tau = np.broadcast_arrays(
        *(np.asarray(a, dtype=float) for a in (y, mu, xi, eta_hat, tau))
    )
    z = (y - mu) * np.exp(eta_hat + tau)
    gumbel = np.abs(xi) < XI_EPS
    with np.errstate(over="ignore"):
        return np.where(gumbel, np.exp(-z), 1.0 + xi * z)


def kappa_dh_dtau(y: ArrayLike, mu: ArrayLike, xi: ArrayLike, eta_hat: ArrayLike, tau: ArrayLike) -> np.ndarray:
    """∂h/∂τ^κ: h − 1 (GEV) or h·log h (Gumbel)."""
    h = kappa_h(y, mu, xi, eta_hat, tau)
    gumbel = np.abs(np.broadcast_to(np.asarray(xi, dtype=float), h.shape)) < XI_EPS
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(gumbel, h * np.log(h), h - 1.0)


def kappa_derivatives(
    y: ArrayLike, mu: ArrayLike, xi: ArrayLike, eta: ArrayLike
) -> tuple[np.ndarray, np.ndarray]:
    """
    First and second derivative of log f(y) with respect to η = log κ.

    With z = ε e^η, h = 1 + ξ z and a = h^{−1/ξ}:

        first  = 1 − (z/h)(1 + ξ − a)
        second = −(z/h²)(1 + ξ − a + a z)

    which is the exact derivative of the log-likelihood written in terms of
    h; the ξ→0 limit agrees with the Gumbel branch below.  Gumbel, with
    h = exp(−z):

        first  = 1 + log h − h log h
        second = log h − h (log h)² − h log h

    Out-of-support entries (h ≤ 0) come back as NaN.
    """
    y, mu, xi, eta = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (y, mu, xi, eta)))
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        z = (y - mu) * np.exp(eta)
        gumbel = np.abs(xi) < XI_EPS
        xi_safe = np.where(gumbel, 1.0, xi)
        h = 1.0 + xi_safe * z
        valid = h > 0
        a = np.exp(-np.log(np.where(valid, h, 1.0)) / xi_safe)
        first_gev = 1.0 - (z / h) * (1.0 + xi_safe - a)
        second_gev = -(z / h**2) * (1.0 + xi_safe - a + a * z)

        log_hg = -z
        hg = np.exp(log_hg)
        first_gum = 1.0 + log_hg - hg * log_hg
        second_gum = log_hg - hg * log_hg**2 - hg * log_hg

    first = np.where(gumbel, first_gum, np.where(valid, first_gev, np.nan))
    second = np.where(gumbel, second_gum, np.where(valid, second_gev, np.nan))
    return first, second


def dloglik_dtau_kappa(
    y: float, mu: float, xi: float, eta_hat: float, tau: float
) -> tuple[float, float]:
    """
    Derivatives of one observation's log-likelihood with respect to τ^κ at
    log κ = η̂ + τ.  Raises `SupportError` when h ≤ 0.
    """
    h = kappa_h(y, mu, xi, eta_hat, tau)
    if abs(xi) >= XI_EPS and not float(h) > 0:
        raise SupportError(
            f"observation {y} outside the GEV support (h={float(h):.4g}) "
            f"for mu={mu}, xi={xi}, log kappa={eta_hat + tau}"
        )
    first, second = kappa_derivatives(y, mu, xi, eta_hat + tau)
    return float(first), float(second)


# ──────────────────────────────────────────────────────────────
# numeric derivatives
# ──────────────────────────────────────────────────────────────
def numeric_step(x: ArrayLike) -> np.ndarray:
    return NUMERIC_REL_STEP * np.maximum(1.0, np.abs(np.asarray(x, dtype=float)))


def central_derivatives(
    fn: LogTarget, x: np.ndarray, f0: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Elementwise central differences of a separable target, step 1e−5·max(1,|x|)."""
    x = np.asarray(x, dtype=float)
    h = numeric_step(x)
    f_plus = fn(x + h)
    f_minus = fn(x - h)
    f_mid = fn(x) if f0 is None else f0
    with np.errstate(invalid="ignore", over="ignore"):
        f1 = (f_plus - f_minus) / (2 * h)
        f2 = (f_plus - 2 * f_mid + f_minus) / h**2
    return f1, f2


# ──────────────────────────────────────────────────────────────
# generic vectorised MH step
# ──────────────────────────────────────────────────────────────
def proposal_moments(
    x: np.ndarray, log_target_x: np.ndarray, derivatives: Derivatives, fallback_step: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(mean, variance, used_gaussian) of the proposal built at *x*."""
    with np.errstate(invalid="ignore", over="ignore"):
        f1, f2 = derivatives(x, log_target_x)
    mean, var, ok = gaussian_approx(f1, f2, x)
    ok &= np.isfinite(log_target_x)
    mean = np.where(ok, mean, x)
    var = np.where(ok, var, fallback_step**2)
    return mean, var, ok


def gaussian_mh_step(
    x: np.ndarray,
    log_target: LogTarget,
    derivatives: Derivatives,
    fallback_step: float,
    rng: np.random.Generator,
    log_target_x: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    One MH step for k independent scalar targets.

    *log_target* maps a (k,) vector to the (k,) vector of target values,
    element j depending only on x[j].  *derivatives(x, log_target(x))*
    returns the matching (f1, f2).

    Returns ``(x_new, accepted, used_fallback, log_target_new)``.
    """
    x = np.asarray(x, dtype=float)
    lt_x = log_target(x) if log_target_x is None else log_target_x
    mean, var, ok = proposal_moments(x, lt_x, derivatives, fallback_step)
    proposal = mean + np.sqrt(var) * rng.standard_normal(x.shape)

    lt_p = log_target(proposal)
    mean_r, var_r, _ = proposal_moments(proposal, lt_p, derivatives, fallback_step)

    lq_fwd = normal_logpdf(proposal, mean, var)
    lq_rev = normal_logpdf(x, mean_r, var_r)
    accepted = np.asarray(mh_accept(lt_p, lt_x, lq_rev, lq_fwd, rng), dtype=bool).reshape(x.shape)

    x_new = np.where(accepted, proposal, x)
    lt_new = np.where(accepted, lt_p, lt_x)
    return x_new, accepted, ~ok, lt_new
