# floodbma/mcmc/diagnostics.py
"""
Single-chain convergence diagnostics.

ESS and the Monte Carlo standard error of the mean come from arviz (a 1-D
trace is treated as one chain); the Geweke z-score is built on top of the
arviz standard errors of the two trace segments.
"""

from __future__ import annotations

import math

import arviz as az
import numpy as np
from numpy.typing import ArrayLike

from floodbma.errors import NumericError

MIN_SEGMENT = 8


def _trace(values: ArrayLike, min_length: int) -> np.ndarray:
    x = np.asarray(values, dtype=float).ravel()
    if x.size < min_length:
        raise NumericError(f"trace too short ({x.size} < {min_length})")
    if not np.all(np.isfinite(x)):
        raise NumericError("trace contains non-finite values")
    return x


def mc_standard_error(values: ArrayLike) -> float:
    """Monte Carlo standard error of the trace mean."""
    x = _trace(values, 4)
    if np.ptp(x) == 0:
        return 0.0
    return float(az.mcse(x, method="mean"))


def effective_sample_size(values: ArrayLike) -> float:
    x = _trace(values, 4)
    if np.ptp(x) == 0:
        return float(x.size)
    return float(az.ess(x, method="mean"))


def geweke_z(values: ArrayLike, first: float = 0.1, last: float = 0.5) -> float:
    """
    Difference between the means of the first *first* and last *last*
    fractions of the trace, in units of their combined standard error.
    """
    if not (0 < first < 1 and 0 < last < 1 and first + last <= 1):
        raise ValueError("first and last must be fractions with first + last <= 1")
    x = _trace(values, 2 * MIN_SEGMENT)
    a = x[: max(MIN_SEGMENT, int(first * x.size))]
    b = x[x.size - max(MIN_SEGMENT, int(last * x.size)) :]
    se2 = mc_standard_error(a) ** 2 + mc_standard_error(b) ** 2
    diff = a.mean() - b.mean()
    if se2 == 0 or not math.isfinite(se2):
        return 0.0 if diff == 0 else math.copysign(math.inf, diff)
    return float(diff / math.sqrt(se2))
