# floodbma/hier/selection.py
"""
Covariate pre-selection: bidirectional stepwise OLS minimising

    AIC = n log(RSS/n) + 2k

with the index flood (station mean of the annual maxima) as default response.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike

from floodbma.errors import DataError
from floodbma.hier.models import Dataset
from floodbma.logger import get_logger

logger = get_logger(__name__)

# Relative RSS floor: fits better than this are "perfect" and tie, so a
# zero-noise response does not keep absorbing covariates on rounding noise.
_RSS_FLOOR = 1e-12
_TOL = 1e-9


def index_flood(data: Dataset) -> np.ndarray:
    """Mean annual maximum per station."""
    return np.array([np.mean(st.annual_maxima) for st in data.stations])


def _aic(X: np.ndarray, y: np.ndarray, cols: list[int], floor: float) -> float:
    n = y.size
    coef, *_ = np.linalg.lstsq(X[:, cols], y, rcond=None)
    rss = float(np.sum((y - X[:, cols] @ coef) ** 2))
    return n * np.log(max(rss, floor) / n) + 2 * len(cols)


def stepwise_aic(X: ArrayLike, y: ArrayLike) -> np.ndarray:
    """
    Stepwise search on a design matrix whose column 0 is the intercept.

    Starts from the intercept-only model; each step applies the single
    addition or removal with the lowest AIC and stops when no move lowers it.
    Ties are broken by the lowest column index, so the result is deterministic.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if y.shape != (n,):
        raise DataError(f"response has length {y.size}, expected {n}")
    if n < (p - 1) + 2:
        raise DataError(
            f"stepwise selection needs at least {p + 1} stations for {p - 1} candidate covariates (got {n})"
        )

    tss = float(np.sum((y - y.mean()) ** 2))
    floor = _RSS_FLOOR * max(tss, np.finfo(float).tiny)
    current = [0]
    best = _aic(X, y, current, floor)

    while True:
        moves: list[tuple[float, int, list[int]]] = []
        for j in range(1, p):
            cand = sorted(set(current) ^ {j})
            moves.append((_aic(X, y, cand, floor), j, cand))
        score, j, cand = min(moves, key=lambda m: (m[0], m[1]))
        if score < best - _TOL:
            logger.debug("stepwise: %s covariate %d (AIC %.4f → %.4f)",
                         "add" if j not in current else "drop", j, best, score)
            current, best = cand, score
        else:
            break

    selected = np.zeros(p, dtype=bool)
    selected[current] = True
    return selected


def stepwise_aic_selection(
    data: Dataset, response: ArrayLike | None = None, log_response: bool = False
) -> np.ndarray:
    """Inclusion vector (intercept always True) from stepwise AIC on *data*'s covariates."""
    y = index_flood(data) if response is None else np.asarray(response, dtype=float)
    if log_response:
        if np.any(y <= 0):
            raise DataError("log response requires strictly positive values")
        y = np.log(y)
    selected = stepwise_aic(data.X, y)
    logger.info(
        "stepwise AIC selected %s",
        [n for n, s in zip(data.covariate_names, selected) if s],
    )
    return selected
