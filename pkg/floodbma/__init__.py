# floodbma/__init__.py
"""Regional flood frequency analysis with a Bayesian hierarchical GEV model."""

from floodbma.errors import ConfigError, DataError, FloodBmaError, NumericError

__all__ = ["ConfigError", "DataError", "FloodBmaError", "NumericError"]
