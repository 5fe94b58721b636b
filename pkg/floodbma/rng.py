# floodbma/rng.py
"""
Random-stream plumbing.

All randomness in a run flows from one master seed.  Each component gets its
own child stream ``SeedSequence([master, component, *extra])``:

    chain       0      (extra: chain index)
    prediction  1
    bootstrap   2
    fold        3      (extra: fold position, then the chain/prediction split)
    simulate    4
    local       5      (extra: station position)
"""

from __future__ import annotations

from typing import Literal

import numpy as np

Component = Literal["chain", "prediction", "bootstrap", "fold", "simulate", "local"]

COMPONENTS: dict[str, int] = {
    "chain": 0,
    "prediction": 1,
    "bootstrap": 2,
    "fold": 3,
    "simulate": 4,
    "local": 5,
}

RngLike = np.random.Generator | int | None


def child_seed(master: int, component: Component, *extra: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(master), COMPONENTS[component], *map(int, extra)])


def stream(master: int, component: Component, *extra: int) -> np.random.Generator:
    """Generator for *component* derived from the master seed."""
    return np.random.Generator(np.random.PCG64(child_seed(master, component, *extra)))


def as_generator(rng: RngLike, default_seed: int = 0) -> np.random.Generator:
    """Accept a Generator, an integer seed, or None (→ *default_seed*)."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.Generator(np.random.PCG64(default_seed if rng is None else int(rng)))
