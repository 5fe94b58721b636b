# floodbma/mcmc/checkpoint.py
"""
Resumable chain checkpoints.

``<name>.json``  schema_version, iteration, HierState, PCG64 state, tracker
                 counts, chain config and priors, station ids
``<name>.npz``   the draws retained so far (byte-reproducible)

Resuming from a checkpoint and running to the end yields the same draws as an
uninterrupted run with the same seed.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict

from floodbma.errors import DataError
from floodbma.files import SCHEMA_VERSION, read_json, read_npz, write_json, write_npz
from floodbma.hier import Priors
from floodbma.logger import get_logger
from floodbma.mcmc.models import ChainConfig

logger = get_logger(__name__)


class Checkpoint(BaseModel):
    model_config = ConfigDict(extra="forbid")

    schema_version: int = SCHEMA_VERSION
    iteration: int
    n_stored: int
    state: dict
    rng_state: dict
    tracker: dict
    config: ChainConfig
    priors: Priors
    station_ids: list[str]


def checkpoint_paths(path: Path) -> tuple[Path, Path]:
    path = Path(path)
    return path.with_suffix(".json"), path.with_suffix(".npz")


def save_checkpoint(checkpoint: Checkpoint, buffers: dict[str, np.ndarray], path: Path) -> Path:
    json_path, npz_path = checkpoint_paths(path)
    n = checkpoint.n_stored
    write_npz(npz_path, {k: v[:n] for k, v in buffers.items()})
    payload = checkpoint.model_dump(mode="json", exclude={"schema_version"})
    write_json(json_path, payload, schema_version=checkpoint.schema_version)
    logger.info("checkpoint written: %s (iteration %d)", json_path, checkpoint.iteration)
    return json_path


def load_checkpoint(path: Path) -> tuple[Checkpoint, dict[str, np.ndarray]]:
    json_path, npz_path = checkpoint_paths(path)
    if not json_path.exists() or not npz_path.exists():
        raise DataError("checkpoint incomplete", path=json_path)
    raw = read_json(json_path)
    if raw.get("schema_version") != SCHEMA_VERSION:
        raise DataError(
            f"unsupported checkpoint schema_version {raw.get('schema_version')!r}", path=json_path
        )
    return Checkpoint.model_validate(raw), read_npz(npz_path)


def restore_generator(state: dict) -> np.random.Generator:
    bit_gen = np.random.PCG64()
    bit_gen.state = state
    return np.random.Generator(bit_gen)
