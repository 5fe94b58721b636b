# floodbma/files.py
"""
Atomic, byte-reproducible artifact writers.

Every write goes tmp-file → replace so readers never see half-written files.
JSON payloads carry ``schema_version``; CSV files start with a
``# schema_version=<n>`` comment line.  ``.npz`` archives are written with a
fixed zip timestamp so identical arrays give identical bytes.
"""

from __future__ import annotations

import io
import json
import zipfile
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import pandas as pd
import yaml

from floodbma.logger import get_logger

logger = get_logger(__name__)

SCHEMA_VERSION = 1
_ZIP_EPOCH = (1980, 1, 1, 0, 0, 0)


def atomic_write_bytes(path: Path, payload: bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(payload)
    tmp.replace(path)
    return path


def atomic_write_text(path: Path, text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def write_json(path: Path, payload: Mapping[str, Any], schema_version: int = SCHEMA_VERSION) -> Path:
    body = {"schema_version": schema_version, **payload}
    text = json.dumps(body, indent=2, sort_keys=False, default=_jsonable, allow_nan=True)
    return atomic_write_text(path, text + "\n")


def read_json(path: Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def write_csv(path: Path, frame: pd.DataFrame, schema_version: int = SCHEMA_VERSION) -> Path:
    buf = io.StringIO()
    buf.write(f"# schema_version={schema_version}\n")
    frame.to_csv(buf, index=False, float_format="%.10g", lineterminator="\n")
    return atomic_write_text(path, buf.getvalue())


def read_csv(path: Path, **kwargs) -> pd.DataFrame:
    return pd.read_csv(path, comment="#", **kwargs)


def write_yaml(path: Path, data: Mapping[str, Any]) -> Path:
    text = yaml.safe_dump(dict(data), sort_keys=False, allow_unicode=True, default_flow_style=False)
    return atomic_write_text(path, text)


def write_npz(path: Path, arrays: Mapping[str, np.ndarray]) -> Path:
    """`numpy.savez` layout, but with fixed member timestamps (byte-reproducible)."""
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, mode="w", compression=zipfile.ZIP_STORED) as zf:
        for name in sorted(arrays):
            member = io.BytesIO()
            np.lib.format.write_array(member, np.asarray(arrays[name]), allow_pickle=False)
            info = zipfile.ZipInfo(f"{name}.npy", date_time=_ZIP_EPOCH)
            info.external_attr = 0o644 << 16
            zf.writestr(info, member.getvalue())
    return atomic_write_bytes(path, buf.getvalue())


def read_npz(path: Path) -> dict[str, np.ndarray]:
    with np.load(path, allow_pickle=False) as npz:
        return {k: npz[k] for k in npz.files}
