# floodbma/env.py
"""
floodbma.env
============

Single source-of-truth for:

• Project-root discovery & locking
• User-level config root (~/.floodbma)
• Standard *project-local* tree
      <project>/.floodbma
      <project>/.floodbma/settings
      <project>/.floodbma/logs
• Run-id helpers (one id per CLI invocation that writes artifacts)
• Resource-file resolver that survives editable installs & namespace packages
"""

from __future__ import annotations

import os
from contextlib import contextmanager
from datetime import datetime
from importlib import resources as ir
from importlib import util as iutil
try:
    from importlib.resources.readers import MultiplexedPath
except ImportError:  # Python 3.10
    from importlib.readers import MultiplexedPath
from pathlib import Path
from threading import Lock
from typing import Iterator, Optional

# ──────────────────────────────────────────────────────────────
# internal state
# ──────────────────────────────────────────────────────────────
_LOCK = Lock()
_PROJECT_ROOT: Path = Path.cwd().resolve()  # locked-in once per process
_RUN_ID: str | None = os.getenv("FLOODBMA_RUN_ID")  # may stay None

ENV_PREFIX = "FLOODBMA_"


# ──────────────────────────────────────────────────────────────
# project root helpers
# ──────────────────────────────────────────────────────────────
def set_project_root(path: Path) -> None:
    """Change the canonical project root."""
    global _PROJECT_ROOT
    with _LOCK:
        _PROJECT_ROOT = Path(path).resolve()


def get_project_root() -> Path:
    return _PROJECT_ROOT


# ──────────────────────────────────────────────────────────────
# user-level (~/.floodbma) helper
# ──────────────────────────────────────────────────────────────
def get_user_root() -> Path:
    """Return ~/.floodbma (caller decides whether to create)."""
    custom = os.getenv(f"{ENV_PREFIX}HOME")
    return Path(custom).expanduser() if custom else Path("~/.floodbma").expanduser()


# ──────────────────────────────────────────────────────────────
# project-local directory helpers
# ──────────────────────────────────────────────────────────────
def _ensure_dir(p: Path) -> Path:
    p.mkdir(parents=True, exist_ok=True)
    return p


def get_dot_floodbma() -> Path:
    """`<project>/.floodbma` – lazily created on first call."""
    return _ensure_dir(get_project_root() / ".floodbma")


def get_dot_floodbma_settings() -> Path:
    """`<project>/.floodbma/settings` – per-project preference overrides."""
    return _ensure_dir(get_dot_floodbma() / "settings")


def get_logs_root() -> Path:
    """`<project>/.floodbma/logs` – persistent logs."""
    return _ensure_dir(get_dot_floodbma() / "logs")


# ──────────────────────────────────────────────────────────────
# run-id helpers
# ──────────────────────────────────────────────────────────────
def get_run_id() -> str | None:
    return _RUN_ID


def generate_run_id(command: str, seed: int | None = None) -> str:
    """
    Return ``<command>-<YYYYmmdd-HHMMSS>[-<seed>]`` and export it so child
    processes (cross-validation workers) log to the same file.
    """
    global _RUN_ID
    stamp = datetime.now().strftime("%Y%m%d-%H%M%S")
    _RUN_ID = f"{command}-{stamp}" + (f"-{seed}" if seed is not None else "")
    os.environ[f"{ENV_PREFIX}RUN_ID"] = _RUN_ID
    return _RUN_ID


def make_run_dir(output: Path, command: str, seed: int | None = None, exact: bool = False) -> Path:
    """
    Create the directory a command writes its artifacts into.

    ``exact=True`` uses *output* itself; otherwise a run-stamped child
    ``<output>/<run_id>`` is created.
    """
    run_id = generate_run_id(command, seed)
    target = Path(output) if exact else Path(output) / run_id
    return _ensure_dir(target.expanduser().resolve())


# ──────────────────────────────────────────────────────────────
# environment overrides
# ──────────────────────────────────────────────────────────────
def get_env_overrides() -> dict:
    """
    Collect ``FLOODBMA_<SECTION>__<KEY>=value`` variables into a nested dict.

    Values are left as strings; pydantic coerces them when the run config is
    validated.  ``FLOODBMA_HOME`` and ``FLOODBMA_RUN_ID`` are not settings.
    """
    out: dict = {}
    for key, value in os.environ.items():
        if not key.startswith(ENV_PREFIX) or "__" not in key:
            continue
        path = [p.lower() for p in key[len(ENV_PREFIX):].split("__") if p]
        if not path:
            continue
        node = out
        for part in path[:-1]:
            node = node.setdefault(part, {})
        node[path[-1]] = value
    return out


@contextmanager
def get_resource_path(pkg: str, name: Optional[str] = None) -> Iterator[Path]:
    """
    Yield a real on-disk Path to *name* inside *pkg*.

    Handles:
      • regular wheels / zip-safe wheels
      • editable installs on Python 3.12 (work-around synthetic path bug)
      • namespace packages (PEP 420)
    """
    try:
        traversable = ir.files(pkg)
    except NotADirectoryError:
        # ───── editable-install workaround ─────
        spec = iutil.find_spec(pkg)
        if not spec or not spec.submodule_search_locations:
            raise

        real_dirs = [p for p in spec.submodule_search_locations if Path(p).is_dir()]
        if not real_dirs:
            raise

        traversable = MultiplexedPath(*real_dirs)

    if name:
        traversable = traversable / name

    with ir.as_file(traversable) as path:
        yield path
