# floodbma/preferences/__init__.py
"""
Layered YAML preferences.

Layers, later wins:
    packaged dotfile_defaults/preferences.yml
    ~/.floodbma/preferences.yml
    <project>/.floodbma/settings/preferences.yml
    an explicit --config file
    FLOODBMA_<SECTION>__<KEY> environment variables
    command-line flags (passed to `load_run_config` as *overrides*)
"""

from __future__ import annotations

import copy
from pathlib import Path
from typing import Any, Mapping

import yaml
from pydantic import ValidationError

from floodbma import env
from floodbma.errors import ConfigError
from floodbma.files import write_yaml
from floodbma.logger import get_logger
from floodbma.preferences.models import SECTION_MODELS, RunConfig

logger = get_logger(__name__)

PREFERENCES_FILE = "preferences.yml"


def deep_merge(base: dict, override: Mapping) -> dict:
    """Recursive dict update; returns a new dict, *base* untouched."""
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(out.get(key), dict):
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def read_yaml(path: Path) -> dict:
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def packaged_defaults() -> dict:
    with env.get_resource_path("floodbma.dotfile_defaults", PREFERENCES_FILE) as path:
        return read_yaml(path)


class Preferences:
    def __init__(self, config_path: Path | None = None):
        self.config_path = Path(config_path) if config_path else None
        self.prefs: dict = {}
        self.sources: list[Path] = []
        self._dirty: dict = {}
        self.initialized = False
        self._ensure_loaded()

    def layer_paths(self) -> list[Path]:
        paths = [
            env.get_user_root() / PREFERENCES_FILE,
            env.get_project_root() / ".floodbma" / "settings" / PREFERENCES_FILE,
        ]
        if self.config_path is not None:
            paths.append(self.config_path)
        return paths

    def get_preferences_path(self) -> tuple[Path, bool]:
        """Project-level file; this is where `set(..., save=True)` writes."""
        path = env.get_dot_floodbma_settings() / PREFERENCES_FILE
        return path, path.exists()

    def reload(self) -> None:
        merged = packaged_defaults()
        self.sources = []
        for path in self.layer_paths():
            if path.exists() or path == self.config_path:
                merged = deep_merge(merged, read_yaml(path))
                self.sources.append(path)
        self.prefs = deep_merge(merged, env.get_env_overrides())
        self.initialized = True

    def _ensure_loaded(self) -> None:
        if not self.initialized:
            self.reload()

    def save(self) -> Path:
        path, _ = self.get_preferences_path()
        project = read_yaml(path) if path.exists() else {}
        return write_yaml(path, deep_merge(project, self._dirty))

    def get(self, *keys: str, default: Any = None) -> Any:
        self._ensure_loaded()
        node = self.prefs
        for key in keys:
            if not isinstance(node, dict) or key not in node:
                return default
            node = node[key]
        return node

    def set(self, *keys: str, value: Any, save: bool = False) -> None:
        """
        Set a nested value, e.g. ``prefs.set("chain", "n_iterations", value=5000)``.
        With *save* the change is persisted to the project settings file.
        """
        self._ensure_loaded()
        if not keys:
            raise ValueError("prefs.set() requires at least one key")
        patch: dict = {}
        node = patch
        for key in keys[:-1]:
            node = node.setdefault(key, {})
        node[keys[-1]] = value
        self.prefs = deep_merge(self.prefs, patch)
        self._dirty = deep_merge(self._dirty, patch)
        if save:
            self.save()

    def get_section(self, *keys: str, default: Any | None = None, cast: str = "dict"):
        """
        Fetch a section.  ``cast="obj"`` validates it into its settings model
        (``prefs.get_section("chain", cast="obj")`` → `ChainConfig`);
        validation errors become `ConfigError`.
        """
        data = self.get(*keys, default=default or {})
        if cast == "dict":
            return data or {}
        if cast == "obj":
            model = SECTION_MODELS.get(keys[0] if keys else "")
            if model is None:
                raise ConfigError(f"no settings model for section {'.'.join(keys)!r}")
            try:
                return model.model_validate(data or {})
            except ValidationError as exc:
                raise ConfigError(f"invalid [{keys[0]}] settings:\n{exc}") from exc
        raise ValueError(f"Unsupported cast: {cast!r}")

    def run_config(self, overrides: Mapping | None = None) -> RunConfig:
        merged = deep_merge(self.prefs, _prune_none(overrides or {}))
        try:
            return RunConfig.model_validate(merged)
        except ValidationError as exc:
            raise ConfigError(f"invalid configuration:\n{exc}") from exc


def _prune_none(d: Mapping) -> dict:
    """Drop unset CLI flags so they do not mask lower layers."""
    out = {}
    for k, v in d.items():
        if isinstance(v, Mapping):
            v = _prune_none(v)
            if v:
                out[k] = v
        elif v is not None:
            out[k] = v
    return out


def load_run_config(config_path: Path | None = None, overrides: Mapping | None = None) -> RunConfig:
    """Resolve every layer into a validated `RunConfig`."""
    prefs = Preferences(config_path)
    cfg = prefs.run_config(overrides)
    logger.debug("config resolved from %s", [str(p) for p in prefs.sources])
    return cfg


__all__ = [
    "Preferences",
    "RunConfig",
    "deep_merge",
    "load_run_config",
    "packaged_defaults",
]
