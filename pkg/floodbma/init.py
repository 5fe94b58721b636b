"""Bootstrap of ~/.floodbma and <project>/.floodbma.

Idempotent: packaged defaults are copied only where no file exists yet, so
local edits are never overwritten.
"""

from __future__ import annotations

import shutil
from pathlib import Path
from typing import List, Sequence, Tuple

from rich.tree import Tree

from floodbma import env
from floodbma.logger import get_logger
from floodbma.ui import console, print_warning

__all__ = ["initialize_floodbma", "PROJECT_SUBDIRS"]

logger = get_logger(__name__)

PROJECT_SUBDIRS: Sequence[str] = ("settings", "logs", "runs")


def _copy_tree(src: Path, dst: Path) -> None:
    """Recursively copy *src* → *dst*; never overwrites existing files."""
    if src.is_dir():
        dst.mkdir(parents=True, exist_ok=True)
        for item in src.iterdir():
            _copy_tree(item, dst / item.name)
    else:
        dst.parent.mkdir(parents=True, exist_ok=True)
        if not dst.exists():
            shutil.copy2(src, dst)


def _copy_defaults(target: Path) -> Tuple[List[str], List[str]]:
    """Copy packaged YAML defaults into *target*; returns ``(copied, skipped)``."""
    copied: List[str] = []
    skipped: List[str] = []
    target.mkdir(parents=True, exist_ok=True)
    with env.get_resource_path("floodbma", "dotfile_defaults") as defaults:
        for item in sorted(defaults.iterdir()):
            if item.suffix != ".yml":
                continue
            if (target / item.name).exists():
                skipped.append(item.name)
                continue
            _copy_tree(item, target / item.name)
            copied.append(item.name)
    return copied, skipped


def _sync_project_settings(user_root: Path, settings: Path) -> Tuple[List[str], List[str]]:
    """Copy the user-level YAML files into the project settings once."""
    copied: List[str] = []
    skipped: List[str] = []
    settings.mkdir(parents=True, exist_ok=True)
    for item in sorted(user_root.glob("*.yml")):
        dst = settings / item.name
        if dst.exists():
            skipped.append(item.name)
            continue
        _copy_tree(item, dst)
        copied.append(item.name)
    return copied, skipped


def _render_summary(project_root: Path, copied_user: Sequence[str], copied_proj: Sequence[str]) -> None:
    tree = Tree(f"Initialized floodbma @ [bold]{project_root}[/]")
    dot = tree.add(f"[bold cyan]{env.get_user_root()}[/]")
    dot.add(f"[green]copied[/]: {', '.join(copied_user) or '–'}")
    proj = tree.add("[bold cyan].floodbma[/]")
    proj.add(f"sub-dirs: {', '.join(PROJECT_SUBDIRS)}")
    proj.add(f"settings copied: {', '.join(copied_proj) or '–'}")
    console.print(tree)


def initialize_floodbma(path: str | Path | None = None, quiet: bool = False) -> Tuple[List[str], List[str]]:
    """Create the user and project trees; returns the copied file names of each."""
    project_root = Path(path).expanduser().resolve() if path else env.get_project_root()
    env.set_project_root(project_root)

    user_root = env.get_user_root()
    copied_user, _ = _copy_defaults(user_root)
    dot = env.get_dot_floodbma()
    for sub in PROJECT_SUBDIRS:
        (dot / sub).mkdir(parents=True, exist_ok=True)
    copied_proj, _ = _sync_project_settings(user_root, dot / "settings")

    if not quiet:
        if copied_proj:
            print_warning("Edit `.floodbma/settings/preferences.yml` for project overrides.")
        _render_summary(project_root, copied_user, copied_proj)
    logger.info("floodbma initialisation complete at %s", project_root)
    return copied_user, copied_proj
