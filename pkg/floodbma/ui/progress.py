# floodbma/ui/progress.py
from __future__ import annotations

from contextlib import contextmanager, nullcontext
from typing import Callable, Iterator

from rich.errors import LiveError
from rich.progress import (
    BarColumn,
    MofNCompleteColumn,
    Progress,
    TextColumn,
    TimeRemainingColumn,
)

from floodbma.ui import console


@contextmanager
def chain_progress(total: int, message: str = "Sampling…", enabled: bool = True) -> Iterator[Callable[[int], None]]:
    """
    Yield a callback ``advance(iteration)`` that drives a rich progress bar.

    Examples
    --------
    >>> with chain_progress(1000, "fold 3") as advance:
    ...     run_chain(data, priors, cfg, callback=advance)

    Nested bars raise LiveError in rich; the inner one degrades to a no-op.
    """
    if not enabled:
        with nullcontext(lambda _it: None) as cb:
            yield cb
        return

    progress = Progress(
        TextColumn("[primary]{task.description}"),
        BarColumn(),
        MofNCompleteColumn(),
        TimeRemainingColumn(),
        console=console,
        transient=True,
    )
    try:
        progress.start()
    except LiveError:
        yield lambda _it: None
        return

    task = progress.add_task(message, total=total)

    def advance(iteration: int) -> None:
        progress.update(task, completed=iteration)

    try:
        yield advance
    finally:
        progress.stop()
