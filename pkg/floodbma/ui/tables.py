# floodbma/ui/tables.py
from __future__ import annotations

import numbers

import pandas as pd
from rich.table import Table

from floodbma.ui import console, console_lock


def _fmt(value, digits: int) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, numbers.Real) and not isinstance(value, numbers.Integral):
        return f"{value:.{digits}g}"
    return str(value)


def frame_table(frame: pd.DataFrame, title: str | None = None, digits: int = 4) -> Table:
    table = Table(title=title, header_style="primary")
    for col in frame.columns:
        table.add_column(str(col), justify="left" if frame[col].dtype == object else "right")
    for row in frame.itertuples(index=False):
        table.add_row(*(_fmt(v, digits) for v in row))
    return table


def print_frame(frame: pd.DataFrame, title: str | None = None, digits: int = 4) -> None:
    with console_lock():
        console.print(frame_table(frame, title, digits))
