"""CSV ingestion and output helpers."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np

from .errors import InputError


def read_series_csv(path: Union[str, Path], column: Optional[Union[str, int]] = None) -> np.ndarray:
    """Read one series from a CSV with a header row.

    The value column is picked by header name or by zero-based position; the
    default is the last column (the usual ``index,value`` layout). Empty cells
    and ``NA`` become NaN. Anything else that is not a number raises
    :class:`InputError` naming the line.
    """
    path = Path(path)
    try:
        handle = path.open(newline="")
    except OSError as exc:
        raise InputError(f"cannot open {path}: {exc.strerror}") from None
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path} is empty", line=1) from None
        except csv.Error as exc:
            raise InputError(str(exc), line=1) from None
        idx = _column_index(header, column)
        values: List[float] = []
        try:
            for row in reader:
                if not row or all(not c.strip() for c in row):
                    continue
                line = reader.line_num
                if idx >= len(row):
                    raise InputError(f"expected at least {idx + 1} columns", line=line)
                values.append(_number(row[idx], line))
        except csv.Error as exc:
            raise InputError(str(exc), line=reader.line_num) from None
    if not values:
        raise InputError(f"{path} has no data rows", line=2)
    return np.array(values, dtype=float)


def _column_index(header: Sequence[str], column) -> int:
    names = [h.strip() for h in header]
    if column is None:
        return len(names) - 1
    if isinstance(column, int) or str(column).lstrip("-").isdigit():
        k = int(column)
        if not -len(names) <= k < len(names):
            raise InputError(f"column {k} out of range for {len(names)} columns", line=1)
        return k % len(names)
    if column not in names:
        raise InputError(f"no column named {column!r} (have {names})", line=1)
    return names.index(column)


def _number(text: str, line: int) -> float:
    s = text.strip()
    if s == "" or s.upper() in ("NA", "NAN"):
        return math.nan
    try:
        return float(s)
    except ValueError:
        raise InputError(f"cannot parse {s!r} as a number", line=line) from None


def write_series_csv(path: Union[str, Path], values: Iterable[float], name: str = "value") -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", name])
        for i, v in enumerate(values, start=1):
            w.writerow([i, repr(float(v))])


def write_rows(handle, rows: Sequence[dict], columns: Sequence[str]) -> None:
    w = csv.DictWriter(handle, fieldnames=list(columns), lineterminator="\n",
                       extrasaction="ignore")
    w.writeheader()
    for row in rows:
        w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                    for k, v in row.items()})
