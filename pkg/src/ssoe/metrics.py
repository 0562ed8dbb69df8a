"""Forecast accuracy and interval quality measures.

Undefined values (for example a constant in-sample series, which has no
naive-error scale) are reported as NaN so that aggregation can drop them
and count how many were dropped.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .errors import SpecificationError

UNDEFINED = float("nan")
COLUMNS = ("MASE", "RMSSE", "Coverage", "sMIS", "Time")
_FIELDS = ("mase", "rmsse", "coverage", "smis", "time_seconds")


def _arrays(*xs):
    out = [np.asarray(x, dtype=float).ravel() for x in xs]
    if len({a.size for a in out}) != 1:
        raise SpecificationError("holdout, forecasts and bounds must have equal length")
    return out


def _scale(insample, lag: int, power: int) -> float:
    x = np.asarray(insample, dtype=float).ravel()
    if x.size < lag + 1:
        raise SpecificationError(f"in-sample needs at least {lag + 1} values")
    return float(np.mean(np.abs(x[lag:] - x[:-lag]) ** power))


def _naive_lag(seasonal: bool, period: int) -> int:
    return period if seasonal else 1


def mase(holdout, forecasts, insample, seasonal: bool = False, period: int = 1) -> float:
    """Mean absolute error scaled by the in-sample naive mean absolute error."""
    y, f = _arrays(holdout, forecasts)
    scale = _scale(insample, _naive_lag(seasonal, period), 1)
    if scale == 0:
        return UNDEFINED
    return float(np.mean(np.abs(y - f)) / scale)


def rmsse(holdout, forecasts, insample, seasonal: bool = False, period: int = 1) -> float:
    y, f = _arrays(holdout, forecasts)
    scale = _scale(insample, _naive_lag(seasonal, period), 2)
    if scale == 0:
        return UNDEFINED
    return float(np.sqrt(np.mean((y - f) ** 2) / scale))


def coverage(holdout, lower, upper) -> float:
    """Share of holdout points inside [lower, upper]."""
    y, lo, hi = _arrays(holdout, lower, upper)
    return float(np.mean((lo <= y) & (y <= hi)))


def smis(holdout, lower, upper, level: float, insample,
         seasonal: bool = False, period: int = 1) -> float:
    """Mean interval score scaled like MASE."""
    if not 0 < level < 1:
        raise SpecificationError("level must be in (0, 1)")
    y, lo, hi = _arrays(holdout, lower, upper)
    a = 1.0 - level
    score = (hi - lo) + (2 / a) * (lo - y) * (y < lo) + (2 / a) * (y - hi) * (y > hi)
    scale = _scale(insample, _naive_lag(seasonal, period), 1)
    if scale == 0:
        return UNDEFINED
    return float(np.mean(score) / scale)


@dataclass
class EvaluationRecord:
    model: str
    mase: float
    rmsse: float
    coverage: float
    smis: float
    time_seconds: float
    series_id: str = ""

    def __post_init__(self):
        if self.time_seconds < 0:
            raise SpecificationError("time must be nonnegative")
        for name in ("mase", "rmsse", "smis"):
            v = getattr(self, name)
            if not math.isnan(v) and v < 0:
                raise SpecificationError(f"{name} must be nonnegative")
        if not math.isnan(self.coverage) and not 0 <= self.coverage <= 1:
            raise SpecificationError("coverage must lie in [0, 1]")


def evaluate(model: str, holdout, forecast, insample, level: float, seconds: float,
             series_id: str = "", seasonal: bool = False, period: int = 1) -> EvaluationRecord:
    """Score one forecast (a :class:`ForecastResult` with two-sided bounds)."""
    kw = dict(seasonal=seasonal, period=period)
    return EvaluationRecord(
        model,
        mase(holdout, forecast.mean, insample, **kw),
        rmsse(holdout, forecast.mean, insample, **kw),
        coverage(holdout, forecast.lower, forecast.upper),
        smis(holdout, forecast.lower, forecast.upper, level, insample, **kw),
        seconds, series_id)


@dataclass
class SummaryRow:
    model: str
    values: Dict[str, float]
    counts: Dict[str, int]
    excluded: Dict[str, int]


class SummaryTable:
    """Per-model means of each metric."""

    def __init__(self, rows: List[SummaryRow]):
        self.rows = rows

    def sort(self, column: str = "model", descending: bool = False) -> "SummaryTable":
        if column == "model":
            key = lambda r: r.model  # noqa: E731
        else:
            if column not in COLUMNS:
                raise SpecificationError(f"unknown column {column!r}")
            key = lambda r: (math.isnan(r.values[column]), r.values[column])  # noqa: E731
        return SummaryTable(sorted(self.rows, key=key, reverse=descending))

    def row(self, model: str) -> SummaryRow:
        for r in self.rows:
            if r.model == model:
                return r
        raise KeyError(model)

    @property
    def total_excluded(self) -> int:
        return sum(sum(r.excluded.values()) for r in self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["model", *COLUMNS, "n", "excluded"])
        for r in self.rows:
            w.writerow([r.model, *(repr(r.values[c]) for c in COLUMNS),
                        max(r.counts.values()), max(r.excluded.values())])
        return buf.getvalue()

    def to_text(self, digits: int = 3) -> str:
        header = ["Model", *COLUMNS, "Excluded"]
        body = [[r.model, *(f"{r.values[c]:.{digits}f}" for c in COLUMNS),
                 str(max(r.excluded.values()))] for r in self.rows]
        widths = [max(len(x) for x in col) for col in zip(header, *body)]
        lines = []
        for i, cells in enumerate([header, *body]):
            lines.append("  ".join(c.ljust(wd) if j == 0 else c.rjust(wd)
                                   for j, (c, wd) in enumerate(zip(cells, widths))))
            if i == 0:
                lines.append("  ".join("-" * wd for wd in widths))
        return "\n".join(lines)


def aggregate(records: Iterable[EvaluationRecord]) -> SummaryTable:
    """Average each metric per model, skipping undefined values."""
    records = list(records)
    if not records:
        raise SpecificationError("need at least one record")
    by_model: Dict[str, List[EvaluationRecord]] = {}
    for rec in records:
        by_model.setdefault(rec.model, []).append(rec)
    rows = []
    for model, recs in by_model.items():
        values, counts, excluded = {}, {}, {}
        for col, fld in zip(COLUMNS, _FIELDS):
            x = np.array([getattr(r, fld) for r in recs], dtype=float)
            ok = ~np.isnan(x)
            counts[col] = int(ok.sum())
            excluded[col] = int((~ok).sum())
            values[col] = float(np.mean(x[ok])) if ok.any() else UNDEFINED
        rows.append(SummaryRow(model, values, counts, excluded))
    return SummaryTable(rows)


def records_to_csv(records: Sequence[EvaluationRecord]) -> str:
    buf = io.StringIO()
    fields = ["series_id", "model", *_FIELDS]
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in records:
        d = asdict(r)
        w.writerow({k: (repr(d[k]) if isinstance(d[k], float) else d[k]) for k in fields})
    return buf.getvalue()
