"""Holdout benchmark harness over a manifest of series."""

from __future__ import annotations

import json
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np

from .arima import naive_model, select_arima_orders, select_sma_order
from .core import TimeSeries
from .dataio import read_series_csv, write_series_csv
from .errors import InputError, SpecificationError
from .ets import EtsSpec, select_ets
from .forecasting import prediction_interval
from .metrics import EvaluationRecord, SummaryTable, aggregate, evaluate
from .simulate import SimulationSpec, simulate_series


def _ets_auto(series, ic):
    return select_ets(series, ic=ic)


def _arima_auto(series, ic):
    return select_arima_orders(series, ic=ic)


def _sma(series, ic):
    return select_sma_order(series, ic=ic)


def _naive(series, ic):
    return naive_model(series)


MODELS: Dict[str, Callable] = {
    "ets-auto": _ets_auto,
    "ssarima-auto": _arima_auto,
    "sma": _sma,
    "naive": _naive,
}
DEFAULT_MODELS = ("ets-auto", "ssarima-auto", "sma", "naive")


@dataclass
class ManifestEntry:
    series_id: str
    path: Path
    lags: tuple
    h: int


@dataclass
class DatasetManifest:
    entries: List[ManifestEntry]
    format: str = "csv"
    column: Optional[Union[str, int]] = None


def load_manifest(path: Union[str, Path]) -> DatasetManifest:
    """Read a JSON manifest; series paths are relative to the manifest file.

    Layout::

        {"format": "csv", "column": "value",
         "series": [{"id": "s1", "path": "s1.csv", "lags": [1, 12], "h": 18}, ...]}
    """
    path = Path(path)
    try:
        d = json.loads(path.read_text())
    except OSError as exc:
        raise InputError(f"cannot read manifest {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"manifest is not valid JSON: {exc.msg}", line=exc.lineno) from None
    if d.get("format", "csv") != "csv":
        raise InputError(f"unsupported manifest format {d.get('format')!r}")
    entries = []
    seen = set()
    for k, e in enumerate(d.get("series", [])):
        try:
            sid, rel = str(e["id"]), e["path"]
            lags = tuple(int(x) for x in e.get("lags", [1]))
            h = int(e["h"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"manifest entry {k} is malformed ({exc})") from None
        if h < 1:
            raise InputError(f"manifest entry {sid}: h must be >= 1")
        if sid in seen:
            raise InputError(f"duplicate series id {sid!r}")
        seen.add(sid)
        p = (path.parent / rel).resolve()
        if not p.is_file():
            raise InputError(f"manifest entry {sid}: {p} not found")
        entries.append(ManifestEntry(sid, p, lags, h))
    if not entries:
        raise InputError("manifest lists no series")
    return DatasetManifest(entries, "csv", d.get("column"))


def series_seed(global_seed: int, series_id: str) -> int:
    """Stable per-series seed from the global seed and the series id."""
    ss = np.random.SeedSequence([int(global_seed), zlib.crc32(series_id.encode())])
    return int(ss.generate_state(1, np.uint32)[0])


@dataclass
class Failure:
    series_id: str
    model: str
    error: str


@dataclass
class BenchmarkResult:
    records: List[EvaluationRecord]
    failures: List[Failure]
    table: SummaryTable = field(init=False)

    def __post_init__(self):
        self.table = aggregate(self.records)


def _run_series(entry: ManifestEntry, column, models, seed, level, n_paths, ic,
                seasonal_scale, poison: Optional[Callable] = None):
    records, failures = [], []
    try:
        values = read_series_csv(entry.path, column)
    except Exception as exc:
        return [EvaluationRecord(m, *([np.nan] * 5), series_id=entry.series_id) for m in models], \
            [Failure(entry.series_id, m, f"{type(exc).__name__}: {exc}") for m in models]
    if poison is not None:
        values = poison(entry.series_id, values.copy(), entry.h)
    pseed = series_seed(seed, entry.series_id)
    for name in models:
        t0 = time.perf_counter()
        try:
            series = TimeSeries(values, entry.lags, holdout=entry.h)
            fit = MODELS[name](series, ic)
            fc = prediction_interval(fit, entry.h, level=level, n_paths=n_paths, seed=pseed)
            elapsed = time.perf_counter() - t0
            rec = evaluate(name, series.test, fc, series.train, level, elapsed,
                           series_id=entry.series_id, seasonal=seasonal_scale,
                           period=series.period)
        except Exception as exc:  # recorded, never fatal
            failures.append(Failure(entry.series_id, name, f"{type(exc).__name__}: {exc}"))
            rec = EvaluationRecord(name, *([np.nan] * 5), series_id=entry.series_id)
        records.append(rec)
    return records, failures


def run_benchmark(manifest: DatasetManifest, models: Sequence[str] = DEFAULT_MODELS,
                  seed: int = 0, level: float = 0.95, n_paths: int = 10000, ic: str = "AICc",
                  jobs: int = 1, seasonal_scale: bool = False,
                  poison: Optional[Callable] = None) -> BenchmarkResult:
    """Fit every model on every training span and score its holdout forecast.

    Results are collected in manifest order whatever ``jobs`` is, and each
    series uses a seed derived from ``seed`` and its id, so the metric columns
    are reproducible (wall time naturally is not).

    ``poison(series_id, values, h)`` may rewrite the loaded values before the
    split; it exists for holdout-discipline checks.
    """
    unknown = [m for m in models if m not in MODELS]
    if unknown:
        raise SpecificationError(f"unknown models {unknown}; choose from {sorted(MODELS)}")
    args = [(e, manifest.column, tuple(models), seed, level, n_paths, ic, seasonal_scale, poison)
            for e in manifest.entries]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outs = list(pool.map(_run_series_star, args))
    else:
        outs = [_run_series(*a) for a in args]
    records = [r for recs, _ in outs for r in recs]
    failures = [f for _, fs in outs for f in fs]
    return BenchmarkResult(records, failures)


def _run_series_star(a):
    return _run_series(*a)


# bundled synthetic corpus --------------------------------------------------

_CORPUS_DGPS = [
    # (ETS spec, period, horizon, length, params)
    ("ANN", 1, 6, 60, {"alpha": 0.3}),
    ("AAN", 1, 6, 60, {"alpha": 0.4, "beta": 0.05}),
    ("AAdN", 4, 8, 72, {"alpha": 0.3, "beta": 0.05, "phi": 0.9}),
    ("ANA", 4, 8, 80, {"alpha": 0.2, "gamma": 0.1}),
    ("AAA", 12, 18, 144, {"alpha": 0.2, "beta": 0.02, "gamma": 0.1}),
    ("MNM", 12, 18, 120, {"alpha": 0.3, "gamma": 0.05}),
    ("MAM", 12, 18, 132, {"alpha": 0.2, "beta": 0.01, "gamma": 0.05}),
    ("MNN", 1, 6, 50, {"alpha": 0.5}),
]


def make_corpus(directory: Union[str, Path], n: int = 50, seed: int = 2024) -> Path:
    """Write ``n`` synthetic series and a manifest into ``directory``.

    The series cycle through a fixed mix of ETS data-generating processes
    (yearly, quarterly and monthly). Returns the manifest path.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    for k in range(n):
        code, period, h, length, params = _CORPUS_DGPS[k % len(_CORPUS_DGPS)]
        spec = EtsSpec.parse(code, period)
        rand = {"sd": 0.04} if spec.error == "M" else {"sd": 4.0}
        for attempt in range(20):
            sim = simulate_series(SimulationSpec(spec, length, 1, dict(params),
                                                 randomizer_params=rand,
                                                 seed=seed * 1000 + k * 20 + attempt))
            y = sim.series[0]
            if np.all(np.isfinite(y)) and np.all(y > 0):
                break
        sid = f"S{k + 1:03d}"
        write_series_csv(directory / f"{sid}.csv", np.round(y, 4))
        lags = [1] if period == 1 else [1, period]
        entries.append({"id": sid, "path": f"{sid}.csv", "lags": lags, "h": h,
                        "dgp": str(spec)})
    manifest = directory / "manifest.json"
    manifest.write_text(json.dumps({"format": "csv", "column": "value", "series": entries},
                                   indent=1) + "\n")
    return manifest


def bundled_manifest() -> Path:
    """Path of the 50-series synthetic corpus shipped with the package."""
    return Path(str(resources.files("ssoe") / "data" / "corpus" / "manifest.json"))
