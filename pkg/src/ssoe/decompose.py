"""Classical decomposition over one or several seasonal cycles."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .core import TimeSeries
from .errors import SpecificationError


@dataclass
class DecompositionResult:
    """Trend, seasonal rings and residual of a decomposed series.

    Trend and residual carry NaN where the centred moving average is not
    defined (the first and last ``max(lags) // 2`` points). Multiplicative
    results are on the original scale.
    """

    y: np.ndarray
    trend: np.ndarray
    seasonals: List[np.ndarray]
    lags: tuple
    residual: np.ndarray
    type: str = "additive"

    def seasonal_component(self, i: int, n: int = None, start: int = 0) -> np.ndarray:
        """Ring ``i`` unrolled over positions ``start .. start + n - 1``."""
        ring = self.seasonals[i]
        n = self.y.size if n is None else n
        return ring[(np.arange(start, start + n)) % ring.size]

    def reconstruct(self) -> np.ndarray:
        out = self.trend.copy()
        for i in range(len(self.seasonals)):
            if self.type == "additive":
                out = out + self.seasonal_component(i)
            else:
                out = out * self.seasonal_component(i)
        if self.type == "additive":
            return out + self.residual
        return out * self.residual


def centred_moving_average(y: np.ndarray, window: int) -> np.ndarray:
    """Centred moving average; even windows use half-weight end points."""
    y = np.asarray(y, dtype=float)
    n = y.size
    out = np.full(n, np.nan)
    if window <= 1:
        return y.copy()
    if window % 2:
        weights = np.full(window, 1.0 / window)
    else:
        weights = np.full(window + 1, 1.0 / window)
        weights[0] = weights[-1] = 0.5 / window
    half = weights.size // 2
    if n < weights.size:
        return out
    out[half: n - half] = np.convolve(y, weights, mode="valid")
    return out


def _normalise_type(type_):
    t = str(type_).lower()
    if t in ("a", "additive"):
        return "additive"
    if t in ("m", "multiplicative"):
        return "multiplicative"
    raise SpecificationError(f"unknown decomposition type {type_!r}")


def msdecompose(y, lags: Sequence[int], type="additive", iterations: int = 1) -> DecompositionResult:
    """Decompose ``y`` with one seasonal ring per entry of ``lags``.

    The trend is a centred moving average of window ``max(lags)``. Rings are
    extracted in ascending lag order from the detrended series, each
    normalised to zero mean and removed before the next one. Multiplicative
    decomposition works on logs and exponentiates at the end.

    With ``iterations > 1`` the trend is re-estimated on the seasonally
    adjusted series and the rings recomputed.
    """
    y = np.asarray(y, dtype=float).ravel()
    kind = _normalise_type(type)
    lags = tuple(sorted(int(x) for x in lags if int(x) > 1))
    if not lags:
        raise SpecificationError("at least one seasonal lag > 1 is required")
    if y.size < 2 * max(lags):
        raise SpecificationError(
            f"decomposition needs at least {2 * max(lags)} observations, got {y.size}")
    if kind == "multiplicative":
        if np.any(y <= 0):
            raise SpecificationError("multiplicative decomposition needs positive data")
        x = np.log(y)
    else:
        x = y
    n = x.size
    idx = np.arange(n)

    seasonal_total = np.zeros(n)
    for _ in range(max(1, iterations)):
        trend = centred_moving_average(x - seasonal_total, max(lags))
        remainder = x - trend
        rings = []
        seasonal_total = np.zeros(n)
        for lag in lags:
            pos = idx % lag
            ring = np.array([np.nanmean(remainder[pos == k]) for k in range(lag)])
            ring -= ring.mean()
            rings.append(ring)
            remainder = remainder - ring[pos]
            seasonal_total += ring[pos]

    if kind == "multiplicative":
        return DecompositionResult(y, np.exp(trend), [np.exp(r) for r in rings], lags,
                                   np.exp(remainder), kind)
    return DecompositionResult(y, trend, rings, lags, remainder, kind)


def decompose_forecast(result: DecompositionResult, h: int, ic: str = "AICc") -> np.ndarray:
    """Forecast the trend with a non-seasonal ETS model and re-apply the rings."""
    from .ets import select_ets
    from .forecasting import point_forecast

    if h < 1:
        raise SpecificationError("h must be >= 1")
    n = result.y.size
    defined = np.flatnonzero(np.isfinite(result.trend))
    trend = result.trend[defined]
    last = int(defined[-1]) if defined.size else -1
    steps = n - 1 - last + h
    if result.type == "multiplicative":
        trend = np.log(trend)
    if trend.size >= 8:
        fit = select_ets(TimeSeries(trend), ic=ic)
        path = point_forecast(fit, steps)
    elif trend.size >= 2:
        slope = (trend[-1] - trend[0]) / (trend.size - 1)
        path = trend[-1] + slope * np.arange(1, steps + 1)
    else:
        base = np.log(result.y) if result.type == "multiplicative" else result.y
        path = np.full(steps, trend[-1] if trend.size else base.mean())
    path = path[-h:]
    for i in range(len(result.seasonals)):
        ring = result.seasonals[i]
        season = ring[np.arange(n, n + h) % ring.size]
        if result.type == "multiplicative":
            path = path + np.log(season)
        else:
            path = path + season
    return np.exp(path) if result.type == "multiplicative" else path

