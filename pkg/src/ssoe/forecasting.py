"""Point forecasts and simulated prediction intervals."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.stats import norm

from .core import generate
from .errors import SpecificationError

SIDES = ("both", "upper", "lower")


@dataclass
class ForecastResult:
    """Point forecasts with optional bounds.

    One-sided results keep only the relevant bound (the other is ``None``);
    cumulative results hold a single value, the sum over the horizon.
    """

    mean: np.ndarray
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    level: float = 0.95
    side: str = "both"
    cumulative: bool = False
    flags: dict = field(default_factory=dict)

    @property
    def h(self) -> int:
        return self.flags.get("h", self.mean.size)

    def rows(self):
        """Rows for CSV output: step, mean, then whichever bounds exist."""
        steps = [self.h] if self.cumulative else range(1, self.mean.size + 1)
        out = []
        for i, step in enumerate(steps):
            row = {"step": step, "mean": float(self.mean[i])}
            if self.lower is not None:
                row["lower"] = float(self.lower[i])
            if self.upper is not None:
                row["upper"] = float(self.upper[i])
            out.append(row)
        return out


def _start(fit):
    return fit.model, fit.final_states


def _multiplicative(model) -> bool:
    return model.ets is not None and not model.ets.pure_additive


def point_forecast(fit, h: int) -> np.ndarray:
    """Iterate the recursion ``h`` steps from the final states with zero innovations."""
    if h < 1:
        raise SpecificationError("h must be >= 1")
    model, start = _start(fit)
    paths, _ = generate(model, np.zeros((1, h)), start=start)
    return paths[0]


def simulate_paths(fit, h: int, n_paths: int = 10000, seed=None) -> np.ndarray:
    """Future sample paths driven by N(0, sigma^2) innovations.

    All innovations are drawn up front from one generator, so the paths do
    not depend on execution order.
    """
    model, start = _start(fit)
    sigma = float(np.sqrt(fit.sigma2))
    rng = np.random.default_rng(seed)
    eps = rng.standard_normal((n_paths, h)) * sigma
    paths, _ = generate(model, eps, start=start)
    return paths


def prediction_interval(fit, h: int, level: float = 0.95, side: str = "both",
                        cumulative: bool = False, n_paths: int = 10000,
                        seed=None) -> ForecastResult:
    """Simulation-based prediction interval.

    Two-sided bounds are the ``(1 - level) / 2`` and ``(1 + level) / 2``
    quantiles per step; one-sided bounds use ``level`` on the requested
    side. With ``cumulative`` the paths are summed over the horizon first.
    Lower bounds of models with multiplicative parts are clamped at zero.
    """
    if not 0 < level < 1:
        raise SpecificationError("level must be in (0, 1)")
    if side not in SIDES:
        raise SpecificationError(f"side must be one of {SIDES}")
    if n_paths < 1000:
        raise SpecificationError("n_paths must be at least 1000")
    mean = point_forecast(fit, h)
    flags = {"h": h, "n_paths": n_paths}
    if cumulative:
        mean = np.array([mean.sum()])
    if not np.isfinite(fit.sigma2) or fit.sigma2 <= 0:
        flags["degenerate_variance"] = True
        lower = mean.copy() if side in ("both", "lower") else None
        upper = mean.copy() if side in ("both", "upper") else None
        return ForecastResult(mean, lower, upper, level, side, cumulative, flags)

    paths = simulate_paths(fit, h, n_paths, seed)
    if cumulative:
        paths = paths.sum(axis=1, keepdims=True)
    if np.isnan(paths).any():
        flags["dropped_paths"] = int(np.isnan(paths).any(axis=1).sum())
    lower = upper = None
    if side == "both":
        lower = np.nanquantile(paths, (1 - level) / 2, axis=0)
        upper = np.nanquantile(paths, (1 + level) / 2, axis=0)
    elif side == "upper":
        upper = np.nanquantile(paths, level, axis=0)
    else:
        lower = np.nanquantile(paths, 1 - level, axis=0)
    if lower is not None and _multiplicative(fit.model):
        lower = np.maximum(lower, 0.0)
    return ForecastResult(mean, lower, upper, level, side, cumulative, flags)


def impulse_response(model, h: int) -> np.ndarray:
    """Response of y_{T+1..T+h} to a unit innovation at T+1 (pure additive models)."""
    if not model.linear:
        raise SpecificationError("impulse responses need a pure additive model")
    quiet = dataclasses.replace(model, constant=0.0, offset=np.zeros(model.K))
    eps = np.zeros((1, h))
    eps[0, 0] = 1.0
    paths, _ = generate(quiet, eps, start=np.zeros_like(model.initial))
    return paths[0]


def analytic_variance(fit, h: int, cumulative: bool = False) -> np.ndarray:
    """h-step (or cumulative) forecast variance for pure additive models."""
    c = impulse_response(fit.model, h)
    if cumulative:
        partial = np.cumsum(c)
        return np.array([fit.sigma2 * np.sum(partial ** 2)])
    return fit.sigma2 * np.cumsum(c ** 2)


def analytic_interval(fit, h: int, level: float = 0.95, side: str = "both",
                      cumulative: bool = False) -> ForecastResult:
    """Gaussian interval from the analytic variance recursion."""
    mean = point_forecast(fit, h)
    if cumulative:
        mean = np.array([mean.sum()])
    sd = np.sqrt(analytic_variance(fit, h, cumulative))
    lower = upper = None
    if side == "both":
        z = norm.ppf((1 + level) / 2)
        lower, upper = mean - z * sd, mean + z * sd
    elif side == "upper":
        upper = mean + norm.ppf(level) * sd
    else:
        lower = mean - norm.ppf(level) * sd
    return ForecastResult(mean, lower, upper, level, side, cumulative, {"h": h, "analytic": True})
