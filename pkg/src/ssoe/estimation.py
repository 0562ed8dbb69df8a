"""Likelihood, information criteria, optimiser wrapper and fit containers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional

import numpy as np
from scipy.optimize import minimize

from .core import FitArtifacts, StateSpaceModel
from .errors import EstimationError, SpecificationError

INITIAL_MODES = ("optimization", "backcasting", "manual")
CRITERIA = ("AIC", "AICc", "BIC")

# returned when the residual variance is numerically zero
PERFECT_FIT_LOGLIK = 1e8


@dataclass
class EstimationConfig:
    initial: str = "optimization"
    ic: str = "AICc"
    max_evals: Optional[int] = None
    tolerance: float = 1e-8
    backcast_iterations: int = 2
    manual_initial: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.initial not in INITIAL_MODES:
            raise SpecificationError(f"initial must be one of {INITIAL_MODES}")
        if self.ic not in CRITERIA:
            raise SpecificationError(f"ic must be one of {CRITERIA}")
        if self.initial == "manual" and self.manual_initial is None:
            raise SpecificationError("manual initialisation needs manual_initial")


@dataclass
class FitResult:
    """A fitted model: specification, parameters, states and fit statistics."""

    family: str
    spec: Any
    params: Dict[str, float]
    model: StateSpaceModel
    artifacts: FitArtifacts
    y: np.ndarray
    loglik: float
    ic: Dict[str, float]
    n_params: int
    initial_mode: str
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def name(self) -> str:
        return str(self.spec)

    @property
    def fitted(self) -> np.ndarray:
        return self.artifacts.fitted

    @property
    def residuals(self) -> np.ndarray:
        return self.artifacts.residuals

    @property
    def sigma2(self) -> float:
        return self.artifacts.sigma2

    @property
    def final_states(self) -> np.ndarray:
        return self.artifacts.final_states

    @property
    def nobs(self) -> int:
        return self.y.size

    def __repr__(self):
        ics = ", ".join(f"{k}={v:.3f}" for k, v in self.ic.items())
        return f"FitResult({self.name}, loglik={self.loglik:.3f}, {ics})"


def gaussian_loglik(residuals, fitted=None, multiplicative: bool = False,
                    reference: float = 1.0) -> float:
    """Concentrated Gaussian log-likelihood of a residual series.

    ``-T/2 (ln 2 pi + 1 + ln(sum e^2 / T))``; multiplicative-error models
    subtract ``sum ln|fitted|`` for the relative-error transform. A variance at
    or below ``1e-20 * reference`` is reported as :data:`PERFECT_FIT_LOGLIK`.
    """
    e = np.asarray(residuals, dtype=float)
    T = e.size
    if T < 1:
        raise SpecificationError("need at least one residual")
    if not np.all(np.isfinite(e)):
        return -np.inf
    s2 = float(np.dot(e, e)) / T
    if s2 <= 1e-20 * max(reference, 1e-300):
        return PERFECT_FIT_LOGLIK
    ll = -0.5 * T * (math.log(2 * math.pi) + 1.0 + math.log(s2))
    if multiplicative:
        ll -= float(np.sum(np.log(np.abs(fitted))))
    return ll


def information_criteria(loglik: float, n_params: int, T: int) -> Dict[str, float]:
    k = n_params
    aic = -2.0 * loglik + 2.0 * k
    if T > k + 1:
        aicc = aic + 2.0 * k * (k + 1) / (T - k - 1)
    else:
        aicc = math.inf
    bic = -2.0 * loglik + k * math.log(T)
    return {"AIC": aic, "AICc": aicc, "BIC": bic}


@dataclass
class OptimizeResult:
    x: np.ndarray
    fun: float
    nfev: int
    start_fun: float


def _simplex(x0, lower, upper, steps):
    n = x0.size
    sim = np.tile(x0, (n + 1, 1))
    for i in range(n):
        step = steps[i]
        xi = x0[i] + step
        if xi > upper[i]:
            xi = x0[i] - step
        sim[i + 1, i] = min(max(xi, lower[i]), upper[i])
    return sim


def optimize(objective: Callable[[np.ndarray], float], lower, upper, start,
             tolerance: float = 1e-8, max_evals: Optional[int] = None,
             steps=None) -> OptimizeResult:
    """Box-constrained Nelder-Mead with one restart from the best point.

    Terminates when the spread of objective values in the simplex falls
    below ``tolerance`` or after ``max_evals`` evaluations (default
    ``1000 * dim``). The best point seen is returned; ties keep the start.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    x0 = np.clip(np.asarray(start, dtype=float), lower, upper)
    n = x0.size
    max_evals = max_evals or 1000 * max(n, 1)
    nfev = 0

    def f(x):
        nonlocal nfev
        nfev += 1
        val = objective(np.clip(x, lower, upper))
        return val if np.isfinite(val) else np.inf

    f0 = f(x0)
    if not np.isfinite(f0):
        mid = np.where(np.isfinite(lower) & np.isfinite(upper), 0.5 * (lower + upper), x0)
        f0 = f(mid)
        if not np.isfinite(f0):
            raise EstimationError("objective is not finite at the start or at the bound midpoints")
        x0 = mid
    if n == 0:
        return OptimizeResult(x0, f0, nfev, f0)
    if steps is None:
        span = np.where(np.isfinite(upper - lower), upper - lower, np.maximum(np.abs(x0), 1.0))
        steps = 0.05 * span
    steps = np.where(np.asarray(steps, dtype=float) > 0, steps, 1e-3)

    best_x, best_f = x0, f0
    for _ in range(2):
        budget = max_evals - nfev
        if budget <= n + 1:
            break
        res = minimize(f, best_x, method="Nelder-Mead", bounds=list(zip(lower, upper)),
                       options={"initial_simplex": _simplex(best_x, lower, upper, steps),
                                "fatol": tolerance, "xatol": np.inf, "maxfev": budget})
        if res.fun < best_f:
            best_x, best_f = np.clip(res.x, lower, upper), float(res.fun)
        else:
            break
    return OptimizeResult(best_x, best_f, nfev, f0)


def initial_state_estimate(y, trend: str = "N", seasonal: str = "N", period: int = 1):
    """Heuristic ETS starting states from the head of the series.

    Seasonal indices come from a classical decomposition of the series (type
    matched to the seasonal letter); level and trend from a straight-line
    fit over the head of the deseasonalised series. Series shorter than two
    seasonal cycles get flat indices.
    """
    from .decompose import msdecompose
    from .ets import EtsState

    y = np.asarray(y, dtype=float)
    m = int(period)
    season = None
    adjusted = y
    if seasonal != "N" and m > 1:
        kind = "multiplicative" if seasonal == "M" else "additive"
        if y.size >= 2 * m and (kind == "additive" or np.all(y > 0)):
            dec = msdecompose(y, [m], kind)
            season = dec.seasonals[0].copy()
            unrolled = dec.seasonal_component(0)
            adjusted = y / unrolled if kind == "multiplicative" else y - unrolled
        else:
            season = np.ones(m) if seasonal == "M" else np.zeros(m)
        if seasonal == "M":
            season = season / np.exp(np.mean(np.log(season)))
        else:
            season = season - season.mean()

    head = adjusted[: min(adjusted.size, max(2 * m, 10))]
    tt = np.arange(1, head.size + 1)
    if trend == "N":
        return EtsState(float(head.mean()), None, season)
    if trend in ("M", "Md") and np.all(head > 0):
        slope, icpt = np.polyfit(tt, np.log(head), 1) if head.size > 1 else (0.0, np.log(head[0]))
        return EtsState(float(np.exp(icpt)), float(np.exp(slope)), season)
    if head.size > 1:
        slope, icpt = np.polyfit(tt, head, 1)
    else:
        slope, icpt = 0.0, head[0]
    if trend in ("M", "Md"):
        # non-positive data: fall back to a ratio near one
        level = float(max(icpt, 1e-3))
        return EtsState(level, 1.0, season)
    return EtsState(float(icpt), float(slope), season)
