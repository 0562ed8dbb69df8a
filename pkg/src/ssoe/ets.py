"""ETS models in lagged state-space form and branch-and-bound selection."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from . import _kernels as kern
from .core import EtsCodes, StateSpaceModel, TimeSeries, backcast_initialize, fit_pass
from .errors import SpecificationError
from .estimation import (
    EstimationConfig,
    FitResult,
    gaussian_loglik,
    information_criteria,
    initial_state_estimate,
    optimize,
)

ERRORS = ("A", "M")
TRENDS = ("N", "A", "Ad", "M", "Md")
SEASONALS = ("N", "A", "M")

_TREND_CODE = {"N": kern.TREND_NONE, "A": kern.TREND_ADD, "Ad": kern.TREND_ADD,
               "M": kern.TREND_MUL, "Md": kern.TREND_MUL}
_SEASON_CODE = {"N": kern.SEASON_NONE, "A": kern.SEASON_ADD, "M": kern.SEASON_MUL}
_ERROR_CODE = {"A": kern.ERROR_ADD, "M": kern.ERROR_MUL}

_SPEC_RE = re.compile(r"^\s*ETS\(\s*([AM])\s*,\s*(N|Ad|A|Md|M)\s*,\s*([NAM])\s*\)\s*$")
_SHORT_RE = re.compile(r"^\s*([AM])(N|Ad|A|Md|M)([NAM])\s*$")


@dataclass(frozen=True)
class EtsSpec:
    error: str
    trend: str
    seasonal: str
    period: int = 1

    def __post_init__(self):
        if self.error not in ERRORS or self.trend not in TRENDS or self.seasonal not in SEASONALS:
            raise SpecificationError(f"inadmissible ETS components {self.components}")
        if self.seasonal != "N" and self.period < 2:
            raise SpecificationError("seasonal ETS needs period >= 2")

    @classmethod
    def parse(cls, text: str, period: int = 1) -> "EtsSpec":
        """Parse ``"ETS(M,Ad,A)"`` or the short form ``"MAdA"``."""
        match = _SPEC_RE.match(text) or _SHORT_RE.match(text)
        if not match:
            raise SpecificationError(f"cannot parse ETS spec {text!r}")
        e, t, s = match.groups()
        return cls(e, t, s, period if s != "N" else max(1, period))

    @property
    def components(self) -> Tuple[str, str, str]:
        return (self.error, self.trend, self.seasonal)

    @property
    def damped(self) -> bool:
        return self.trend.endswith("d")

    @property
    def has_trend(self) -> bool:
        return self.trend != "N"

    @property
    def has_season(self) -> bool:
        return self.seasonal != "N"

    @property
    def multiplicative_parts(self) -> bool:
        return "M" in (self.error, self.trend[0], self.seasonal)

    def __str__(self):
        return f"ETS({self.error},{self.trend},{self.seasonal})"


@dataclass
class PersistenceParams:
    alpha: float
    beta: Optional[float] = None
    gamma: Optional[float] = None
    phi: Optional[float] = None

    def within_bounds(self) -> bool:
        b = 0.0 if self.beta is None else self.beta
        g = 0.0 if self.gamma is None else self.gamma
        ok = 0.0 <= self.alpha <= 1.0 and 0.0 <= b <= self.alpha and 0.0 <= g <= 1.0 - self.alpha
        if self.phi is not None:
            ok = ok and 0.8 <= self.phi <= 1.0
        return ok


@dataclass
class EtsState:
    level: float
    trend: Optional[float] = None
    seasonal: Optional[np.ndarray] = None


def all_specs(period: int = 12) -> List[EtsSpec]:
    """The 30 ETS combinations."""
    return [EtsSpec(e, t, s, period if s != "N" else 1)
            for e in ERRORS for t in TRENDS for s in SEASONALS]


def build_ets(spec: EtsSpec, params: PersistenceParams, initial: EtsState) -> StateSpaceModel:
    """Assemble the lagged model (w, F, g, l) and its pre-sample block.

    Components are ordered level, trend, seasonal with lags (1, 1, m). For
    pure additive models the matrices drive the recursion directly; for
    models with multiplicative parts they describe the additive analogue and
    the taxonomy recursion is used.
    """
    phi = params.phi if spec.damped else 1.0
    if phi is None:
        raise SpecificationError("damped trend needs phi")
    m = spec.period if spec.has_season else 1
    K = 1 + spec.has_trend + spec.has_season
    w = np.ones(K)
    F = np.eye(K)
    g = np.empty(K)
    lags = np.ones(K, dtype=np.int64)
    g[0] = params.alpha
    block = np.empty((K, m))
    block[0, :] = initial.level
    i = 1
    if spec.has_trend:
        if params.beta is None or initial.trend is None:
            raise SpecificationError(f"{spec} needs beta and an initial trend")
        F[0, 1] = phi
        F[1, 1] = phi
        w[1] = phi
        g[1] = params.beta
        block[1, :] = initial.trend
        i = 2
    if spec.has_season:
        if params.gamma is None or initial.seasonal is None:
            raise SpecificationError(f"{spec} needs gamma and initial seasonal indices")
        seasonal = np.asarray(initial.seasonal, dtype=float)
        if seasonal.size != m:
            raise SpecificationError(f"expected {m} seasonal indices, got {seasonal.size}")
        g[i] = params.gamma
        lags[i] = m
        block[i, :] = seasonal
    codes = EtsCodes(_ERROR_CODE[spec.error], _TREND_CODE[spec.trend], _SEASON_CODE[spec.seasonal],
                     spec.damped, float(params.alpha),
                     float(params.beta or 0.0), float(params.gamma or 0.0), float(phi), m)
    return StateSpaceModel(w, F, g, lags, block, error=spec.error, ets=codes)


def parameter_count(spec: EtsSpec, initial_mode: str = "optimization") -> int:
    """Smoothing + damping + variance (+ initial states under optimisation)."""
    n = 1 + spec.has_trend + spec.has_season + spec.damped + 1
    if initial_mode == "optimization":
        n += 1 + spec.has_trend + (spec.period - 1 if spec.has_season else 0)
    return n


def _state_bounds(y, spec, start: EtsState):
    spread = float(np.ptp(y)) + 1e-6 * (abs(float(np.mean(y))) + 1.0)
    lo, hi, names, x0 = [], [], [], []
    names.append("level")
    x0.append(start.level)
    lo.append(start.level - 2 * spread)
    hi.append(start.level + 2 * spread)
    if spec.has_trend:
        names.append("trend")
        if spec.trend.startswith("M"):
            x0.append(float(np.clip(start.trend, 0.8, 1.25)))
            lo.append(0.5)
            hi.append(2.0)
        else:
            x0.append(start.trend)
            lo.append(-spread)
            hi.append(spread)
    if spec.has_season:
        for k in range(spec.period - 1):
            names.append(f"s{k + 1}")
            x0.append(float(start.seasonal[k]))
            if spec.seasonal == "M":
                lo.append(0.01)
                hi.append(10.0)
            else:
                lo.append(-2 * spread)
                hi.append(2 * spread)
    return names, np.array(x0), np.array(lo), np.array(hi)


def _complete_seasonal(free, seasonal):
    free = np.asarray(free, dtype=float)
    if seasonal == "M":
        prod = np.prod(free)
        last = 1.0 / prod if prod > 0 else np.nan
    else:
        last = -free.sum()
    return np.append(free, last)


class _EtsProblem:
    """Maps an optimiser vector onto an ETS model for one series."""

    def __init__(self, y, spec: EtsSpec, config: EstimationConfig):
        self.y = np.ascontiguousarray(y, dtype=float)
        self.spec = spec
        self.config = config
        self.mode = config.initial
        self.fallback = False
        if self.mode == "backcasting" and self.y.size < 2 * (spec.period if spec.has_season else 1):
            self.mode = "optimization"
            self.fallback = True
        self.start_state = initial_state_estimate(self.y, spec.trend, spec.seasonal, spec.period)
        if self.mode == "manual":
            man = config.manual_initial
            self.start_state = man if isinstance(man, EtsState) else _state_from_block(spec, man)
        names = ["alpha"]
        x0, lo, hi = [0.1], [0.0], [1.0]
        if spec.has_trend:
            names.append("beta")
            x0.append(0.01), lo.append(0.0), hi.append(1.0)
        if spec.has_season:
            names.append("gamma")
            x0.append(0.01), lo.append(0.0), hi.append(1.0)
        if spec.damped:
            names.append("phi")
            x0.append(0.95), lo.append(0.8), hi.append(1.0)
        self.n_persist = len(names)
        if self.mode == "optimization":
            snames, sx0, slo, shi = _state_bounds(self.y, spec, self.start_state)
            names += snames
            x0 += list(sx0)
            lo += list(slo)
            hi += list(shi)
        self.names = names
        self.x0, self.lower, self.upper = np.array(x0), np.array(lo), np.array(hi)
        self.multiplicative = spec.error == "M"
        self.reference = float(np.mean(self.y ** 2))

    def unpack(self, x):
        spec = self.spec
        vals = dict(zip(self.names, x))
        params = PersistenceParams(vals["alpha"], vals.get("beta"), vals.get("gamma"), vals.get("phi"))
        if self.mode == "optimization":
            seasonal = None
            if spec.has_season:
                free = [vals[f"s{k + 1}"] for k in range(spec.period - 1)]
                seasonal = _complete_seasonal(free, spec.seasonal)
            state = EtsState(vals["level"], vals.get("trend"), seasonal)
        else:
            state = self.start_state
        return params, state

    def model(self, x):
        params, state = self.unpack(x)
        if not params.within_bounds():
            return None
        model = build_ets(self.spec, params, state)
        if self.mode == "backcasting":
            model = backcast_initialize(model, self.y, self.config.backcast_iterations)
        return model

    def loss(self, x):
        if self.mode != "backcasting":
            return self._direct_loss(x)
        model = self.model(x)
        if model is None:
            return np.inf
        art = fit_pass(model, self.y)
        if not art.ok:
            return np.inf
        ll = gaussian_loglik(art.residuals, art.fitted, self.multiplicative, self.reference)
        return -ll


    def _direct_loss(self, x):
        params, state = self.unpack(x)
        if not params.within_bounds():
            return np.inf
        spec = self.spec
        m = spec.period if spec.has_season else 1
        block = np.empty((1 + spec.has_trend + spec.has_season, m))
        block[0] = state.level
        if spec.has_trend:
            block[1] = state.trend
        if spec.has_season:
            block[-1] = state.seasonal
        phi = params.phi if spec.damped else 1.0
        return kern.ets_neg_loglik(
            self.y, _ERROR_CODE[spec.error], _TREND_CODE[spec.trend], _SEASON_CODE[spec.seasonal],
            float(params.alpha), float(params.beta or 0.0), float(params.gamma or 0.0),
            float(phi), m, block, 1e-20 * max(self.reference, 1e-300))


def _state_from_block(spec, block) -> EtsState:
    block = np.atleast_2d(np.asarray(block, dtype=float))
    i = 1
    trend = None
    if spec.has_trend:
        trend = float(block[1, -1])
        i = 2
    seasonal = block[i, -spec.period:] if spec.has_season else None
    return EtsState(float(block[0, -1]), trend, seasonal)


def _degenerate_fit(y, spec, mode, reason) -> FitResult:
    state = EtsState(float(np.mean(y)), 0.0 if spec.has_trend else None,
                     (np.zeros(spec.period) if spec.has_season else None))
    params = PersistenceParams(0.0, 0.0 if spec.has_trend else None,
                               0.0 if spec.has_season else None, 1.0 if spec.damped else None)
    model = build_ets(EtsSpec("A", spec.trend.replace("M", "A"), spec.seasonal.replace("M", "A"),
                              spec.period), params, state)
    art = fit_pass(model, y)
    art.ok = False
    k = parameter_count(spec, mode)
    ic = {name: np.inf for name in ("AIC", "AICc", "BIC")}
    return FitResult("ets", spec, {}, model, art, y, -np.inf, ic, k, mode,
                     {"degenerate": True, "reason": reason})


def fit_ets(y, spec: EtsSpec, config: Optional[EstimationConfig] = None) -> FitResult:
    """Estimate one ETS model by concentrated Gaussian likelihood.

    Degenerate fits (no admissible parameter vector, non-positive data for
    multiplicative parts) come back with infinite information criteria and
    ``diagnostics["degenerate"] = True``.
    """
    if isinstance(y, TimeSeries):
        y = y.train
    y = np.ascontiguousarray(y, dtype=float)
    config = config or EstimationConfig()
    if spec.has_season and y.size < spec.period + 2:
        raise SpecificationError(f"{spec} needs more than {spec.period + 1} observations")
    if spec.multiplicative_parts and np.any(y <= 0):
        return _degenerate_fit(y, spec, config.initial, "non-positive data")
    problem = _EtsProblem(y, spec, config)
    try:
        opt = optimize(problem.loss, problem.lower, problem.upper, problem.x0,
                       tolerance=config.tolerance, max_evals=config.max_evals)
    except Exception as exc:  # estimation error -> degenerate model for selection
        return _degenerate_fit(y, spec, problem.mode, str(exc))
    model = problem.model(opt.x)
    art = fit_pass(model, y)
    ll = gaussian_loglik(art.residuals, art.fitted, problem.multiplicative, problem.reference)
    k = parameter_count(spec, problem.mode)
    params = dict(zip(problem.names, map(float, opt.x)))
    diagnostics = {"nfev": opt.nfev, "initial_fallback": problem.fallback}
    return FitResult("ets", spec, params, model, art, y, ll,
                     information_criteria(ll, k, y.size), k, problem.mode, diagnostics)


def select_ets(series, ic: str = "AICc", config: Optional[EstimationConfig] = None,
               period: Optional[int] = None) -> FitResult:
    """Branch-and-bound choice of ETS components.

    1. ETS(A,N,N).
    2. ETS(A,N,A); seasonality is kept only if it improves on (1).
    3. Only after (2) improved: ETS(M,N,M); multiplicative seasonality if it
       improves on (2).
    4. Additive trend with the chosen seasonality; trend is kept only if it
       beats the best criterion so far.
    5. Fit the rest of the pool implied by (1)-(4) and return the best.
    """
    if not isinstance(series, TimeSeries):
        series = TimeSeries(series, lags=(1,) if not period or period < 2 else (1, period))
    y = series.train
    m = period or series.period
    config = config or EstimationConfig(ic=ic)
    if config.ic != ic:
        config = EstimationConfig(config.initial, ic, config.max_evals, config.tolerance,
                                  config.backcast_iterations)
    seasonal_ok = m >= 2 and y.size >= 2 * m + 2
    fits = {}

    def fit(e, t, s):
        spec = EtsSpec(e, t, s, m if s != "N" else 1)
        key = str(spec)
        if key not in fits:
            fits[key] = fit_ets(y, spec, config)
        return fits[key].ic[ic]

    best = fit("A", "N", "N")
    seasonal = "N"
    if seasonal_ok:
        ic_ana = fit("A", "N", "A")
        if ic_ana < best:
            seasonal, best = "A", ic_ana
            ic_mnm = fit("M", "N", "M")
            if ic_mnm < best:
                seasonal, best = "M", ic_mnm
    error4 = "M" if seasonal == "M" else "A"
    ic_trend = fit(error4, "A", seasonal)
    trended = ic_trend < best
    trends = TRENDS[1:] if trended else ("N",)
    pool = [(e, t, seasonal) for e in ERRORS for t in trends]
    for e, t, s in pool:
        fit(e, t, s)

    finite = {k: f for k, f in fits.items() if np.isfinite(f.ic[ic])}
    if not finite:
        result = fits["ETS(A,N,N)"]
        result.diagnostics["all_degenerate"] = True
    else:
        result = min(finite.values(), key=lambda f: f.ic[ic])
    result.diagnostics["candidates"] = {k: f.ic[ic] for k, f in fits.items()}
    result.diagnostics["pool"] = [str(EtsSpec(e, t, s, m if s != "N" else 1)) for e, t, s in pool]
    result.diagnostics["seasonal_branch"] = seasonal
    result.diagnostics["trend_branch"] = trended
    return result
