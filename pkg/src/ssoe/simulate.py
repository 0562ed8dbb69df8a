"""Synthetic series from specified or fitted ETS / ARIMA models."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Union

import numpy as np

from .arima import (
    ArimaOrders,
    _stationary,
    build_arima_state_space,
    expand_polynomials,
    presample_block,
)
from .core import StateSpaceModel, generate
from .errors import GenerationError, SpecificationError
from .ets import EtsSpec, EtsState, PersistenceParams, build_ets


def _normal(rng, size, mean=0.0, sd=1.0):
    return rng.normal(mean, sd, size)


def _laplace(rng, size, mean=0.0, scale=1.0):
    return rng.laplace(mean, scale, size)


RANDOMIZERS: Dict[str, Callable] = {"normal": _normal, "laplace": _laplace}


def _default_spread(randomizer, rparams, sd):
    """Give the built-in randomizers standard deviation ``sd`` unless set."""
    if randomizer == "normal":
        rparams.setdefault("sd", sd)
    elif randomizer == "laplace":
        rparams.setdefault("scale", sd / np.sqrt(2.0))
    return rparams


def register_randomizer(name: str, func: Callable) -> None:
    """Make ``func(rng, size, **params)`` available under ``name``."""
    RANDOMIZERS[name] = func


@dataclass
class SimulationSpec:
    """What to simulate.

    ``params`` keys for ETS: ``alpha``, ``beta``, ``gamma``, ``phi``,
    ``level``, ``trend``, ``seasonal``. For ARIMA: ``ar`` and ``ma`` (lists
    per lag), ``constant`` and ``initial`` (pre-sample observations).
    Missing entries, or entries set to ``"random"``, are drawn at random.
    """

    model: Union[EtsSpec, ArimaOrders, StateSpaceModel]
    obs: int
    nsim: int = 1
    params: Dict[str, Any] = field(default_factory=dict)
    randomizer: Union[str, Callable] = "normal"
    randomizer_params: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None


@dataclass
class SimulationResult:
    series: np.ndarray
    states: np.ndarray
    innovations: np.ndarray
    model: StateSpaceModel
    params: Dict[str, Any]


def _missing(params, key):
    return params.get(key) is None or (isinstance(params.get(key), str) and params[key] == "random")


def _ets_model(spec: EtsSpec, params, rng):
    """Fill missing ETS parameters from the documented random ranges."""
    p = dict(params)
    if _missing(p, "alpha"):
        p["alpha"] = rng.uniform(0.05, 0.5)
    if spec.has_trend and _missing(p, "beta"):
        p["beta"] = rng.uniform(0.0, p["alpha"] / 2)
    if spec.has_season and _missing(p, "gamma"):
        p["gamma"] = rng.uniform(0.0, (1 - p["alpha"]) / 2)
    if spec.damped and _missing(p, "phi"):
        p["phi"] = rng.uniform(0.8, 1.0)
    if _missing(p, "level"):
        p["level"] = rng.uniform(50, 150)
    if spec.has_trend and _missing(p, "trend"):
        p["trend"] = rng.uniform(0.99, 1.01) if spec.trend.startswith("M") else rng.uniform(-1, 1)
    if spec.has_season and _missing(p, "seasonal"):
        if spec.seasonal == "M":
            s = rng.uniform(0.8, 1.2, spec.period)
            p["seasonal"] = s / np.exp(np.mean(np.log(s)))
        else:
            s = rng.normal(0, 0.05 * p["level"], spec.period)
            p["seasonal"] = s - s.mean()
    persistence = PersistenceParams(p["alpha"], p.get("beta"), p.get("gamma"), p.get("phi"))
    state = EtsState(p["level"], p.get("trend"),
                     None if not spec.has_season else np.asarray(p["seasonal"], dtype=float))
    return build_ets(spec, persistence, state), p


def _draw_stationary(rng, n, sign):
    while True:
        coefs = rng.uniform(-1, 1, n)
        if _stationary(coefs, sign):
            return coefs


def _arima_model(orders: ArimaOrders, params, rng):
    p = dict(params)
    if _missing(p, "ar"):
        p["ar"] = [_draw_stationary(rng, n, -1.0) for n in orders.ar]
    if _missing(p, "ma"):
        p["ma"] = [_draw_stationary(rng, n, 1.0) for n in orders.ma]
    if _missing(p, "constant"):
        p["constant"] = 0.0
    poly = expand_polynomials(orders, p["ar"], p["ma"])
    y_pre = 0.0 if _missing(p, "initial") else p["initial"]
    model = build_arima_state_space(poly, p["constant"], presample_block(poly, y_pre))
    return model, p


def _sampler(randomizer):
    if callable(randomizer):
        return randomizer
    try:
        return RANDOMIZERS[randomizer]
    except KeyError:
        raise SpecificationError(f"unknown randomizer {randomizer!r}") from None


def simulate_series(spec: SimulationSpec) -> SimulationResult:
    """Generate ``nsim`` series of length ``obs``.

    Each replicate draws its innovations from its own child of the seed
    sequence, so results are reproducible and replicates independent.
    """
    if spec.obs < 1 or spec.nsim < 1:
        raise SpecificationError("obs and nsim must be positive")
    root = np.random.SeedSequence(spec.seed)
    param_seq, *children = root.spawn(spec.nsim + 1)
    rng = np.random.default_rng(param_seq)
    if isinstance(spec.model, EtsSpec):
        model, used = _ets_model(spec.model, spec.params, rng)
    elif isinstance(spec.model, ArimaOrders):
        model, used = _arima_model(spec.model, spec.params, rng)
    else:
        model, used = spec.model, dict(spec.params)
    sampler = _sampler(spec.randomizer)
    rparams = dict(spec.randomizer_params)
    if model.error == "M":
        _default_spread(spec.randomizer, rparams, 0.05)
    eps = np.empty((spec.nsim, spec.obs))
    for i, child in enumerate(children):
        draws = np.asarray(sampler(np.random.default_rng(child), spec.obs, **rparams), dtype=float)
        if draws.shape != (spec.obs,):
            raise GenerationError(f"randomizer returned shape {draws.shape}, expected ({spec.obs},)")
        bad = np.flatnonzero(~np.isfinite(draws))
        if bad.size:
            raise GenerationError(
                f"randomizer returned a non-finite value at replicate {i}, draw {int(bad[0])}")
        eps[i] = draws
    series, states = generate(model, eps)
    return SimulationResult(series, states, eps, model, used)


def simulate_from_fitted(fit, obs: int, nsim: int = 1, seed=None,
                         randomizer: Union[str, Callable] = "normal",
                         randomizer_params: Optional[dict] = None) -> SimulationResult:
    """Simulate from the parameters and initial states of a fitted model.

    The built-in randomizers default to the fitted residual standard deviation.
    """
    rparams = _default_spread(randomizer, dict(randomizer_params or {}),
                              float(np.sqrt(fit.sigma2)))
    spec = SimulationSpec(fit.model, obs, nsim, dict(fit.params), randomizer, rparams, seed)
    return simulate_series(spec)
