"""Lagged single-source-of-error state-space engine.

The model is

    y_t = w' v_{t-l} + c + e_t
    v_t = F v_{t-l} + g e_t + o

where each state component ``j`` is read at its own lag ``l_j``. ETS models
with multiplicative parts run through a taxonomy kernel on the same lagged
layout; everything else goes through the linear kernel.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels as kern
from .errors import SpecificationError, StructuralError


@dataclass
class TimeSeries:
    """Observed values with their seasonal lags and holdout length."""

    values: np.ndarray
    lags: tuple = (1,)
    holdout: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).ravel()
        lags = tuple(int(x) for x in self.lags)
        if 1 not in lags:
            lags = (1,) + lags
        if list(lags) != sorted(set(lags)) or lags[0] != 1:
            raise SpecificationError(f"lags must be strictly increasing from 1, got {lags}")
        self.lags = lags
        if self.holdout < 0 or self.holdout >= self.values.size:
            raise SpecificationError("holdout must be in [0, len(values))")
        if not np.all(np.isfinite(self.train)):
            raise SpecificationError("training span contains missing values")

    @property
    def train(self) -> np.ndarray:
        return self.values[: self.values.size - self.holdout]

    @property
    def test(self) -> np.ndarray:
        return self.values[self.values.size - self.holdout:]

    @property
    def period(self) -> int:
        """Longest seasonal lag (1 for non-seasonal data)."""
        return self.lags[-1]

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class EtsCodes:
    """Numeric description of an ETS recursion for the taxonomy kernel."""

    error: int
    trend: int
    season: int
    damped: bool
    alpha: float
    beta: float
    gamma: float
    phi: float
    period: int

    @property
    def pure_additive(self) -> bool:
        return (self.error == kern.ERROR_ADD and self.trend != kern.TREND_MUL
                and self.season != kern.SEASON_MUL)


@dataclass(frozen=True)
class StateSpaceModel:
    """Matrices of the lagged model plus its pre-sample state block.

    ``initial`` has shape ``(K, max(lags))``; column ``-1`` is time 0,
    column ``-k`` is time ``1 - k``.
    """

    measurement: np.ndarray
    transition: np.ndarray
    persistence: np.ndarray
    lags: np.ndarray
    initial: np.ndarray
    error: str = "A"
    constant: float = 0.0
    offset: Optional[np.ndarray] = None
    ets: Optional[EtsCodes] = None

    def __post_init__(self):
        w = np.asarray(self.measurement, dtype=float).ravel()
        F = np.atleast_2d(np.asarray(self.transition, dtype=float))
        g = np.asarray(self.persistence, dtype=float).ravel()
        lags = np.asarray(self.lags, dtype=np.int64).ravel()
        K = w.size
        if F.shape != (K, K) or g.size != K or lags.size != K:
            raise SpecificationError("w, F, g and l must share dimension K")
        if np.any(lags < 1):
            raise SpecificationError("lags must be >= 1")
        init = np.asarray(self.initial, dtype=float)
        if init.ndim == 1:
            init = init.reshape(K, -1)
        if init.shape[0] != K or init.shape[1] < lags.max():
            raise SpecificationError(
                f"initial block must be (K, >= max(l)) = ({K}, {lags.max()}), got {init.shape}")
        init = init[:, -int(lags.max()):]
        offset = np.zeros(K) if self.offset is None else np.asarray(self.offset, dtype=float)
        object.__setattr__(self, "measurement", w)
        object.__setattr__(self, "transition", F)
        object.__setattr__(self, "persistence", g)
        object.__setattr__(self, "lags", lags)
        object.__setattr__(self, "initial", np.ascontiguousarray(init))
        object.__setattr__(self, "offset", offset)
        if self.error not in ("A", "M"):
            raise SpecificationError("error must be 'A' or 'M'")
        if self.error == "M" and self.ets is None:
            raise SpecificationError("multiplicative error requires an ETS recursion")

    @property
    def K(self) -> int:
        return self.measurement.size

    @property
    def max_lag(self) -> int:
        return int(self.lags.max())

    @property
    def linear(self) -> bool:
        return self.ets is None or self.ets.pure_additive

    @property
    def rank_one(self) -> bool:
        """True when every row of F is constant (ARIMA structure)."""
        F = self.transition
        return bool(np.all(F == F[:, :1]))

    def with_initial(self, initial) -> "StateSpaceModel":
        return dataclasses.replace(self, initial=np.asarray(initial, dtype=float))


@dataclass
class FitArtifacts:
    """Output of one forward pass over the training span."""

    fitted: np.ndarray
    residuals: np.ndarray
    states: np.ndarray
    sigma2: float
    ok: bool = True

    @property
    def final_states(self) -> np.ndarray:
        """State block after the last observation, in pre-sample layout."""
        return self.states[:, self.states.shape[1] - self._max_lag:]

    _max_lag: int = field(default=1, repr=False)


def lagged_state(states: np.ndarray, t: int, lags: Sequence[int]) -> np.ndarray:
    """Return v_{t-l}: component ``j`` taken at time ``t - l_j`` (1-based ``t``).

    ``states`` is a history matrix whose first ``max(lags)`` columns are the
    pre-sample positions.
    """
    lags = np.asarray(lags, dtype=int)
    L = int(lags.max())
    if t < 1:
        raise StructuralError(f"t must be >= 1, got {t}")
    cols = L + t - 1 - lags
    if np.any(cols < 0) or np.any(cols >= states.shape[1]):
        raise StructuralError(f"time {t} is outside the stored state history")
    return states[np.arange(lags.size), cols]


def _ets_args(model: StateSpaceModel):
    c = model.ets
    return (c.error, c.trend, c.season, c.alpha, c.beta, c.gamma,
            c.phi if c.damped else 1.0, c.period)


def fit_pass(model: StateSpaceModel, y) -> FitArtifacts:
    """Filter ``y`` through the model starting from ``model.initial``.

    Multiplicative-error residuals are relative errors ``y / yhat - 1``.
    A model that hits a non-positive prediction under multiplicative error
    (or non-positive multiplicative states) comes back with ``ok=False``
    rather than raising.
    """
    y = np.ascontiguousarray(y, dtype=float)
    if y.size == 0:
        raise SpecificationError("empty series")
    if model.linear:
        fitted, resid, hist = kern.linear_filter(
            y, model.measurement, model.transition, model.persistence,
            model.lags, model.offset, float(model.constant), model.initial,
            model.rank_one)
        ok = bool(np.all(np.isfinite(fitted)))
    else:
        fitted, resid, hist, ok = kern.ets_filter(y, *_ets_args(model), model.initial)
    sigma2 = float(np.mean(resid ** 2)) if ok else np.inf
    return FitArtifacts(fitted, resid, hist, sigma2, bool(ok), _max_lag=model.max_lag)


def generate(model: StateSpaceModel, eps, start=None):
    """Run the recursion forward driven by innovations ``eps`` of shape (n, h).

    Returns ``(paths, states)``; ``start`` defaults to ``model.initial``.
    """
    eps = np.ascontiguousarray(np.atleast_2d(eps), dtype=float)
    pre = model.initial if start is None else np.ascontiguousarray(start, dtype=float)
    if model.linear:
        return kern.linear_generate(
            eps, model.measurement, model.transition, model.persistence,
            model.lags, model.offset, float(model.constant), pre, model.rank_one)
    return kern.ets_generate(eps, *_ets_args(model), pre)


def _head_block(states: np.ndarray, lags: np.ndarray) -> np.ndarray:
    """Map the tail of a pass onto the pre-sample layout of the reversed pass.

    Component ``j`` at (reversed) pre-sample time ``1 - k`` takes the state at
    time ``T - l_j + k`` of the pass just run.
    """
    K, width = states.shape
    L = int(lags.max())
    block = np.empty((K, L))
    for j in range(K):
        lj = int(lags[j])
        for k in range(1, L + 1):
            kk = min(k, lj)
            block[j, L - k] = states[j, width - 1 - lj + kk]
    return block


def _reverse_trend(block: np.ndarray, model: StateSpaceModel) -> np.ndarray:
    codes = model.ets
    if codes is None or codes.trend == kern.TREND_NONE:
        return block
    out = block.copy()
    level, trend = block[0, -1], block[1, -1]
    if codes.trend == kern.TREND_MUL:
        if trend <= 0:
            return out
        out[0, :] = level * trend
        out[1, :] = 1.0 / trend
    else:
        out[0, :] = level + trend
        out[1, :] = -trend
    return out


def backcast_initialize(model: StateSpaceModel, y, iterations: int = 2,
                        presample=None) -> StateSpaceModel:
    """Re-derive the pre-sample states by forward/backward sweeps.

    Each iteration runs the model forward from the current head, carries the
    tail onto the time-reversed series and runs it backwards; the states left
    before the first observation become the new head.

    ``presample``, when given, maps back-forecast observations (times
    ``1 - max(l) .. 0``, chronological) to a pre-sample block. The reversed
    pass is then continued with zero innovations and its predictions are used
    instead of its raw states; ARIMA uses this so that pre-sample shocks are
    zero.

    Raises :class:`SpecificationError` when ``len(y) < 2 * max(l)``.
    """
    y = np.ascontiguousarray(y, dtype=float)
    if iterations < 1:
        raise SpecificationError("iterations must be positive")
    if y.size < 2 * model.max_lag:
        raise SpecificationError(
            f"backcasting needs at least {2 * model.max_lag} observations, got {y.size}")
    y_rev = np.ascontiguousarray(y[::-1])
    block = model.initial
    L = model.max_lag
    for _ in range(iterations):
        fwd = fit_pass(model.with_initial(block), y)
        if not fwd.ok:
            return model.with_initial(np.full_like(block, np.nan))
        tail = _reverse_trend(_head_block(fwd.states, model.lags), model)
        bwd = fit_pass(model.with_initial(tail), y_rev)
        if not bwd.ok:
            return model.with_initial(np.full_like(block, np.nan))
        if presample is None:
            block = _reverse_trend(_head_block(bwd.states, model.lags), model)
        else:
            ahead, _ = generate(model, np.zeros((1, L)), start=bwd.final_states)
            block = np.asarray(presample(ahead[0, ::-1]), dtype=float)
    return model.with_initial(block)
