"""ARIMA with multiple seasonal lags in lagged state-space form, plus SMA."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import _kernels as kern
from .core import StateSpaceModel, TimeSeries, fit_pass
from .errors import SpecificationError
from .estimation import (
    EstimationConfig,
    FitResult,
    gaussian_loglik,
    information_criteria,
    optimize,
)


@dataclass(frozen=True)
class ArimaOrders:
    """AR, I and MA orders for each lag in ``lags``."""

    lags: tuple = (1,)
    ar: tuple = (0,)
    i: tuple = (0,)
    ma: tuple = (0,)

    def __post_init__(self):
        n = len(self.lags)
        for name in ("lags", "ar", "i", "ma"):
            object.__setattr__(self, name, tuple(int(v) for v in getattr(self, name)))
        if not (len(self.ar) == len(self.i) == len(self.ma) == n):
            raise SpecificationError("ar, i and ma must have one entry per lag")
        if any(v < 0 for v in self.ar + self.i + self.ma) or any(lag < 1 for lag in self.lags):
            raise SpecificationError("orders must be non-negative and lags positive")

    @classmethod
    def parse(cls, orders: str, lags: str = "1") -> "ArimaOrders":
        """Parse ``"ar=1,2;i=1,1;ma=2,2"`` with lags ``"1,12"``; missing keys are zeros."""
        try:
            lag_list = tuple(int(v) for v in str(lags).replace(" ", "").split(",") if v)
        except ValueError as exc:
            raise SpecificationError(f"bad lags {lags!r}") from exc
        parts = {"ar": (0,) * len(lag_list), "i": (0,) * len(lag_list), "ma": (0,) * len(lag_list)}
        for chunk in str(orders).replace(" ", "").split(";"):
            if not chunk:
                continue
            key, _, vals = chunk.partition("=")
            if key not in parts or not vals:
                raise SpecificationError(f"bad order chunk {chunk!r}")
            try:
                values = tuple(int(v) for v in vals.split(","))
            except ValueError as exc:
                raise SpecificationError(f"bad order chunk {chunk!r}") from exc
            if len(values) != len(lag_list):
                raise SpecificationError(f"{key} needs {len(lag_list)} values, got {len(values)}")
            parts[key] = values
        return cls(lag_list, parts["ar"], parts["i"], parts["ma"])

    def format(self) -> str:
        """Inverse of :meth:`parse` for the orders part."""
        join = lambda v: ",".join(str(x) for x in v)  # noqa: E731
        return f"ar={join(self.ar)};i={join(self.i)};ma={join(self.ma)}"

    @property
    def d(self) -> int:
        return sum(self.i)

    @property
    def n_coefficients(self) -> int:
        return sum(self.ar) + sum(self.ma)

    def ari_order(self) -> int:
        return sum(lag * (p + d) for lag, p, d in zip(self.lags, self.ar, self.i))

    def ma_order(self) -> int:
        return sum(lag * q for lag, q in zip(self.lags, self.ma))

    def __str__(self):
        parts = []
        for lag, p, d, q in zip(self.lags, self.ar, self.i, self.ma):
            suffix = "" if lag == 1 else f"[{lag}]"
            parts.append(f"({p},{d},{q}){suffix}")
        prefix = "ARIMA" if self.lags == (1,) else "SARIMA"
        return prefix + "".join(parts)


@dataclass
class ArimaPolynomials:
    """ARI polynomial ``1 - sum eta_j B^j`` and MA ``1 + sum theta_j B^j``."""

    eta: np.ndarray
    theta: np.ndarray

    @property
    def K(self) -> int:
        return self.eta.size


def _sparse_mul(a: Dict[int, float], b: Dict[int, float]) -> Dict[int, float]:
    out: Dict[int, float] = {}
    for pa, ca in a.items():
        for pb, cb in b.items():
            out[pa + pb] = out.get(pa + pb, 0.0) + ca * cb
    return out


def _split(orders: ArimaOrders, coefs, kind: str) -> List[np.ndarray]:
    counts = orders.ar if kind == "ar" else orders.ma
    if coefs is None:
        coefs = [np.zeros(c) for c in counts]
    coefs = [np.asarray(c, dtype=float).ravel() for c in coefs]
    if len(coefs) != len(counts) or any(c.size != n for c, n in zip(coefs, counts)):
        raise SpecificationError(f"{kind} coefficients do not match orders {counts}")
    return coefs


def expand_polynomials(orders: ArimaOrders, ar=None, ma=None) -> ArimaPolynomials:
    """Multiply out the per-lag AR, differencing and MA polynomials.

    ``ar[k]`` and ``ma[k]`` hold the coefficients for ``orders.lags[k]``.
    The AR polynomial of a lag ``s`` is ``1 - phi_1 B^s - phi_2 B^2s ...``
    and the MA polynomial ``1 + theta_1 B^s + ...``.
    """
    ar = _split(orders, ar, "ar")
    ma = _split(orders, ma, "ma")
    ari = {0: 1.0}
    mapoly = {0: 1.0}
    for lag, phis, d, thetas in zip(orders.lags, ar, orders.i, ma):
        poly = {0: 1.0}
        for k, phi in enumerate(phis, start=1):
            poly[k * lag] = poly.get(k * lag, 0.0) - phi
        ari = _sparse_mul(ari, poly)
        for _ in range(d):
            ari = _sparse_mul(ari, {0: 1.0, lag: -1.0})
        poly = {0: 1.0}
        for k, theta in enumerate(thetas, start=1):
            poly[k * lag] = poly.get(k * lag, 0.0) + theta
        mapoly = _sparse_mul(mapoly, poly)
    K = max(max(ari), max(mapoly), 1)
    eta = np.zeros(K)
    theta = np.zeros(K)
    for power, c in ari.items():
        if power:
            eta[power - 1] = -c
    for power, c in mapoly.items():
        if power:
            theta[power - 1] = c
    return ArimaPolynomials(eta, theta)


def build_arima_state_space(poly: ArimaPolynomials, constant: float = 0.0,
                            initial=None) -> StateSpaceModel:
    """Lagged SSOE matrices: every row j of F is eta_j, w = 1, g = eta + theta, l = 1..K.

    A constant enters the measurement and, through ``eta * c``, the
    transition, acting as an intercept without differencing and a drift with.
    """
    K = poly.K
    F = np.repeat(poly.eta[:, None], K, axis=1)
    w = np.ones(K)
    g = poly.eta + poly.theta
    lags = np.arange(1, K + 1)
    block = np.zeros((K, K)) if initial is None else initial
    return StateSpaceModel(w, F, g, lags, block, constant=float(constant),
                           offset=poly.eta * constant)


def presample_block(poly: ArimaPolynomials, y_pre) -> np.ndarray:
    """States implied by pre-sample observations (times 1-K..0) and zero innovations."""
    y_pre = np.broadcast_to(np.asarray(y_pre, dtype=float), (poly.K,))
    return np.outer(poly.eta, y_pre)


def _stationary(coefs: np.ndarray, sign: float) -> bool:
    """All roots of ``1 + sign * sum c_k z^k`` lie outside the unit circle."""
    if coefs.size == 0:
        return True
    comp = np.zeros((coefs.size, coefs.size))
    comp[0, :] = -sign * coefs
    if coefs.size > 1:
        comp[1:, :-1] = np.eye(coefs.size - 1)
    return bool(np.max(np.abs(np.linalg.eigvals(comp))) < 1.0)


class _ArimaProblem:
    def __init__(self, y, orders: ArimaOrders, config: EstimationConfig, constant: Optional[bool],
                 fixed_eta=None):
        self.y = np.ascontiguousarray(y, dtype=float)
        self.orders = orders
        self.config = config
        self.constant = (orders.d == 0) if constant is None else bool(constant)
        self.fixed_eta = fixed_eta
        if fixed_eta is not None:
            K = len(fixed_eta)
        else:
            K = max(orders.ari_order(), orders.ma_order(), 1)
        self.K = K
        self.mode = config.initial
        self.fallback = False
        if self.mode == "backcasting" and self.y.size < 2 * K:
            self.mode = "optimization"
            self.fallback = True
        names, x0, lo, hi = [], [], [], []
        for lag, p in zip(orders.lags, orders.ar):
            for k in range(1, p + 1):
                names.append(f"ar{k}_lag{lag}")
                x0.append(0.1 if k == 1 else 0.0), lo.append(-3.0), hi.append(3.0)
        for lag, q in zip(orders.lags, orders.ma):
            for k in range(1, q + 1):
                names.append(f"ma{k}_lag{lag}")
                x0.append(-0.1 if k == 1 else 0.0), lo.append(-3.0), hi.append(3.0)
        scale = float(np.max(np.abs(self.y))) + 1.0
        if self.constant:
            names.append("constant")
            if orders.d == 0:
                x0.append(float(np.mean(self.y)) * (1 - (0.1 if sum(orders.ar) else 0.0)))
            else:
                x0.append(float(np.mean(np.diff(self.y))) if self.y.size > 1 else 0.0)
            lo.append(-10 * scale), hi.append(10 * scale)
        self.n_coef = len(names)
        self.y_start = float(self.y[0]) if orders.d > 0 else float(np.mean(self.y))
        if self.mode == "optimization":
            for k in range(K):
                names.append(f"y_pre{k - K + 1}")
                x0.append(self.y_start), lo.append(-10 * scale), hi.append(10 * scale)
        self.names = names
        self.x0, self.lower, self.upper = np.array(x0), np.array(lo), np.array(hi)
        self.reference = float(np.mean(self.y ** 2))

    def split(self, x):
        pos = 0
        ar, ma = [], []
        for p in self.orders.ar:
            ar.append(np.asarray(x[pos:pos + p]))
            pos += p
        for q in self.orders.ma:
            ma.append(np.asarray(x[pos:pos + q]))
            pos += q
        c = 0.0
        if self.constant:
            c = float(x[pos])
            pos += 1
        y_pre = np.asarray(x[pos:pos + self.K]) if self.mode == "optimization" else None
        return ar, ma, c, y_pre

    def model(self, x):
        ar, ma, c, y_pre = self.split(x)
        if not all(_stationary(a, -1.0) for a in ar) or not all(_stationary(m, 1.0) for m in ma):
            return None
        if self.fixed_eta is not None:
            poly = ArimaPolynomials(np.asarray(self.fixed_eta, dtype=float), np.zeros(self.K))
        else:
            poly = expand_polynomials(self.orders, ar, ma)
        if self.mode == "manual":
            block = np.asarray(self.config.manual_initial, dtype=float)
            if block.ndim == 1:
                block = presample_block(poly, block)
            return build_arima_state_space(poly, c, block)
        if self.mode == "optimization":
            return build_arima_state_space(poly, c, presample_block(poly, y_pre))
        model = build_arima_state_space(poly, c, presample_block(poly, self.y_start))
        block = kern.arima_backcast(self.y, model.measurement, model.transition,
                                    model.persistence, model.lags, model.offset,
                                    float(model.constant), model.initial, True,
                                    self.config.backcast_iterations, poly.eta)
        return model.with_initial(block)

    def loss(self, x):
        model = self.model(x)
        if model is None:
            return np.inf
        art = fit_pass(model, self.y)
        if not art.ok:
            return np.inf
        return -gaussian_loglik(art.residuals, reference=self.reference)


def _finish(problem, x, family, spec, extra_params=0, diagnostics=None) -> FitResult:
    y = problem.y
    model = problem.model(x)
    if model is None:
        raise SpecificationError("parameters outside the stationarity/invertibility region")
    art = fit_pass(model, y)
    ll = gaussian_loglik(art.residuals, reference=problem.reference) if art.ok else -np.inf
    k = problem.n_coef + 1 + extra_params + (problem.K if problem.mode == "optimization" else 0)
    diag = {"initial_fallback": problem.fallback}
    diag.update(diagnostics or {})
    return FitResult(family, spec, dict(zip(problem.names, map(float, x))), model, art, y, ll,
                     information_criteria(ll, k, y.size), k, problem.mode, diag)


def _train(series) -> np.ndarray:
    if isinstance(series, TimeSeries):
        return series.train
    return np.ascontiguousarray(series, dtype=float)


def fit_arima(series, orders: ArimaOrders, config: Optional[EstimationConfig] = None,
              constant: Optional[bool] = None) -> FitResult:
    """Estimate an ARIMA model by concentrated likelihood.

    ``constant=None`` adds an intercept when there is no differencing; pass
    ``True`` for a drift term on differenced models.
    """
    y = _train(series)
    config = config or EstimationConfig(initial="backcasting")
    problem = _ArimaProblem(y, orders, config, constant)
    if problem.x0.size:
        opt = optimize(problem.loss, problem.lower, problem.upper, problem.x0,
                       tolerance=config.tolerance, max_evals=config.max_evals)
        x, nfev = opt.x, opt.nfev
    else:
        x, nfev = problem.x0, 0
    return _finish(problem, x, "arima", orders, diagnostics={"nfev": nfev})


def default_max_orders(lags: Sequence[int]) -> ArimaOrders:
    """ar <= (3, 2), i <= (2, 1), ma <= (3, 2) for the first and seasonal lags."""
    lags = tuple(lags)
    n = len(lags)
    ar = (3,) + (2,) * (n - 1)
    i = (2,) + (1,) * (n - 1)
    ma = (3,) + (2,) * (n - 1)
    return ArimaOrders(lags, ar, i, ma)


def select_arima_orders(series, max_orders: Optional[ArimaOrders] = None, ic: str = "AICc",
                        config: Optional[EstimationConfig] = None) -> FitResult:
    """Greedy information-criterion search over ARIMA orders.

    Differences are chosen first (each combination fitted with an MA(1) on
    the first lag), then AR orders lag by lag in ascending order, then MA
    orders; each lag's search stops after two consecutive worsenings. No
    statistical tests are used. This visiting order is a stand-in for the
    procedure of the original package, which is not reproduced here.
    """
    if not isinstance(series, TimeSeries):
        series = TimeSeries(series)
    y = series.train
    config = config or EstimationConfig(initial="backcasting", ic=ic)
    if max_orders is None:
        max_orders = default_max_orders(series.lags)
    keep = [k for k, lag in enumerate(max_orders.lags) if lag == 1 or y.size >= 3 * lag]
    lags = tuple(max_orders.lags[k] for k in keep)
    max_ar = [max_orders.ar[k] for k in keep]
    max_i = [max_orders.i[k] for k in keep]
    max_ma = [max_orders.ma[k] for k in keep]
    n = len(lags)
    fits: Dict[str, FitResult] = {}

    def score(ar, i, ma):
        orders = ArimaOrders(lags, ar, i, ma)
        key = f"{orders}"
        if key not in fits:
            try:
                fits[key] = fit_arima(y, orders, config)
            except Exception:  # estimation failure: record as inadmissible
                fits[key] = None
        f = fits[key]
        return np.inf if f is None or not np.isfinite(f.loglik) else f.ic[ic]

    zeros = (0,) * n
    best_ic = score(zeros, zeros, zeros)
    best_i = zeros
    probe_ma = tuple(1 if (k == 0 and max_ma[0] > 0) else 0 for k in range(n))
    probes = {}
    for combo in itertools.product(*[range(m + 1) for m in max_i]):
        probes[combo] = score(zeros, combo, probe_ma)
    best_i = min(probes, key=probes.get)

    cur = {"ar": list(zeros), "ma": list(zeros)}
    best_ic = score(zeros, best_i, zeros)
    for part, limits in (("ar", max_ar), ("ma", max_ma)):
        for k in range(n):
            worse = 0
            for order in range(1, limits[k] + 1):
                trial = dict(cur)
                trial[part] = list(cur[part])
                trial[part][k] = order
                value = score(tuple(trial["ar"]), best_i, tuple(trial["ma"]))
                if value < best_ic:
                    best_ic = value
                    cur = trial
                    worse = 0
                else:
                    worse += 1
                    if worse >= 2:
                        break

    valid = {k: f for k, f in fits.items() if f is not None and np.isfinite(f.ic[ic])}
    if not valid:
        result = fit_arima(y, ArimaOrders((1,), (0,), (1,), (0,)), config)
        result.diagnostics["all_degenerate"] = True
    else:
        result = min(valid.values(), key=lambda f: f.ic[ic])
    result.diagnostics["candidates"] = {k: (f.ic[ic] if f is not None else np.inf)
                                        for k, f in fits.items()}
    return result


@dataclass(frozen=True)
class SmaSpec:
    order: int

    def __str__(self):
        return f"SMA({self.order})"


def sma_model(series, p: int, config: Optional[EstimationConfig] = None) -> FitResult:
    """Simple moving average of order ``p`` as an AR(p) with all coefficients 1/p.

    Nothing is estimated apart from the variance. Pre-sample states come
    from backcasting when the series is at least ``2p`` long, otherwise from
    the first observation.
    """
    y = _train(series)
    if p < 1 or p > y.size:
        raise SpecificationError(f"SMA order must be in 1..{y.size}, got {p}")
    config = config or EstimationConfig(initial="backcasting")
    eta = np.full(p, 1.0 / p)
    problem = _ArimaProblem(y, ArimaOrders(), config, constant=False, fixed_eta=eta)
    if problem.mode == "optimization":
        # no free initials for SMA; the first observation fills the pre-sample
        problem.mode = "manual"
        problem.config = EstimationConfig("manual", config.ic, manual_initial=np.full(p, y[0]))
        problem.names = []
    return _finish(problem, np.zeros(0), "sma", SmaSpec(p))


def select_sma_order(series, max_p: Optional[int] = None, ic: str = "AICc",
                     config: Optional[EstimationConfig] = None) -> FitResult:
    """Lowest-IC SMA order in ``1..max_p`` (capped at half the training length)."""
    y = _train(series)
    cap = max(1, y.size // 2)
    max_p = cap if max_p is None else min(max(1, int(max_p)), cap)
    fits = [sma_model(y, p, config) for p in range(1, max_p + 1)]
    best = min(fits, key=lambda f: f.ic[ic])
    best.diagnostics["candidates"] = {str(f.spec): f.ic[ic] for f in fits}
    return best


def naive_model(series) -> FitResult:
    """Random walk, ARIMA(0,1,0) without drift."""
    return fit_arima(series, ArimaOrders((1,), (0,), (1,), (0,)), EstimationConfig(initial="backcasting"),
                     constant=False)
