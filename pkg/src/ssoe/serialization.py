"""Versioned JSON model files.

Everything needed to forecast is written out explicitly: the lagged-model
matrices, the initial and final state blocks, the residual variance and the
ETS recursion codes. Floats go through ``repr`` so a reload reproduces the
stored values bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np

from . import __version__
from .arima import ArimaOrders, SmaSpec
from .core import EtsCodes, StateSpaceModel
from .errors import FormatError
from .ets import EtsSpec

FORMAT = "ssoe-model"
FORMAT_VERSION = 1


@dataclass
class SavedModel:
    """A reloaded model; usable wherever forecasting needs a fit."""

    family: str
    spec: Any
    params: Dict[str, float]
    model: StateSpaceModel
    final_states: np.ndarray
    sigma2: float
    loglik: float = float("nan")
    ic: Dict[str, float] = field(default_factory=dict)
    n_params: int = 0
    nobs: int = 0
    initial_mode: str = ""
    library_version: str = __version__

    @property
    def name(self) -> str:
        return str(self.spec)


def _spec_dict(family, spec) -> dict:
    if isinstance(spec, EtsSpec):
        return {"kind": "ets", "text": str(spec), "period": spec.period}
    if isinstance(spec, ArimaOrders):
        return {"kind": "arima", "lags": list(spec.lags), "ar": list(spec.ar),
                "i": list(spec.i), "ma": list(spec.ma)}
    if isinstance(spec, SmaSpec):
        return {"kind": "sma", "order": spec.order}
    return {"kind": "other", "text": str(spec)}


def _spec_from(d):
    kind = d.get("kind")
    if kind == "ets":
        return EtsSpec.parse(d["text"], int(d["period"]))
    if kind == "arima":
        return ArimaOrders(tuple(d["lags"]), tuple(d["ar"]), tuple(d["i"]), tuple(d["ma"]))
    if kind == "sma":
        return SmaSpec(int(d["order"]))
    if kind == "other":
        return d["text"]
    raise FormatError(f"unknown spec kind {kind!r}", "spec.kind")


def _mat(a):
    return np.asarray(a, dtype=float).tolist()


def to_dict(fit) -> dict:
    m = fit.model
    ets = None
    if m.ets is not None:
        c = m.ets
        ets = {"error": c.error, "trend": c.trend, "season": c.season, "damped": c.damped,
               "alpha": c.alpha, "beta": c.beta, "gamma": c.gamma, "phi": c.phi,
               "period": c.period}
    return {
        "format": FORMAT,
        "format_version": FORMAT_VERSION,
        "library_version": __version__,
        "family": fit.family,
        "spec": _spec_dict(fit.family, fit.spec),
        "name": str(fit.spec),
        "params": {k: float(v) for k, v in fit.params.items()},
        "model": {
            "measurement": _mat(m.measurement),
            "transition": _mat(m.transition),
            "persistence": _mat(m.persistence),
            "lags": [int(v) for v in m.lags],
            "initial": _mat(m.initial),
            "error": m.error,
            "constant": float(m.constant),
            "offset": _mat(m.offset),
            "ets": ets,
        },
        "final_states": _mat(fit.final_states),
        "fit": {
            "sigma2": float(fit.sigma2),
            "loglik": float(fit.loglik),
            "ic": {k: float(v) for k, v in fit.ic.items()},
            "n_params": int(fit.n_params),
            "nobs": int(fit.nobs),
            "initial_mode": fit.initial_mode,
        },
    }


def _get(d, key, path):
    if not isinstance(d, dict) or key not in d:
        raise FormatError("missing", f"{path}{key}")
    return d[key]


def _array(d, key, path, ndim):
    try:
        a = np.asarray(_get(d, key, path), dtype=float)
    except (TypeError, ValueError):
        raise FormatError("not numeric", f"{path}{key}") from None
    if a.ndim != ndim:
        raise FormatError(f"expected {ndim}-d array", f"{path}{key}")
    return a


def from_dict(d: dict) -> SavedModel:
    if _get(d, "format", "") != FORMAT:
        raise FormatError(f"expected {FORMAT!r}", "format")
    version = _get(d, "format_version", "")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported version {version!r}", "format_version")
    md = _get(d, "model", "")
    ets_d = _get(md, "ets", "model.")
    codes = None
    if ets_d is not None:
        try:
            codes = EtsCodes(int(ets_d["error"]), int(ets_d["trend"]), int(ets_d["season"]),
                             bool(ets_d["damped"]), float(ets_d["alpha"]), float(ets_d["beta"]),
                             float(ets_d["gamma"]), float(ets_d["phi"]), int(ets_d["period"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"bad ETS codes ({exc})", "model.ets") from None
    try:
        model = StateSpaceModel(
            _array(md, "measurement", "model.", 1),
            _array(md, "transition", "model.", 2),
            _array(md, "persistence", "model.", 1),
            np.asarray(_get(md, "lags", "model."), dtype=np.int64),
            _array(md, "initial", "model.", 2),
            error=_get(md, "error", "model."),
            constant=float(_get(md, "constant", "model.")),
            offset=_array(md, "offset", "model.", 1),
            ets=codes,
        )
    except FormatError:
        raise
    except (TypeError, ValueError) as exc:
        raise FormatError(str(exc), "model") from None
    final = _array(d, "final_states", "", 2)
    if final.shape != model.initial.shape:
        raise FormatError(f"shape {final.shape} does not match {model.initial.shape}",
                          "final_states")
    fd = _get(d, "fit", "")
    params = _get(d, "params", "")
    if not isinstance(params, dict):
        raise FormatError("expected an object", "params")
    return SavedModel(
        family=str(_get(d, "family", "")),
        spec=_spec_from(_get(d, "spec", "")),
        params={k: float(v) for k, v in params.items()},
        model=model,
        final_states=final,
        sigma2=float(_get(fd, "sigma2", "fit.")),
        loglik=float(fd.get("loglik", float("nan"))),
        ic={k: float(v) for k, v in fd.get("ic", {}).items()},
        n_params=int(fd.get("n_params", 0)),
        nobs=int(fd.get("nobs", 0)),
        initial_mode=str(fd.get("initial_mode", "")),
        library_version=str(d.get("library_version", "")),
    )


def save_model(fit, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(to_dict(fit), indent=1) + "\n")


def load_model(path: Union[str, Path]) -> SavedModel:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON at line {exc.lineno}") from None
    return from_dict(d)
