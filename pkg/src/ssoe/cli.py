"""Command-line interface: fit, forecast, decompose, simulate, benchmark.

Exit codes: 0 success, 1 input or specification error, 2 estimation or
generation failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .arima import (
    ArimaOrders,
    fit_arima,
    naive_model,
    select_arima_orders,
    select_sma_order,
    sma_model,
)
from .benchmark import DEFAULT_MODELS, MODELS, bundled_manifest, load_manifest, run_benchmark
from .core import TimeSeries
from .dataio import read_series_csv, write_rows
from .decompose import msdecompose
from .errors import (
    EstimationError,
    GenerationError,
    InputError,
    SpecificationError,
)
from .estimation import CRITERIA, INITIAL_MODES, EstimationConfig
from .ets import EtsSpec, fit_ets, select_ets
from .forecasting import SIDES, prediction_interval
from .metrics import COLUMNS, evaluate, records_to_csv
from .serialization import load_model, save_model
from .simulate import RANDOMIZERS, SimulationSpec, simulate_from_fitted, simulate_series

EXIT_OK, EXIT_INPUT, EXIT_ESTIMATION = 0, 1, 2


def _lags(text):
    try:
        return tuple(int(v) for v in text.replace(" ", "").split(",") if v)
    except ValueError:
        raise InputError(f"bad lags {text!r}") from None


def _json_arg(text, what):
    if text is None:
        return {}
    try:
        value = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{what} is not valid JSON: {exc.msg}") from None
    if not isinstance(value, dict):
        raise InputError(f"{what} must be a JSON object")
    return value


def _column(value):
    return int(value) if value is not None and value.lstrip("-").isdigit() else value


def _fit(args, series: TimeSeries):
    name = args.model
    key = name.lower()
    initial = args.initial
    if key == "ets-auto":
        return select_ets(series, ic=args.ic, config=EstimationConfig(initial or "optimization",
                                                                      args.ic))
    if key in ("ssarima-auto", "arima-auto"):
        return select_arima_orders(series, ic=args.ic,
                                   config=EstimationConfig(initial or "backcasting", args.ic))
    if key in ("arima", "sarima", "ssarima"):
        orders = ArimaOrders.parse(args.orders or "", args.orders_lags or ",".join(map(str, series.lags)))
        return fit_arima(series, orders, EstimationConfig(initial or "backcasting", args.ic),
                         constant=args.constant)
    if key == "sma":
        if args.order:
            return sma_model(series, args.order)
        return select_sma_order(series, ic=args.ic)
    if key == "naive":
        return naive_model(series)
    spec = EtsSpec.parse(name, series.period)
    fit = fit_ets(series, spec, EstimationConfig(initial or "optimization", args.ic))
    if fit.diagnostics.get("degenerate"):
        raise EstimationError(f"{spec} could not be estimated: {fit.diagnostics.get('reason')}")
    return fit


def cmd_fit(args, out):
    values = read_series_csv(args.input, _column(args.column))
    lags = _lags(args.lags)
    holdout = args.h if args.holdout else 0
    if args.holdout and args.h is None:
        raise InputError("--holdout needs --h")
    series = TimeSeries(values, lags, holdout=holdout)
    fit = _fit(args, series)
    if not np.isfinite(fit.loglik):
        raise EstimationError(f"{fit.name}: no admissible parameters found")
    if args.output:
        save_model(fit, args.output)
    report = {
        "model": fit.name,
        "nobs": int(fit.nobs),
        "params": fit.params,
        "loglik": fit.loglik,
        "n_params": fit.n_params,
        **fit.ic,
        "sigma2": fit.sigma2,
        "initial": fit.initial_mode,
    }
    if holdout:
        fc = prediction_interval(fit, holdout, level=args.level, seed=args.seed)
        rec = evaluate(fit.name, series.test, fc, series.train, args.level, 0.0)
        report["holdout"] = {"h": holdout, "MASE": rec.mase, "RMSSE": rec.rmsse,
                             "Coverage": rec.coverage, "sMIS": rec.smis}
    out.write(json.dumps(report, indent=1, default=float) + "\n")
    return EXIT_OK


def cmd_forecast(args, out):
    fit = load_model(args.model_file)
    if args.h < 1:
        raise InputError("--h must be >= 1")
    fc = prediction_interval(fit, args.h, level=args.level, side=args.side,
                             cumulative=args.cumulative, n_paths=args.paths, seed=args.seed)
    columns = ["step", "mean"]
    if fc.lower is not None:
        columns.append("lower")
    if fc.upper is not None:
        columns.append("upper")
    _emit(args.output, out, lambda fh: write_rows(fh, fc.rows(), columns))
    return EXIT_OK


def cmd_decompose(args, out):
    values = read_series_csv(args.input, _column(args.column))
    lags = _lags(args.lags)
    seasonal_lags = tuple(lag for lag in lags if lag > 1)
    res = msdecompose(values, seasonal_lags, type=args.type)
    columns = ["t", "trend"] + [f"seasonal_{lag}" for lag in res.lags] + ["residual"]
    unrolled = [res.seasonal_component(i) for i in range(len(res.lags))]
    rows = []
    for t in range(values.size):
        row = {"t": t + 1, "trend": float(res.trend[t]), "residual": float(res.residual[t])}
        for lag, s in zip(res.lags, unrolled):
            row[f"seasonal_{lag}"] = float(s[t])
        rows.append(row)
    _emit(args.output, out, lambda fh: write_rows(fh, rows, columns))
    return EXIT_OK


def cmd_simulate(args, out):
    rparams = _json_arg(args.randomizer_params, "--randomizer-params")
    if args.from_model:
        fit = load_model(args.from_model)
        res = simulate_from_fitted(fit, args.obs, args.nsim, args.seed, args.randomizer, rparams)
    else:
        if not args.model:
            raise InputError("give --model or --from-model")
        params = _json_arg(args.params, "--params")
        if args.model.lower() in ("arima", "sarima", "ssarima"):
            model = ArimaOrders.parse(args.orders or "", args.orders_lags or "1")
        else:
            model = EtsSpec.parse(args.model, args.period)
        res = simulate_series(SimulationSpec(model, args.obs, args.nsim, params,
                                             args.randomizer, rparams, args.seed))
    if args.format == "long":
        rows = [{"replicate": r + 1, "t": t + 1, "value": float(res.series[r, t])}
                for r in range(args.nsim) for t in range(args.obs)]
        _emit(args.output, out, lambda fh: write_rows(fh, rows, ["replicate", "t", "value"]))
    else:
        if not args.output:
            raise InputError("--format wide writes one file per replicate and needs --output")
        base = Path(args.output)
        base.mkdir(parents=True, exist_ok=True)
        for r in range(args.nsim):
            rows = [{"index": t + 1, "value": float(res.series[r, t])} for t in range(args.obs)]
            with (base / f"series_{r + 1:04d}.csv").open("w", newline="") as fh:
                write_rows(fh, rows, ["index", "value"])
        out.write(f"wrote {args.nsim} files to {base}\n")
    return EXIT_OK


def cmd_benchmark(args, out):
    manifest = load_manifest(args.manifest or bundled_manifest())
    models = tuple(m.strip() for m in args.models.split(",") if m.strip())
    result = run_benchmark(manifest, models, seed=args.seed, level=args.level,
                           n_paths=args.paths, ic=args.ic, jobs=args.jobs,
                           seasonal_scale=args.seasonal_scale)
    table = result.table.sort(args.sort, descending=args.descending)
    if args.output_dir:
        d = Path(args.output_dir)
        d.mkdir(parents=True, exist_ok=True)
        (d / "summary.csv").write_text(table.to_csv())
        (d / "summary.txt").write_text(table.to_text() + "\n")
        (d / "records.csv").write_text(records_to_csv(result.records))
        fails = [{"series_id": f.series_id, "model": f.model, "error": f.error}
                 for f in result.failures]
        with (d / "failures.csv").open("w", newline="") as fh:
            write_rows(fh, fails, ["series_id", "model", "error"])
    out.write(table.to_text() + "\n")
    out.write(f"series: {len(manifest.entries)}  failures: {len(result.failures)}\n")
    return EXIT_OK


def _emit(path, out, writer):
    if path:
        with open(path, "w", newline="") as fh:
            writer(fh)
    else:
        writer(out)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ssoe", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="fit a model to a CSV series")
    f.add_argument("input", help="CSV with a header row (index,value)")
    f.add_argument("--column", help="value column name or zero-based position (default: last)")
    f.add_argument("--model", default="ets-auto",
                   help="ets-auto, 'ETS(A,N,N)', arima, ssarima-auto, sma, naive")
    f.add_argument("--lags", default="1", help="frequency lags, e.g. '1,12'")
    f.add_argument("--orders", help="ARIMA orders, e.g. 'ar=1,0;i=1,1;ma=1,1'")
    f.add_argument("--orders-lags", help="lags the ARIMA orders refer to (default: --lags)")
    f.add_argument("--constant", action="store_true", default=None,
                   help="add drift to a differenced ARIMA")
    f.add_argument("--order", type=int, help="SMA order (default: selected)")
    f.add_argument("--h", type=int, help="forecast horizon")
    f.add_argument("--holdout", action="store_true", help="withhold the last h values")
    f.add_argument("--ic", choices=CRITERIA, default="AICc")
    f.add_argument("--initial", choices=INITIAL_MODES[:2],
                   help="initial states: optimization or backcasting")
    f.add_argument("--level", type=float, default=0.95)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--output", "-o", help="write the model file here")
    f.set_defaults(func=cmd_fit)

    fc = sub.add_parser("forecast", help="forecast from a saved model")
    fc.add_argument("model_file")
    fc.add_argument("--h", type=int, required=True)
    fc.add_argument("--level", type=float, default=0.95)
    fc.add_argument("--side", choices=SIDES, default="both")
    fc.add_argument("--cumulative", action="store_true")
    fc.add_argument("--seed", type=int, default=0)
    fc.add_argument("--paths", type=int, default=10000)
    fc.add_argument("--output", "-o")
    fc.set_defaults(func=cmd_forecast)

    d = sub.add_parser("decompose", help="multiple seasonal decomposition")
    d.add_argument("input")
    d.add_argument("--column")
    d.add_argument("--lags", default="1,12")
    d.add_argument("--type", choices=("additive", "multiplicative"), default="additive")
    d.add_argument("--output", "-o")
    d.set_defaults(func=cmd_decompose)

    s = sub.add_parser("simulate", help="simulate series from a model")
    s.add_argument("--model", help="ETS spec such as 'ETS(A,N,A)' or 'arima'")
    s.add_argument("--from-model", help="saved model file to simulate from")
    s.add_argument("--period", type=int, default=1, help="seasonal period for ETS")
    s.add_argument("--orders")
    s.add_argument("--orders-lags")
    s.add_argument("--params", help="JSON object of parameter values")
    s.add_argument("--obs", type=int, required=True)
    s.add_argument("--nsim", type=int, default=1)
    s.add_argument("--seed", type=int)
    s.add_argument("--randomizer", default="normal", choices=sorted(RANDOMIZERS))
    s.add_argument("--randomizer-params", help="JSON object, e.g. '{\"sd\": 2}'")
    s.add_argument("--format", choices=("long", "wide"), default="long")
    s.add_argument("--output", "-o", help="file (long) or directory (wide)")
    s.set_defaults(func=cmd_simulate)

    b = sub.add_parser("benchmark", help="holdout benchmark over a manifest")
    b.add_argument("--manifest", help="manifest JSON (default: bundled synthetic corpus)")
    b.add_argument("--models", default=",".join(DEFAULT_MODELS),
                   help=f"comma list from {', '.join(sorted(MODELS))}")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--level", type=float, default=0.95)
    b.add_argument("--paths", type=int, default=10000)
    b.add_argument("--ic", choices=CRITERIA, default="AICc")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--seasonal-scale", action="store_true",
                   help="scale errors by the seasonal naive method")
    b.add_argument("--sort", default="model", choices=("model",) + COLUMNS)
    b.add_argument("--descending", action="store_true")
    b.add_argument("--output-dir")
    b.set_defaults(func=cmd_benchmark)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except (InputError, SpecificationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (EstimationError, GenerationError) as exc:
        print(f"estimation failed: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except BrokenPipeError:  # output piped into head and the like
        sys.stdout = open(os.devnull, "w")
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
