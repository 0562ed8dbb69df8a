"""Univariate forecasting with lagged single-source-of-error state-space models."""

__version__ = "0.1.0"

from .arima import (
    ArimaOrders,
    SmaSpec,
    expand_polynomials,
    fit_arima,
    naive_model,
    select_arima_orders,
    select_sma_order,
    sma_model,
)
from .core import StateSpaceModel, TimeSeries, backcast_initialize, fit_pass, generate, lagged_state
from .decompose import decompose_forecast, msdecompose
from .errors import (
    EstimationError,
    FormatError,
    GenerationError,
    InputError,
    SpecificationError,
    SsoeError,
    StructuralError,
)
from .estimation import EstimationConfig, FitResult, information_criteria
from .ets import EtsSpec, EtsState, PersistenceParams, build_ets, fit_ets, select_ets
from .forecasting import ForecastResult, analytic_interval, point_forecast, prediction_interval
from .metrics import aggregate, coverage, mase, rmsse, smis
from .simulate import SimulationSpec, simulate_from_fitted, simulate_series
