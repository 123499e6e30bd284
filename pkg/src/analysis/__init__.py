"""Analysis Package."""

from .beta_engine import (
    estimate_alpha_betas,
    estimate_betas,
    multiwindow_estimate,
    rolling_estimate,
    rolling_multiwindow_estimate,
    rolling_ratio_beta,
    volatility_beta,
)
from .moments import rolling_cov, rolling_var, volatility
from .schemas import (
    BetaEstimate,
    FactorPanel,
    IndependenceThreshold,
    ModelKind,
    SamplingGrid,
    TimeSeries,
    WindowSpec,
)
from .series_core import fluctuation, returns, trend

__all__ = [
    "BetaEstimate",
    "FactorPanel",
    "IndependenceThreshold",
    "ModelKind",
    "SamplingGrid",
    "TimeSeries",
    "WindowSpec",
    "estimate_alpha_betas",
    "estimate_betas",
    "fluctuation",
    "multiwindow_estimate",
    "returns",
    "rolling_cov",
    "rolling_estimate",
    "rolling_multiwindow_estimate",
    "rolling_ratio_beta",
    "rolling_var",
    "trend",
    "volatility",
    "volatility_beta",
]
