"""Rolling covariance, variance and volatility built on the trend operator."""

import numpy as np

from ..utils.errors import GridMismatch
from ..utils.logger import get_logger
from .schemas import MomentSeries, SeriesRole, TimeSeries, WindowSpec
from .series_core import trend

logger = get_logger(__name__)


def rolling_cov(X: TimeSeries, Y: TimeSeries, w: WindowSpec) -> MomentSeries:
    """cov(X, Y) = E(XY) - E(X) E(Y), every E sharing the window ``w``.

    The product of the fluctuations is kept inside E(XY); it need not fluctuate
    away.
    """
    if X.grid != Y.grid:
        raise GridMismatch("covariance needs both series on one grid")
    product = X.derive(X.values * Y.values, SeriesRole.GENERIC, warmup=max(X.warmup, Y.warmup))
    joint = trend(product, w)
    values = joint.values - trend(X, w).values * trend(Y, w).values
    return MomentSeries(
        grid=X.grid,
        values=values,
        role=SeriesRole.GENERIC,
        warmup=joint.warmup,
        name=X.name,
        window=w,
    )


def rolling_var(X: TimeSeries, w: WindowSpec) -> MomentSeries:
    """var(X) = E(X^2) - E(X)^2, clamped at zero."""
    squares = trend(X.derive(X.values * X.values, SeriesRole.GENERIC), w)
    values = squares.values - trend(X, w).values ** 2
    negative = values < 0
    clamped = int(np.count_nonzero(negative))
    if clamped:
        logger.debug("clamped %d negative variances (min %.3e)", clamped, values.min())
        values = np.where(negative, 0.0, values)
    return MomentSeries(
        grid=X.grid,
        values=values,
        role=SeriesRole.GENERIC,
        warmup=squares.warmup,
        name=X.name,
        window=w,
        clamped=clamped,
    )


def volatility(X: TimeSeries, w: WindowSpec) -> MomentSeries:
    """Volatility time series sqrt(var(X))."""
    variance = rolling_var(X, w)
    return variance.model_copy(
        update={"values": _readonly(np.sqrt(variance.values)), "role": SeriesRole.VOLATILITY}
    )


def _readonly(values: np.ndarray) -> np.ndarray:
    values.setflags(write=False)
    return values
