"""Quadrature, sliding-window (iterated) averages and trend decomposition.

The integral of a series over ``[a, b]`` is the left Riemann sum
``sum(X(t_i) * step)`` over grid points ``t_i`` in ``[a, b)``. A window ending
at grid time ``t_j`` therefore covers samples ``j - m .. j - 1``.

Iterated averages are evaluated in window-local coordinates
``s = (t - tau) / L``, which lie in ``(0, 1]``:

    iterated_average(X, nu)(L, t) = L^(nu-1) / (nu-1)! * mean(s^(nu-1) * X)
"""

from math import comb, factorial
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..utils.errors import EmptySeries, NonPositivePrice, OutOfRange, WindowUnderflow
from ..utils.logger import get_logger
from .schemas import IterOrder, ReturnKind, SeriesRole, TimeSeries, WindowSpec

logger = get_logger(__name__)


def integrate(series: TimeSeries, a: float, b: float) -> float:
    """Left Riemann sum of ``series`` over ``[a, b)``; both bounds must be grid times."""
    grid = series.grid
    i0 = grid.index_of(a)
    i1 = grid.index_of(b)
    if i0 > i1:
        raise OutOfRange(f"integration bounds reversed: [{a}, {b}]")
    return float(np.sum(series.values[i0:i1]) * grid.step)


def window_end(series: TimeSeries, w: WindowSpec, t: float, allow_warmup: bool = False) -> int:
    """Grid index ``j`` of a full window ending at ``t``.

    Raises ``WindowUnderflow`` when ``t - L`` precedes the grid start or, unless
    ``allow_warmup``, when the window reaches into the warm-up region.
    """
    j = series.grid.index_of(t)
    first = j - w.length_samples
    if first < 0:
        raise WindowUnderflow(
            f"window of {w.length_samples} samples ending at t={t} starts before the grid"
        )
    if not allow_warmup and first < series.warmup:
        raise WindowUnderflow(
            f"window of {w.length_samples} samples ending at t={t} overlaps "
            f"{series.warmup} warm-up samples"
        )
    return j


def window_average(
    series: TimeSeries, w: WindowSpec, t: float, allow_warmup: bool = False
) -> float:
    """Arithmetical average of ``series`` over ``[t - L, t]``."""
    j = window_end(series, w, t, allow_warmup)
    m = w.length_samples
    step = series.grid.step
    return float(np.sum(series.values[j - m : j]) * step / (m * step))


def local_moments(values: np.ndarray, end: int, m: int, count: int) -> np.ndarray:
    """``mean(s^p * X)`` for ``p = 0 .. count - 1`` over samples ``end - m .. end - 1``."""
    s = np.arange(m, 0, -1, dtype=np.float64) / m
    powers = s[None, :] ** np.arange(count)[:, None]
    return powers @ values[end - m : end] / m


def iterated_scale(length: float, nu: int) -> float:
    """``L^(nu-1) / (nu-1)!``, the factor between local moments and iterated averages."""
    return float(length ** (nu - 1) / factorial(nu - 1))


def iterated_average(
    series: TimeSeries,
    nu: IterOrder,
    w: WindowSpec,
    t: float,
    allow_warmup: bool = False,
) -> float:
    """Cauchy iterated integral of order ``nu`` over the window, divided by ``L``."""
    if nu.nu == 1:
        return window_average(series, w, t, allow_warmup)
    j = window_end(series, w, t, allow_warmup)
    m = w.length_samples
    moment = local_moments(series.values, j, m, nu.nu)[-1]
    return float(moment * iterated_scale(w.length(series.grid), nu.nu))


class SlidingMomentTable:
    """Prefix sums giving every window's local moments in O(1) per window.

    Samples are grouped in blocks of ``m`` anchored at ``b * m``; each block keeps
    cumulative sums of ``u^c * X`` with ``u = (i - anchor) / m`` over the
    ``2m`` samples around its anchor. A window ending at ``j`` lies inside the
    range of block ``j // m``, and

        sum(((j - i) / m)^p * X_i) = sum_c C(p, c) d^(p-c) (-1)^c R_c

    with ``d = (j - anchor) / m``. Both ``u`` and ``d`` stay in ``[-1, 1]`` so
    no large powers of absolute time enter the sums.

    Passing ``ends`` builds only the blocks those windows need; a single window
    then costs O(m) and yields the same digits as a full table. The table is
    read-only after construction and may be shared between workers.
    """

    def __init__(
        self,
        values: np.ndarray,
        m: int,
        max_power: int,
        ends: Optional[Sequence[int] | np.ndarray] = None,
    ) -> None:
        if m < 1:
            raise ValueError("window must cover at least one sample")
        x = np.asarray(values, dtype=np.float64)
        self._m = m
        self._max_power = max_power
        self._size = x.shape[0]
        self._blocks: Dict[int, Tuple[int, np.ndarray]] = {}
        if ends is None:
            wanted = range(self._size // m + 1)
        else:
            wanted = sorted({int(j) // m for j in np.asarray(ends, dtype=np.int64)})
        orders = np.arange(max_power + 1)[:, None]
        for block in wanted:
            anchor = block * m
            lo = max(0, anchor - m)
            hi = min(self._size, anchor + m)
            u = (np.arange(lo, hi, dtype=np.float64) - anchor) / m
            cumulative = np.zeros((max_power + 1, hi - lo + 1))
            cumulative[:, 1:] = np.cumsum(u[None, :] ** orders * x[lo:hi], axis=1)
            self._blocks[block] = (lo, cumulative)

    @property
    def window(self) -> int:
        return self._m

    def moments(self, ends: Sequence[int] | np.ndarray) -> np.ndarray:
        """Local moments ``mean(s^p * X)``, ``p = 0..max_power``, one row per window end."""
        ends = np.asarray(ends, dtype=np.int64)
        m = self._m
        if ends.size and (ends.min() < m or ends.max() > self._size):
            raise WindowUnderflow(f"window ends must lie in [{m}, {self._size}]")
        result = np.empty((ends.size, self._max_power + 1))
        blocks = ends // m
        for block in np.unique(blocks):
            if int(block) not in self._blocks:
                raise ValueError(f"block {int(block)} was not built for this table")
            selected = np.nonzero(blocks == block)[0]
            lo, cumulative = self._blocks[int(block)]
            j = ends[selected]
            raw = cumulative[:, j - lo] - cumulative[:, j - m - lo]
            d = (j - block * m) / m
            d_powers = [np.ones(selected.size)]
            for _ in range(self._max_power):
                d_powers.append(d_powers[-1] * d)
            for p in range(self._max_power + 1):
                total = np.zeros(selected.size)
                for c in range(p + 1):
                    total += comb(p, c) * d_powers[p - c] * (-1) ** c * raw[c]
                result[selected, p] = total / m
        return result


def trend(series: TimeSeries, w: WindowSpec) -> TimeSeries:
    """Trailing window mean E(X), entry ``j`` being ``window_average`` at ``t_j``.

    Entry ``j`` averages samples ``j - m .. j - 1``. The first ``m`` entries use
    the partial window available (entry 0 repeats the first sample) and are
    flagged as warm-up.
    """
    m = w.length_samples
    if series.grid.count < m:
        raise EmptySeries(f"series of {series.grid.count} samples is shorter than window {m}")
    rolled = pd.Series(series.values).rolling(window=m, min_periods=1).mean()
    values = rolled.shift(1, fill_value=float(series.values[0])).to_numpy()
    return series.derive(values, SeriesRole.TREND, warmup=series.warmup + m)


def fluctuation(series: TimeSeries, w: WindowSpec) -> TimeSeries:
    """Quick fluctuations ``X - E(X)``."""
    mean = trend(series, w)
    return series.derive(series.values - mean.values, SeriesRole.FLUCTUATION, warmup=mean.warmup)


def decompose(series: TimeSeries, w: WindowSpec) -> Tuple[TimeSeries, TimeSeries]:
    """Additive decomposition ``X = E(X) + X_fluctuat``."""
    mean = trend(series, w)
    quick = series.derive(series.values - mean.values, SeriesRole.FLUCTUATION, warmup=mean.warmup)
    return mean, quick


def returns(prices: TimeSeries, kind: ReturnKind = ReturnKind.SIMPLE) -> TimeSeries:
    """Per-step returns, one sample shorter than ``prices``.

    Return ``i`` is stamped at the time of price ``i + 1``.
    """
    p = prices.values
    if p.shape[0] < 2:
        raise EmptySeries("returns need at least two prices")
    bad = np.nonzero(p <= 0)[0]
    if bad.size:
        raise NonPositivePrice(f"non-positive price {p[bad[0]]} at index {bad[0]}", row=int(bad[0]))
    if kind is ReturnKind.LOG:
        values = np.log(p[1:] / p[:-1])
    else:
        values = (p[1:] - p[:-1]) / p[:-1]
    return prices.derive(
        values,
        SeriesRole.RETURN,
        warmup=max(0, prices.warmup - 1),
        grid=prices.grid.shifted(1),
    )
