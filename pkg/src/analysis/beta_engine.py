"""Time-varying alpha and betas from Wronskian-like determinants.

On the window ``[t - L, t]`` the target is matched against the factors through
the windowed linear relation

    mean(Y) = alpha + beta_1 mean(X_1) + ... + beta_n mean(X_n)

Stacking iterated averages of orders 1..K (K = n + 1 with alpha, K = n
without) gives a K x K system solved by Cramer's rule. Rows are built from
window-local moments: every row of an iterated-average system carries the same
factor ``L^(k-1) / (k-1)!`` in every column, so determinant ratios are
unchanged while the entries stay of order one.
"""

from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..utils.errors import (
    AllDegenerate,
    EmptySeries,
    EstimateMismatch,
    GridMismatch,
    NotIndependent,
    NotOnGrid,
    OutOfRange,
    WindowUnderflow,
    ZeroBeta,
    ZeroDenominator,
)
from ..utils.logger import get_logger
from .linalg import (
    batched_cramer_numerators,
    batched_determinants,
    column_norm_product,
    cramer_solve,
    lu_determinant,
)
from .moments import volatility
from .schemas import (
    BetaEstimate,
    DesignMatrix,
    FactorPanel,
    IndependenceThreshold,
    ModelKind,
    TimeSeries,
    WindowSpec,
)
from .series_core import SlidingMomentTable, iterated_scale, local_moments, trend, window_end

logger = get_logger(__name__)

DEFAULT_THRESHOLD = IndependenceThreshold()

# relative size below which a ratio denominator counts as zero
RATIO_FLOOR = 64 * float(np.finfo(np.float64).eps)


def system_size(n: int, kind: ModelKind) -> int:
    """Number of unknowns (and rows) of the windowed system."""
    if kind is ModelKind.RATIO:
        raise ValueError("the ratio model has no determinant system; use rolling_ratio_beta")
    return n + 1 if kind is ModelKind.WITH_ALPHA else n


def _row_scales(length: float, rows: int) -> np.ndarray:
    return np.array([iterated_scale(length, k) for k in range(1, rows + 1)])


def _check_identifiable(panel: FactorPanel, w: WindowSpec, rows: int) -> None:
    if rows > w.length_samples:
        raise WindowUnderflow(
            f"a window of {w.length_samples} samples cannot identify {rows} coefficients"
        )


def _columns(panel: FactorPanel, kind: ModelKind) -> List[np.ndarray]:
    """Series values in design-matrix column order."""
    columns = [panel.target.values]
    if kind is ModelKind.WITH_ALPHA:
        columns.append(np.ones(panel.grid.count))
    columns.extend(factor.values for factor in panel.factors)
    return columns


def _panel_window_end(panel: FactorPanel, w: WindowSpec, t: float) -> int:
    j = window_end(panel.target, w, t, allow_warmup=True)
    if j - w.length_samples < panel.warmup:
        raise WindowUnderflow(f"window ending at t={t} overlaps the panel warm-up region")
    return j


def _window_systems(
    panel: FactorPanel, w: WindowSpec, kind: ModelKind, ends: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Local moments of the windows ending at ``ends``.

    Returns the target columns ``(T, K)`` and the square blocks ``(T, K, K)``.
    Single windows and rolling sweeps both read the block prefix sums, so a
    point estimate reproduces the rolling row at the same time digit for digit.
    """
    rows = system_size(panel.n, kind)
    m = w.length_samples
    local = [
        SlidingMomentTable(col, m, rows - 1, ends=ends).moments(ends) for col in _columns(panel, kind)
    ]
    return local[0], np.stack(local[1:], axis=-1)


def _solve_systems(
    panel: FactorPanel,
    w: WindowSpec,
    kind: ModelKind,
    ends: np.ndarray,
    targets: np.ndarray,
    blocks: np.ndarray,
    thr: IndependenceThreshold,
) -> List[BetaEstimate]:
    """Determinants, independence tests and Cramer solves for a stack of windows."""
    magnitude = float(np.prod(_row_scales(w.length(panel.grid), system_size(panel.n, kind))))
    dets = batched_determinants(blocks)
    wronskians = dets * magnitude
    scales = np.asarray(column_norm_product(blocks)) * magnitude
    numerators = batched_cramer_numerators(blocks, targets)

    estimates = []
    for row, j in enumerate(ends):
        independent = thr.accepts(float(wronskians[row]), float(scales[row]))
        alpha: Optional[float] = None
        betas: List[float] = []
        if independent:
            solution = (numerators[row] / dets[row]).tolist()
            if kind is ModelKind.WITH_ALPHA:
                alpha, betas = solution[0], solution[1:]
            else:
                betas = solution
        estimates.append(
            BetaEstimate(
                kind=kind,
                alpha=alpha,
                betas=betas,
                wronskian=float(wronskians[row]),
                scale=float(scales[row]),
                window=w,
                at=panel.grid.time_at(int(j)),
                index=int(j),
                independent=independent,
            )
        )
    return estimates


def design_matrix(panel: FactorPanel, w: WindowSpec, t: float, kind: ModelKind) -> DesignMatrix:
    """Iterated window averages at (L, t)."""
    rows = system_size(panel.n, kind)
    _check_identifiable(panel, w, rows)
    j = _panel_window_end(panel, w, t)
    targets, blocks = _window_systems(panel, w, kind, np.array([j]))
    return DesignMatrix(
        entries=np.column_stack([targets[0], blocks[0]]),
        row_scales=_row_scales(w.length(panel.grid), rows),
        kind=kind,
        window=w,
        at=panel.grid.time_at(j),
        index=j,
    )


def _solve(panel: FactorPanel, dm: DesignMatrix, thr: IndependenceThreshold) -> BetaEstimate:
    ends = np.array([dm.index])
    return _solve_systems(
        panel, dm.window, dm.kind, ends, dm.target_column[None, :], dm.wronskian_block[None, :, :], thr
    )[0]


def _wronskian(panel: FactorPanel, w: WindowSpec, t: float, kind: ModelKind) -> float:
    return _solve(panel, design_matrix(panel, w, t, kind), DEFAULT_THRESHOLD).wronskian


def wronskian_with_one(panel: FactorPanel, w: WindowSpec, t: float) -> float:
    """Determinant of the (n+1) x (n+1) iterated averages of (1, X_1, ..., X_n)."""
    return _wronskian(panel, w, t, ModelKind.WITH_ALPHA)


def wronskian(panel: FactorPanel, w: WindowSpec, t: float) -> float:
    """Determinant of the n x n iterated averages of (X_1, ..., X_n)."""
    return _wronskian(panel, w, t, ModelKind.BETAS_ONLY)


def point_estimate(
    panel: FactorPanel,
    w: WindowSpec,
    t: float,
    kind: ModelKind,
    thr: IndependenceThreshold = DEFAULT_THRESHOLD,
) -> BetaEstimate:
    """Estimate at one time; a degenerate window yields ``independent=False``."""
    return _solve(panel, design_matrix(panel, w, t, kind), thr)


def _require_independent(estimate: BetaEstimate, thr: IndependenceThreshold) -> BetaEstimate:
    if not estimate.independent:
        raise NotIndependent(
            f"|W| = {abs(estimate.wronskian):.3e} below {thr.epsilon:g} x scale "
            f"{estimate.scale:.3e} at t={estimate.at}",
            at=estimate.at,
        )
    return estimate


def estimate_alpha_betas(
    panel: FactorPanel,
    w: WindowSpec,
    t: float,
    thr: IndependenceThreshold = DEFAULT_THRESHOLD,
) -> BetaEstimate:
    """alpha and beta_1..beta_n by Cramer's rule on the with-intercept system."""
    return _require_independent(point_estimate(panel, w, t, ModelKind.WITH_ALPHA, thr), thr)


def estimate_betas(
    panel: FactorPanel,
    w: WindowSpec,
    t: float,
    thr: IndependenceThreshold = DEFAULT_THRESHOLD,
) -> BetaEstimate:
    """beta_1..beta_n by Cramer's rule without intercept."""
    return _require_independent(point_estimate(panel, w, t, ModelKind.BETAS_ONLY, thr), thr)


def _check_estimate(panel: FactorPanel, est: BetaEstimate) -> int:
    try:
        j = panel.grid.index_of(est.at)
    except (NotOnGrid, OutOfRange) as exc:
        raise EstimateMismatch(f"estimate time {est.at} is not on the panel grid") from exc
    if j != est.index or j < est.window.length_samples:
        raise EstimateMismatch(f"estimate window ending at {est.at} does not fit the panel grid")
    if len(est.betas) != panel.n:
        raise EstimateMismatch(f"estimate has {len(est.betas)} betas, panel has {panel.n} factors")
    return j


def _residual(panel: FactorPanel, est: BetaEstimate) -> np.ndarray:
    if not est.independent:
        raise NotIndependent("a degenerate estimate has no residual", at=est.at)
    j = _check_estimate(panel, est)
    m = est.window.length_samples
    window = slice(j - m, j)
    fitted = np.full(m, est.alpha or 0.0)
    for beta, factor in zip(est.betas, panel.factors):
        fitted = fitted + beta * factor.values[window]
    return panel.target.values[window] - fitted


def residual_integral(panel: FactorPanel, est: BetaEstimate) -> float:
    """Integral over the window of ``e = Y - alpha - sum(beta_i X_i)``."""
    e = _residual(panel, est)
    return float(np.sum(e) * panel.grid.step)


def attach_residual(panel: FactorPanel, est: BetaEstimate) -> BetaEstimate:
    """Copy of ``est`` carrying its residual diagnostics.

    ``residual_integral`` vanishes up to rounding because the order-1 row belongs
    to every system. ``residual_moment`` is the iterated average of ``e`` of the
    first order the solve did not use; it grows when the model omits a real
    component, e.g. an intercept in the betas-only fit.
    """
    e = _residual(panel, est)
    m = est.window.length_samples
    order = system_size(panel.n, est.kind) + 1
    moment = local_moments(e, m, m, order)[-1]
    scale = iterated_scale(est.window.length(panel.grid), order)
    return est.model_copy(
        update={
            "residual_integral": float(np.sum(e) * panel.grid.step),
            "residual_moment": float(moment * scale),
        }
    )


def _smoothed_integrals(series: TimeSeries, w: WindowSpec, ends: np.ndarray) -> np.ndarray:
    """Integral of the trend E(series) over each window ending at ``ends``."""
    smoothed = trend(series, w).values
    cumulative = np.concatenate([[0.0], np.cumsum(smoothed)])
    return (cumulative[ends] - cumulative[ends - w.length_samples]) * series.grid.step


def _ratio_parts(
    num: TimeSeries, den: TimeSeries, w: WindowSpec, ends: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Numerator and denominator integrals, plus ``L * max|den|`` over both windows."""
    if num.grid != den.grid:
        raise GridMismatch("ratio beta needs both series on one grid")
    m = w.length_samples
    peak = pd.Series(np.abs(den.values)).rolling(2 * m).max().to_numpy()[ends - 1]
    bound = w.length(den.grid) * peak
    return _smoothed_integrals(num, w, ends), _smoothed_integrals(den, w, ends), bound


def monofactor_ratio_beta(num: TimeSeries, den: TimeSeries, w: WindowSpec, t: float) -> float:
    """Ratio of window integrals of the trends of ``num`` and ``den``.

    Both series are first smoothed by the trailing window average, then the
    smoothed series are integrated over ``[t - L, t]``.
    """
    if num.grid != den.grid:
        raise GridMismatch("ratio beta needs both series on one grid")
    m = w.length_samples
    j = num.grid.index_of(t)
    if j - 2 * m < max(num.warmup, den.warmup):
        raise WindowUnderflow(f"ratio beta at t={t} needs {2 * m} samples of history")
    numerator, denominator, bound = _ratio_parts(num, den, w, np.array([j]))
    if abs(denominator[0]) <= RATIO_FLOOR * bound[0]:
        raise ZeroDenominator(f"double window integral of the denominator vanishes at t={t}")
    return float(numerator[0] / denominator[0])


def rolling_ratio_beta(
    panel: FactorPanel,
    w: WindowSpec,
    thr: IndependenceThreshold = DEFAULT_THRESHOLD,
) -> List[BetaEstimate]:
    """``monofactor_ratio_beta`` of the target against its single factor at every time.

    Each estimate stores the denominator integral as ``wronskian`` and
    ``L * max|X|`` over the two windows as ``scale``, so ``conditioning`` stays
    in [0, 1]. Vanishing denominators are kept as ``independent=False`` gaps.
    """
    if panel.n != 1:
        raise ValueError(f"the ratio beta takes exactly one factor, got {panel.n}")
    m = w.length_samples
    count = panel.grid.count
    first = 2 * m + panel.warmup
    if first >= count:
        raise EmptySeries(
            f"{count} samples leave no two windows of {m} samples "
            f"after {panel.warmup} warm-up samples"
        )
    ends = np.arange(first, count)
    numerators, denominators, bounds = _ratio_parts(panel.target, panel.factors[0], w, ends)

    estimates = []
    for row, j in enumerate(ends):
        den, bound = float(denominators[row]), float(bounds[row])
        independent = thr.accepts(den, bound) and abs(den) > RATIO_FLOOR * bound
        estimates.append(
            BetaEstimate(
                kind=ModelKind.RATIO,
                betas=[float(numerators[row]) / den] if independent else [],
                wronskian=den,
                scale=bound,
                window=w,
                at=panel.grid.time_at(int(j)),
                index=int(j),
                independent=independent,
            )
        )
    logger.debug("rolling ratio beta: window %d, %d points", m, len(estimates))
    return estimates


def reverse_monofactor(alpha: float, beta: float) -> Tuple[float, float]:
    """Invert ``Y = alpha + beta X`` into ``X = -alpha / beta + (1 / beta) Y``."""
    if beta == 0:
        raise ZeroBeta("cannot reverse a relation with zero beta")
    return -alpha / beta, 1.0 / beta


def rolling_estimate(
    panel: FactorPanel,
    w: WindowSpec,
    kind: ModelKind = ModelKind.BETAS_ONLY,
    thr: IndependenceThreshold = DEFAULT_THRESHOLD,
) -> List[BetaEstimate]:
    """One estimate per full window, sliding over the whole panel.

    Window moments come from ``SlidingMomentTable`` prefix sums (O(1) per
    step). Degenerate windows are kept as ``independent=False`` gaps.
    """
    rows = system_size(panel.n, kind)
    _check_identifiable(panel, w, rows)
    m = w.length_samples
    count = panel.grid.count
    first = m + panel.warmup
    if count < m + panel.n or first >= count:
        raise EmptySeries(
            f"{count} samples leave no full window of {m} samples "
            f"after {panel.warmup} warm-up samples"
        )
    ends = np.arange(first, count)
    targets, blocks = _window_systems(panel, w, kind, ends)
    estimates = _solve_systems(panel, w, kind, ends, targets, blocks, thr)
    degenerate = sum(1 for est in estimates if not est.independent)
    logger.debug(
        "rolling %s estimate: window %d, %d points, %d degenerate",
        kind.value, m, len(estimates), degenerate,
    )
    return estimates


def _select(candidates: Sequence[BetaEstimate]) -> Optional[BetaEstimate]:
    """Best-conditioned independent candidate; exact ties go to the longest window."""
    usable = [est for est in candidates if est.independent]
    if not usable:
        return None
    return max(usable, key=lambda est: (est.conditioning, est.window.length_samples))


def multiwindow_estimate(
    panel: FactorPanel,
    windows: Sequence[WindowSpec],
    t: float,
    kind: ModelKind = ModelKind.BETAS_ONLY,
    thr: IndependenceThreshold = DEFAULT_THRESHOLD,
) -> BetaEstimate:
    """Estimate with the window whose determinant is best conditioned at ``t``."""
    if not windows:
        raise ValueError("at least one window is required")
    candidates = [point_estimate(panel, w, t, kind, thr) for w in windows]
    selected = _select(candidates)
    if selected is None:
        raise AllDegenerate(
            f"every window in {[w.length_samples for w in windows]} is degenerate at t={t}"
        )
    logger.debug("t=%s: selected window %d", t, selected.window.length_samples)
    return selected


def rolling_multiwindow_estimate(
    panel: FactorPanel,
    windows: Sequence[WindowSpec],
    kind: ModelKind = ModelKind.BETAS_ONLY,
    thr: IndependenceThreshold = DEFAULT_THRESHOLD,
) -> List[BetaEstimate]:
    """Rolling estimates with per-time window selection.

    Evaluation starts where the longest window is full. Each selected entry is
    the rolling estimate of its window, unchanged; times where every window is
    degenerate keep the longest window's flagged estimate.
    """
    if not windows:
        raise ValueError("at least one window is required")
    longest = max(windows, key=lambda w: w.length_samples)
    per_window: Dict[int, Dict[int, BetaEstimate]] = {
        w.length_samples: {est.index: est for est in rolling_estimate(panel, w, kind, thr)}
        for w in windows
    }
    selected = []
    for j in sorted(per_window[longest.length_samples]):
        candidates = [by_index[j] for by_index in per_window.values()]
        best = _select(candidates)
        selected.append(best if best is not None else per_window[longest.length_samples][j])
    return selected


def raw_moment_betas(panel: FactorPanel, w: WindowSpec, t: float) -> Tuple[List[float], float]:
    """Betas-only solve on raw window moments ``integral(tau^k X d tau)``, k = 0..n-1.

    Returns the betas and ``det(B)``. The rows are invertible combinations of
    the iterated-average rows, so the betas agree with ``estimate_betas``.
    """
    j = _panel_window_end(panel, w, t)
    m = w.length_samples
    window = slice(j - m, j)
    tau = panel.grid.times()[window]
    step = panel.grid.step
    powers = tau[None, :] ** np.arange(panel.n)[:, None]
    matrix = np.column_stack([powers @ f.values[window] * step for f in panel.factors])
    rhs = powers @ panel.target.values[window] * step
    det = lu_determinant(matrix)
    if det == 0:
        raise NotIndependent(f"raw moment matrix is singular at t={t}", at=t)
    return cramer_solve(matrix, rhs, determinant=det), det


def volatility_panel(panel: FactorPanel, w_vol: WindowSpec) -> FactorPanel:
    """Panel of the volatility time series of the target and every factor."""
    return FactorPanel(
        target=volatility(panel.target, w_vol),
        factors=[volatility(factor, w_vol) for factor in panel.factors],
    )


def volatility_beta(
    panel: FactorPanel,
    w_vol: WindowSpec,
    w_beta: WindowSpec,
    kind: ModelKind = ModelKind.BETAS_ONLY,
    thr: IndependenceThreshold = DEFAULT_THRESHOLD,
) -> List[BetaEstimate]:
    """Rolling betas between volatility time series."""
    return rolling_estimate(volatility_panel(panel, w_vol), w_beta, kind, thr)
