"""Data schemas for the estimation core."""

import math
from enum import Enum
from typing import Any, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..utils.errors import NotOnGrid, OutOfRange


class SeriesRole(str, Enum):
    """What a series stands for."""
    PRICE = "price"
    RETURN = "return"
    TREND = "trend"
    FLUCTUATION = "fluctuation"
    VOLATILITY = "volatility"
    GENERIC = "generic"


class ReturnKind(str, Enum):
    """Return definitions."""
    SIMPLE = "simple"
    LOG = "log"


class ModelKind(str, Enum):
    """Windowed model: intercept plus betas, betas alone, or the one-factor trend ratio."""
    WITH_ALPHA = "with_alpha"
    BETAS_ONLY = "betas_only"
    RATIO = "ratio"


class SeriesMode(str, Enum):
    """Comparison channel used by the beta commands."""
    VALUE = "value"
    RETURN = "return"
    VOLATILITY = "volatility"


class SamplingGrid(BaseModel):
    """Uniform time grid ``start + i * step`` for ``i = 0 .. count - 1``."""

    model_config = ConfigDict(frozen=True)

    start: float = Field(default=0.0, description="Time of index 0")
    step: float = Field(..., gt=0, description="Sampling step")
    count: int = Field(..., ge=1, description="Number of samples")

    @field_validator("start", "step")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("grid start and step must be finite")
        return value

    @property
    def end(self) -> float:
        """Time of the last sample."""
        return self.time_at(self.count - 1)

    def time_at(self, index: int) -> float:
        """Time of sample ``index``."""
        return self.start + index * self.step

    def times(self) -> np.ndarray:
        """All sample times."""
        return self.start + np.arange(self.count) * self.step

    def index_of(self, t: float) -> int:
        """Index of grid time ``t``.

        Raises ``NotOnGrid`` when ``t`` falls between samples and ``OutOfRange``
        when it lies outside the grid.
        """
        position = (t - self.start) / self.step
        index = round(position)
        if abs(position - index) > 1e-9 * max(1.0, abs(position)):
            raise NotOnGrid(f"time {t} is not a grid point (step {self.step}, start {self.start})")
        if index < 0 or index >= self.count:
            raise OutOfRange(f"time {t} outside grid [{self.start}, {self.end}]")
        return int(index)

    def shifted(self, samples: int) -> "SamplingGrid":
        """Grid with the first ``samples`` points removed."""
        return SamplingGrid(
            start=self.time_at(samples), step=self.step, count=self.count - samples
        )


class WindowSpec(BaseModel):
    """Sliding window of ``length_samples`` steps, i.e. ``L = m * step``."""

    model_config = ConfigDict(frozen=True)

    length_samples: int = Field(..., ge=1, description="Window length m in samples")

    def length(self, grid: SamplingGrid) -> float:
        """Window length L in time units."""
        return self.length_samples * grid.step


class IterOrder(BaseModel):
    """Order of an iterated window average."""

    model_config = ConfigDict(frozen=True)

    nu: int = Field(..., ge=1)


class TimeSeries(BaseModel):
    """Finite values sampled on a uniform grid.

    ``warmup`` counts leading samples computed from partial windows; estimators
    refuse windows that touch them.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: SamplingGrid
    values: np.ndarray
    role: SeriesRole = SeriesRole.GENERIC
    warmup: int = Field(default=0, ge=0)
    name: Optional[str] = None

    @field_validator("values", mode="before")
    @classmethod
    def _as_array(cls, value: Any) -> np.ndarray:
        array = np.array(value, dtype=np.float64)
        if array.ndim != 1:
            raise ValueError("series values must be one-dimensional")
        if not np.all(np.isfinite(array)):
            raise ValueError("series values must be finite")
        array.setflags(write=False)
        return array

    @model_validator(mode="after")
    def _length_matches_grid(self) -> "TimeSeries":
        if self.values.shape[0] != self.grid.count:
            raise ValueError(
                f"series has {self.values.shape[0]} values but grid has {self.grid.count} samples"
            )
        return self

    def __len__(self) -> int:
        return self.grid.count

    def derive(
        self,
        values: np.ndarray,
        role: SeriesRole,
        warmup: Optional[int] = None,
        grid: Optional[SamplingGrid] = None,
    ) -> "TimeSeries":
        """New series on the same grid (unless given) keeping the name."""
        return TimeSeries(
            grid=grid or self.grid,
            values=values,
            role=role,
            warmup=self.warmup if warmup is None else warmup,
            name=self.name,
        )


class MomentSeries(TimeSeries):
    """Rolling second-moment series (covariance, variance, volatility)."""

    window: WindowSpec
    clamped: int = Field(default=0, ge=0, description="Negative variances clamped to zero")


class FactorPanel(BaseModel):
    """Target series Y and factors X_1..X_n on one shared grid."""

    model_config = ConfigDict(frozen=True)

    target: TimeSeries
    factors: List[TimeSeries] = Field(..., min_length=1)

    @model_validator(mode="after")
    def _shared_grid(self) -> "FactorPanel":
        for factor in self.factors:
            if factor.grid != self.target.grid:
                raise ValueError("target and factors must share one sampling grid")
        return self

    @property
    def grid(self) -> SamplingGrid:
        return self.target.grid

    @property
    def n(self) -> int:
        """Number of factors."""
        return len(self.factors)

    @property
    def warmup(self) -> int:
        """Largest warm-up region among the member series."""
        return max(series.warmup for series in (self.target, *self.factors))

    def permuted(self, order: List[int]) -> "FactorPanel":
        """Panel with factors reordered."""
        return FactorPanel(target=self.target, factors=[self.factors[i] for i in order])


class IndependenceThreshold(BaseModel):
    """Numeric surrogate for an appreciable determinant: ``|det| >= epsilon * scale``."""

    model_config = ConfigDict(frozen=True)

    epsilon: float = Field(default=1e-8, gt=0)

    def accepts(self, determinant: float, scale: float) -> bool:
        """A zero scale (some column vanishes) is never independent."""
        return scale > 0 and abs(determinant) >= self.epsilon * scale


class DesignMatrix(BaseModel):
    """Iterated window averages at (L, t).

    ``entries`` holds window-local moments, row k (k = 1..K) being
    ``mean(s^(k-1) * X)`` with ``s = (t - tau) / L``. The iterated averages are
    ``row_scales[k] * entries[k]`` with ``row_scales[k] = L^(k-1) / (k-1)!``.
    Column order is (Y, 1, X_1..X_n) with alpha and (Y, X_1..X_n) without.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    entries: np.ndarray
    row_scales: np.ndarray
    kind: ModelKind
    window: WindowSpec
    at: float
    index: int

    @model_validator(mode="after")
    def _shape(self) -> "DesignMatrix":
        rows, cols = self.entries.shape
        if cols != rows + 1 or self.row_scales.shape != (rows,):
            raise ValueError(f"design matrix must be K x (K + 1), got {rows} x {cols}")
        return self

    @property
    def values(self) -> np.ndarray:
        """Iterated averages in time units."""
        return self.row_scales[:, None] * self.entries

    @property
    def wronskian_block(self) -> np.ndarray:
        """Local square block without the Y column."""
        return self.entries[:, 1:]

    @property
    def target_column(self) -> np.ndarray:
        return self.entries[:, 0]


class BetaEstimate(BaseModel):
    """Coefficients identified on one window ending at ``at``."""

    model_config = ConfigDict(frozen=True)

    kind: ModelKind
    alpha: Optional[float] = None
    betas: List[float] = Field(default_factory=list)
    wronskian: float
    scale: float = Field(..., ge=0)
    window: WindowSpec
    at: float
    index: int
    independent: bool
    residual_integral: Optional[float] = None
    residual_moment: Optional[float] = None

    @model_validator(mode="after")
    def _coefficients_consistent(self) -> "BetaEstimate":
        if not self.independent:
            if self.alpha is not None or self.betas:
                raise ValueError("a non-independent estimate carries no coefficients")
            return self
        if (self.alpha is not None) != (self.kind is ModelKind.WITH_ALPHA):
            raise ValueError("alpha is present exactly for the with-alpha model")
        coefficients = self.betas + ([self.alpha] if self.alpha is not None else [])
        if not self.betas or not all(math.isfinite(c) for c in coefficients):
            raise ValueError("independent estimates carry finite coefficients")
        return self

    @property
    def conditioning(self) -> float:
        """|wronskian| / scale, in [0, 1] by Hadamard's inequality."""
        return abs(self.wronskian) / self.scale if self.scale > 0 else 0.0
