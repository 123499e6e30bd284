"""CSV price loading, validation and date alignment."""

import datetime as dt
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..analysis.schemas import (
    FactorPanel,
    ReturnKind,
    SamplingGrid,
    SeriesMode,
    SeriesRole,
    TimeSeries,
)
from ..analysis.series_core import returns
from ..utils.errors import (
    EmptyIntersection,
    EmptySeries,
    InputNotFound,
    NonMonotonicDates,
    NonPositivePrice,
    ParseError,
)
from ..utils.logger import get_logger

logger = get_logger(__name__)

DATE_COLUMN = "date"
# plain decimal or scientific notation; no thousands separators, no inf/nan
DECIMAL_PATTERN = r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"


class PriceRecord(BaseModel):
    """One dated observation."""

    model_config = ConfigDict(frozen=True)

    date: dt.date
    value: float = Field(..., gt=0, allow_inf_nan=False)


class Dataset(BaseModel):
    """Date-sorted observations of one instrument."""

    model_config = ConfigDict(frozen=True)

    name: str
    records: List[PriceRecord]

    @model_validator(mode="after")
    def _strictly_increasing(self) -> "Dataset":
        for previous, current in zip(self.records, self.records[1:]):
            if current.date <= previous.date:
                raise ValueError(f"dates must be strictly increasing (at {current.date})")
        return self

    @property
    def dates(self) -> List[dt.date]:
        return [record.date for record in self.records]

    @property
    def values(self) -> np.ndarray:
        return np.array([record.value for record in self.records], dtype=np.float64)

    def to_series(self) -> pd.Series:
        """Values indexed by date, named after the dataset."""
        return pd.Series(self.values, index=pd.Index(self.dates, name=DATE_COLUMN), name=self.name)


class AlignedTable(BaseModel):
    """Datasets restricted to their common dates, one column per dataset.

    Row ``i`` sits at time ``i`` on a unit-step grid (one step per trading day).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    frame: pd.DataFrame
    dropped: Dict[str, List[dt.date]] = Field(default_factory=dict)

    @field_validator("frame")
    @classmethod
    def _nonempty(cls, frame: pd.DataFrame) -> pd.DataFrame:
        if frame.empty:
            raise ValueError("aligned table is empty")
        return frame

    @property
    def dates(self) -> List[dt.date]:
        return list(self.frame.index)

    @property
    def grid(self) -> SamplingGrid:
        return SamplingGrid(start=0.0, step=1.0, count=len(self.frame))

    def date_at(self, t: float) -> dt.date:
        """Date of grid time ``t``."""
        return self.frame.index[self.grid.index_of(t)]

    def series(self, name: str, role: SeriesRole = SeriesRole.PRICE) -> TimeSeries:
        return TimeSeries(
            grid=self.grid, values=self.frame[name].to_numpy(), role=role, name=name
        )


def _line(position: int) -> int:
    """File line of data row ``position`` (the header is line 1)."""
    return position + 2


def load_csv(path: str | Path, column: str, name: Optional[str] = None) -> Dataset:
    """Load one value column of a dated CSV file.

    Rows may come in any date order; they are sorted ascending. Duplicated
    dates, unparseable cells, missing values and non-positive prices raise,
    naming the file line.
    """
    path = Path(path)
    if not path.is_file():
        raise InputNotFound(str(path))
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except (pd.errors.EmptyDataError, pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc

    frame.columns = [str(c).strip() for c in frame.columns]
    for required in (DATE_COLUMN, column):
        if required not in frame.columns:
            raise ParseError(f"{path}: no column '{required}' in header", column=required)
    if frame.empty:
        raise EmptySeries(f"{path}: no data rows")

    raw_dates = frame[DATE_COLUMN].str.strip()
    raw_values = frame[column].str.strip()

    missing = np.nonzero(((raw_dates == "") | (raw_values == "")).to_numpy())[0]
    if missing.size:
        lines = ", ".join(str(_line(i)) for i in missing)
        raise ParseError(f"{path}: missing values at rows {lines}", row=_line(missing[0]), column=column)

    dates = pd.to_datetime(raw_dates, format="ISO8601", errors="coerce")
    bad_dates = np.nonzero(dates.isna().to_numpy())[0]
    if bad_dates.size:
        i = bad_dates[0]
        raise ParseError(
            f"{path}: row {_line(i)}: unparseable date '{raw_dates.iloc[i]}'",
            row=_line(i),
            column=DATE_COLUMN,
        )

    bad_values = np.nonzero(~raw_values.str.fullmatch(DECIMAL_PATTERN).to_numpy(dtype=bool))[0]
    if bad_values.size:
        i = bad_values[0]
        raise ParseError(
            f"{path}: row {_line(i)}: unparseable number '{raw_values.iloc[i]}' in column '{column}'",
            row=_line(i),
            column=column,
        )
    values = raw_values.astype(np.float64).to_numpy()

    not_positive = np.nonzero(~(values > 0) | ~np.isfinite(values))[0]
    if not_positive.size:
        i = not_positive[0]
        raise NonPositivePrice(
            f"{path}: row {_line(i)}: non-positive price {raw_values.iloc[i]}", row=_line(i)
        )

    table = pd.DataFrame({"date": dates.dt.date, "value": values, "line": np.arange(len(frame)) + 2})
    table = table.sort_values("date", kind="stable")
    duplicated = table["date"].duplicated().to_numpy()
    if duplicated.any():
        line = int(table["line"].to_numpy()[np.argmax(duplicated)])
        raise NonMonotonicDates(f"{path}: row {line}: duplicate date", row=line)

    records = [
        PriceRecord(date=date, value=value)
        for date, value in zip(table["date"], table["value"])
    ]
    dataset = Dataset(name=name or path.stem, records=records)
    logger.debug("loaded %d records from %s[%s]", len(records), path, column)
    return dataset


def write_csv(
    dataset: Dataset, path: str | Path, column: str = "close", digits: int = 12
) -> Path:
    """Write ``date,<column>`` rows rendering values with ``digits`` significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(
        {
            DATE_COLUMN: [record.date.isoformat() for record in dataset.records],
            column: [f"{record.value:.{digits}g}" for record in dataset.records],
        }
    )
    frame.to_csv(path, index=False, lineterminator="\n")
    return path


def align(datasets: Sequence[Dataset]) -> AlignedTable:
    """Inner join on dates; dates missing from any dataset are dropped and reported."""
    if not datasets:
        raise EmptySeries("nothing to align")
    names = [dataset.name for dataset in datasets]
    if len(set(names)) != len(names):
        raise ValueError(f"dataset names must be unique: {names}")

    frame = pd.concat([dataset.to_series() for dataset in datasets], axis=1, join="inner")
    frame = frame.sort_index()
    if frame.empty:
        raise EmptyIntersection(f"datasets {names} share no date")

    kept = set(frame.index)
    dropped = {
        dataset.name: [date for date in dataset.dates if date not in kept] for dataset in datasets
    }
    for name, dates in dropped.items():
        if dates:
            logger.info("%s: dropped %d dates absent from other inputs", name, len(dates))
    return AlignedTable(frame=frame, dropped=dropped)


def build_panel(
    table: AlignedTable,
    target: str,
    factors: Sequence[str],
    mode: SeriesMode,
    return_kind: ReturnKind = ReturnKind.SIMPLE,
) -> FactorPanel:
    """Target and factor series for a comparison channel.

    ``VALUE`` uses the prices; ``RETURN`` and ``VOLATILITY`` use returns (the
    volatility transform itself is applied by the estimator, which owns its
    window).
    """
    columns: Tuple[str, ...] = (target, *factors)
    series = [table.series(name) for name in columns]
    if mode is not SeriesMode.VALUE:
        series = [returns(s, return_kind) for s in series]
    return FactorPanel(target=series[0], factors=series[1:])
