"""Command workflows and CSV writers."""

from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import pandas as pd
from rich.console import Console

from ..analysis.beta_engine import (
    reverse_monofactor,
    rolling_estimate,
    rolling_multiwindow_estimate,
    rolling_ratio_beta,
    volatility_beta,
    volatility_panel,
)
from ..analysis.moments import volatility
from ..analysis.schemas import (
    BetaEstimate,
    FactorPanel,
    IndependenceThreshold,
    ModelKind,
    SeriesMode,
    TimeSeries,
    WindowSpec,
)
from ..analysis.series_core import decompose, returns
from ..data.ingest import AlignedTable, align, build_panel, load_csv
from ..utils.errors import DataError, UsageError, ZeroBeta
from ..utils.logger import LoggerMixin, setup_logger
from .args import Command, RunConfig, parse_args

EXIT_OK = 0
EXIT_DATA = 1
EXIT_USAGE = 2

console = Console(stderr=True, highlight=False, soft_wrap=True)


def _unique_names(paths: Sequence[Path]) -> List[str]:
    names: List[str] = []
    for path in paths:
        name, suffix = path.stem, 2
        while name in names:
            name, suffix = f"{path.stem}_{suffix}", suffix + 1
        names.append(name)
    return names


class CommandRunner(LoggerMixin):
    """Runs one command of a RunConfig and writes its outputs."""

    def __init__(self, config: RunConfig) -> None:
        self.config = config

    def execute(self) -> Path:
        """Execute the configured command; returns the output path."""
        handlers = {
            Command.DECOMPOSE: self._decompose,
            Command.RETURNS: self._returns,
            Command.VOL: self._vol,
            Command.BETA: self._beta,
            Command.MULTIBETA: self._multibeta,
        }
        self.logger.info("Running %s", self.config.command.value)
        handlers[self.config.command]()
        self.logger.info("Wrote %s", self.config.output)
        return self.config.output

    # formatting

    def _fmt(self, value: Optional[float]) -> str:
        if value is None:
            return ""
        return f"{value:.{self.config.digits}g}"

    @staticmethod
    def _flag(value: Optional[bool]) -> str:
        return "" if value is None else str(int(value))

    def _write(self, rows: List[List[str]], header: List[str], path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        pd.DataFrame(rows, columns=header, dtype=str).to_csv(path, index=False, lineterminator="\n")

    def _plot(self, quantity: str, xs: Iterable[float], ys: Iterable[float]) -> None:
        if not self.config.plot_data:
            return
        output = self.config.output
        rows = [[self._fmt(x), self._fmt(y)] for x, y in zip(xs, ys)]
        self._write(rows, ["x", "y"], output.with_name(f"{output.stem}_{quantity}.csv"))

    # inputs

    def _load(self, paths: Sequence[Path]) -> AlignedTable:
        names = _unique_names(paths)
        datasets = [load_csv(path, self.config.column, name=name) for path, name in zip(paths, names)]
        return align(datasets)

    def _single(self) -> tuple[AlignedTable, TimeSeries]:
        table = self._load(self.config.inputs)
        return table, table.series(table.frame.columns[0])

    # single-series commands

    def _decompose(self) -> None:
        table, series = self._single()
        mean, quick = decompose(series, WindowSpec(length_samples=self.config.window))
        times = series.grid.times()
        rows = [
            [
                self._fmt(t),
                table.date_at(t).isoformat(),
                self._flag(j < mean.warmup),
                self._fmt(series.values[j]),
                self._fmt(mean.values[j]),
                self._fmt(quick.values[j]),
            ]
            for j, t in enumerate(times)
        ]
        self._write(rows, ["t", "date", "warmup", "value", "trend", "fluctuation"], self.config.output)
        self._plot("value", times, series.values)
        self._plot("trend", times, mean.values)
        self._plot("fluctuation", times, quick.values)

    def _returns(self) -> None:
        table, series = self._single()
        r = returns(series, self.config.return_kind)
        times = r.grid.times()
        rows = [
            [self._fmt(t), table.date_at(t).isoformat(), self._fmt(r.values[j])]
            for j, t in enumerate(times)
        ]
        self._write(rows, ["t", "date", "return"], self.config.output)
        self._plot("return", times, r.values)

    def _vol(self) -> None:
        table, series = self._single()
        vol = volatility(returns(series, self.config.return_kind), WindowSpec(length_samples=self.config.window))
        times = vol.grid.times()
        rows = [
            [
                self._fmt(t),
                table.date_at(t).isoformat(),
                self._flag(j < vol.warmup),
                self._fmt(vol.values[j]),
            ]
            for j, t in enumerate(times)
        ]
        self._write(rows, ["t", "date", "warmup", "volatility"], self.config.output)
        self._plot("volatility", times[vol.warmup :], vol.values[vol.warmup :])

    # beta commands

    def _panel(self) -> tuple[AlignedTable, FactorPanel]:
        table = self._load(self.config.inputs)
        names = [str(c) for c in table.frame.columns]
        panel = build_panel(table, names[0], names[1:], self.config.mode, self.config.return_kind)
        self.logger.info(
            "Panel: %d samples, %d factors, mode %s", panel.grid.count, panel.n, self.config.mode.value
        )
        return table, panel

    @property
    def _threshold(self) -> IndependenceThreshold:
        return IndependenceThreshold(epsilon=self.config.epsilon)

    def _beta(self) -> None:
        table, panel = self._panel()
        w = WindowSpec(length_samples=self.config.window)
        if self.config.model is ModelKind.RATIO:
            if self.config.mode is SeriesMode.VOLATILITY:
                panel = volatility_panel(panel, WindowSpec(length_samples=self.config.effective_vol_window))
            estimates = rolling_ratio_beta(panel, w, self._threshold)
        elif self.config.mode is SeriesMode.VOLATILITY:
            w_vol = WindowSpec(length_samples=self.config.effective_vol_window)
            estimates = volatility_beta(panel, w_vol, w, self.config.model, self._threshold)
        else:
            estimates = rolling_estimate(panel, w, self.config.model, self._threshold)
        self._write_estimates(table, panel, estimates)

    def _multibeta(self) -> None:
        table, panel = self._panel()
        windows = [WindowSpec(length_samples=m) for m in self.config.windows]
        if self.config.mode is SeriesMode.VOLATILITY:
            panel = volatility_panel(panel, WindowSpec(length_samples=self.config.effective_vol_window))
        estimates = rolling_multiwindow_estimate(panel, windows, self.config.model, self._threshold)
        self._write_estimates(table, panel, estimates)

    def _write_estimates(
        self, table: AlignedTable, panel: FactorPanel, estimates: List[BetaEstimate]
    ) -> None:
        by_index: Dict[int, BetaEstimate] = {est.index: est for est in estimates}
        n = panel.n
        header = ["t", "date", "warmup", "independent", "window", "alpha"]
        header += [f"beta_{i}" for i in range(1, n + 1)] + ["wronskian"]
        if self.config.reverse:
            header += ["reverse_alpha", "reverse_beta"]
        rows = []
        for j, t in enumerate(panel.grid.times()):
            est = by_index.get(j)
            date = table.date_at(t).isoformat()
            if est is None:
                rows.append([self._fmt(t), date, "1"] + [""] * (len(header) - 3))
                continue
            betas = est.betas if est.independent else [None] * n
            row = (
                [self._fmt(t), date, "0", self._flag(est.independent), str(est.window.length_samples)]
                + [self._fmt(est.alpha)]
                + [self._fmt(b) for b in betas]
                + [self._fmt(est.wronskian)]
            )
            if self.config.reverse:
                row += [self._fmt(v) for v in self._reversed(est)]
            rows.append(row)
        self._write(rows, header, self.config.output)

        usable = [est for est in estimates if est.independent]
        xs = [est.at for est in usable]
        if self.config.model is ModelKind.WITH_ALPHA:
            self._plot("alpha", xs, [est.alpha for est in usable])
        for i in range(n):
            self._plot(f"beta_{i + 1}", xs, [est.betas[i] for est in usable])
        degenerate = len(estimates) - len(usable)
        if degenerate:
            self.logger.info("%d of %d windows below the independence threshold", degenerate, len(estimates))

    @staticmethod
    def _reversed(est: BetaEstimate) -> Tuple[Optional[float], Optional[float]]:
        """Coefficients of X = a' + b' Y; blank when degenerate or beta is zero."""
        if not est.independent or est.alpha is None:
            return None, None
        try:
            return reverse_monofactor(est.alpha, est.betas[0])
        except ZeroBeta:
            return None, None


def run(config: RunConfig) -> int:
    """Run one command; data errors become exit status 1 with a one-line diagnostic."""
    try:
        CommandRunner(config).execute()
    except DataError as exc:
        console.print(f"error: {exc}", markup=False)
        return EXIT_DATA
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    """CLI entry point returning the process exit status."""
    setup_logger()
    try:
        config = parse_args([] if argv is None else argv)
    except UsageError as exc:
        for violation in exc.violations:
            console.print(f"usage error: {violation}", markup=False)
        return EXIT_USAGE
    return run(config)


__all__ = ["EXIT_DATA", "EXIT_OK", "EXIT_USAGE", "CommandRunner", "main", "run"]
