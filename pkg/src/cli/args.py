"""Command-line parsing into a validated RunConfig."""

import argparse
from enum import Enum
from pathlib import Path
from typing import Annotated, List, NoReturn, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..analysis.schemas import ModelKind, ReturnKind, SeriesMode
from ..utils.config import Config
from ..utils.errors import UsageError


class Command(str, Enum):
    """Sub-commands."""
    DECOMPOSE = "decompose"
    RETURNS = "returns"
    VOL = "vol"
    BETA = "beta"
    MULTIBETA = "multibeta"


SINGLE_INPUT = {Command.DECOMPOSE, Command.RETURNS, Command.VOL}
PANEL_COMMANDS = {Command.BETA, Command.MULTIBETA}

WindowSamples = Annotated[int, Field(ge=2)]


class RunConfig(BaseModel):
    """Fully resolved invocation."""

    model_config = ConfigDict(frozen=True)

    command: Command
    input: Optional[Path] = None
    target: Optional[Path] = None
    factors: List[Path] = Field(default_factory=list)
    column: str = "close"
    window: WindowSamples = 500
    windows: List[WindowSamples] = Field(default_factory=lambda: [100, 300, 500], min_length=1)
    model: ModelKind = ModelKind.BETAS_ONLY
    mode: SeriesMode = SeriesMode.RETURN
    vol_window: Optional[WindowSamples] = None
    epsilon: float = Field(default=1e-8, gt=0)
    return_kind: ReturnKind = ReturnKind.SIMPLE
    output: Path
    plot_data: bool = False
    reverse: bool = False
    digits: int = Field(default=12, ge=1, le=17)

    @property
    def inputs(self) -> List[Path]:
        """Input files in target-then-factors order."""
        if self.command in SINGLE_INPUT:
            return [self.input] if self.input else []
        return ([self.target] if self.target else []) + list(self.factors)

    @property
    def effective_vol_window(self) -> int:
        """Volatility window: explicit, else the (longest) beta window."""
        if self.vol_window is not None:
            return self.vol_window
        return max(self.windows) if self.command is Command.MULTIBETA else self.window


class _Parser(argparse.ArgumentParser):
    """ArgumentParser raising UsageError instead of exiting."""

    def error(self, message: str) -> NoReturn:
        raise UsageError([message])


def _window_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid window list '{text}'") from exc


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--column", help="value column in the input CSVs")
    parser.add_argument("--output", type=Path, help="output CSV path")
    parser.add_argument("--plot-data", action="store_true", help="also write x,y files per plotted quantity")
    parser.add_argument("--returns", dest="return_kind", choices=[k.value for k in ReturnKind])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wronbeta", description="Model-free time-varying alpha and betas")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, text in (
        (Command.DECOMPOSE, "trend / fluctuation decomposition of one series"),
        (Command.RETURNS, "returns of one price series"),
        (Command.VOL, "rolling volatility of the returns of one series"),
    ):
        sub = commands.add_parser(name.value, help=text)
        sub.add_argument("--input", type=Path, help="input CSV")
        if name is not Command.RETURNS:
            sub.add_argument("--window", type=int, help="window length in samples")
        _add_common(sub)

    for name, text in (
        (Command.BETA, "rolling betas with one window"),
        (Command.MULTIBETA, "rolling betas with per-time window selection"),
    ):
        sub = commands.add_parser(name.value, help=text)
        sub.add_argument("--target", type=Path, action="append", help="target CSV")
        sub.add_argument("--factor", type=Path, action="append", dest="factors", help="factor CSV (repeatable)")
        if name is Command.BETA:
            sub.add_argument("--window", type=int, help="window length in samples")
            sub.add_argument(
                "--reverse",
                action="store_true",
                help="also write X = a' + b' Y (with_alpha, one factor)",
            )
        else:
            sub.add_argument("--windows", type=_window_list, help="comma-separated window lengths")
        sub.add_argument("--model", choices=[k.value for k in ModelKind])
        sub.add_argument("--mode", choices=[k.value for k in SeriesMode])
        sub.add_argument("--vol-window", type=int, help="volatility window (volatility mode)")
        sub.add_argument("--epsilon", type=float, help="independence threshold")
        _add_common(sub)

    return parser


def _violations(ns: argparse.Namespace, config: Config) -> List[str]:
    """Every constraint the invocation breaks."""
    command = Command(ns.command)
    found: List[str] = []
    if ns.output is None:
        found.append("--output is required")
    if command in SINGLE_INPUT and getattr(ns, "input", None) is None:
        found.append("--input is required")

    window = getattr(ns, "window", None)
    if command in {Command.DECOMPOSE, Command.VOL, Command.BETA}:
        resolved = config.window if window is None else window
        if resolved < 2:
            found.append(f"--window must be >= 2 samples (got {resolved})")

    if command in PANEL_COMMANDS:
        targets = ns.target or []
        if len(targets) != 1:
            found.append(f"exactly one --target is required (got {len(targets)})")
        if not ns.factors:
            found.append("at least one --factor is required")
        if ns.vol_window is not None and ns.vol_window < 2:
            found.append(f"--vol-window must be >= 2 samples (got {ns.vol_window})")
        if ns.epsilon is not None and not ns.epsilon > 0:
            found.append(f"--epsilon must be positive (got {ns.epsilon})")
        factor_count = len(ns.factors or [])
        if ns.model == ModelKind.RATIO.value:
            if command is not Command.BETA:
                found.append("--model ratio is only available with the beta command")
            if factor_count != 1:
                found.append(f"--model ratio needs exactly one --factor (got {factor_count})")
        if getattr(ns, "reverse", False):
            if ns.model != ModelKind.WITH_ALPHA.value:
                found.append("--reverse needs --model with_alpha")
            if factor_count != 1:
                found.append(f"--reverse needs exactly one --factor (got {factor_count})")
    if command is Command.MULTIBETA:
        windows = config.windows if ns.windows is None else ns.windows
        if not windows:
            found.append("--windows needs at least one window")
        too_short = [w for w in windows if w < 2]
        if too_short:
            found.append(f"--windows entries must be >= 2 samples (got {too_short})")
    return found


def parse_args(argv: Sequence[str], config: Optional[Config] = None) -> RunConfig:
    """Parse ``argv`` into a RunConfig, reporting every violation at once."""
    config = config or Config()
    ns = build_parser().parse_args(list(argv))
    found = _violations(ns, config)
    if found:
        raise UsageError(found)

    command = Command(ns.command)
    values = {
        "command": command,
        "column": ns.column or config.column,
        "output": ns.output,
        "plot_data": ns.plot_data,
        "return_kind": ns.return_kind or config.return_kind,
        "epsilon": config.epsilon,
        "window": config.window,
        "windows": config.windows,
        "digits": config.significant_digits,
    }
    if getattr(ns, "window", None) is not None:
        values["window"] = ns.window
    if command in SINGLE_INPUT:
        values["input"] = ns.input
    else:
        values["target"] = ns.target[0]
        values["factors"] = ns.factors
        if ns.model:
            values["model"] = ns.model
        if ns.mode:
            values["mode"] = ns.mode
        if ns.vol_window is not None:
            values["vol_window"] = ns.vol_window
        if ns.epsilon is not None:
            values["epsilon"] = ns.epsilon
        if command is Command.MULTIBETA and ns.windows is not None:
            values["windows"] = ns.windows
        if command is Command.BETA:
            values["reverse"] = ns.reverse
    try:
        return RunConfig(**values)
    except ValidationError as exc:
        raise UsageError(
            [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in exc.errors()]
        ) from exc
