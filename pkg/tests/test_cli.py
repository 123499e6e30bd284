"""Tests for the command line."""

import numpy as np
import pandas as pd
import pytest

from src.analysis.schemas import ModelKind, SeriesMode
from src.cli.args import Command, parse_args
from src.cli.runner import EXIT_DATA, EXIT_OK, EXIT_USAGE, main

SIZE = 800


def read_output(path) -> pd.DataFrame:
    return pd.read_csv(path, dtype=str, keep_default_na=False)


def write_prices(path, dates, prices) -> None:
    pd.DataFrame({"date": dates, "close": [f"{p:.10g}" for p in prices]}).to_csv(path, index=False)


@pytest.fixture
def trio(tmp_path):
    """Target and two factor price files sharing business-day dates."""
    rng = np.random.default_rng(20240601)
    dates = pd.bdate_range("2021-01-04", periods=SIZE).strftime("%Y-%m-%d")
    market = rng.normal(0.0003, 0.01, size=SIZE)
    sector = rng.normal(0.0, 0.008, size=SIZE)
    target = 0.0001 + 1.1 * market - 0.3 * sector

    paths = {}
    for name, r in (("target", target), ("market", market), ("sector", sector)):
        path = tmp_path / f"{name}.csv"
        write_prices(path, dates, 100.0 * np.cumprod(1.0 + r))
        paths[name] = path
    return paths


@pytest.fixture
def scaled_pair(tmp_path):
    """A market file plus a target priced at 2.5 x market and one with 3 x its returns."""
    rng = np.random.default_rng(20240602)
    dates = pd.bdate_range("2021-01-04", periods=SIZE).strftime("%Y-%m-%d")
    market = rng.normal(0.0002, 0.01, size=SIZE)
    market_prices = 100.0 * np.cumprod(1.0 + market)

    paths = {}
    for name, prices in (
        ("market", market_prices),
        ("double", 2.5 * market_prices),
        ("levered", 50.0 * np.cumprod(1.0 + 3.0 * market)),
    ):
        path = tmp_path / f"{name}.csv"
        write_prices(path, dates, prices)
        paths[name] = path
    return paths


def panel_argv(command, target, factors, out, *extra):
    argv = [command, "--target", str(target)]
    for factor in factors:
        argv += ["--factor", str(factor)]
    return argv + ["--output", str(out), *extra]


class TestUsage:
    """Test cases for invocation errors."""

    def test_missing_target(self, trio, tmp_path, capsys):
        """Test that beta without a target is a usage error."""
        status = main(["beta", "--factor", str(trio["market"]), "--output", str(tmp_path / "o.csv")])
        assert status == EXIT_USAGE
        assert "--target" in capsys.readouterr().err

    def test_reports_every_violation(self, capsys):
        """Test that all violations are reported together."""
        status = main(["multibeta", "--windows", "1,50"])
        err = capsys.readouterr().err
        assert status == EXIT_USAGE
        assert "--output" in err
        assert "--target" in err
        assert "--factor" in err
        assert "--windows" in err

    def test_two_targets(self, trio, tmp_path):
        """Test that a second target is rejected."""
        argv = [
            "beta",
            "--target", str(trio["target"]),
            "--target", str(trio["sector"]),
            "--factor", str(trio["market"]),
            "--output", str(tmp_path / "o.csv"),
        ]
        assert main(argv) == EXIT_USAGE

    def test_window_too_short(self, trio, tmp_path):
        """Test that a one-sample window is rejected."""
        argv = ["decompose", "--input", str(trio["target"]), "--window", "1", "--output", str(tmp_path / "o.csv")]
        assert main(argv) == EXIT_USAGE

    def test_unknown_command(self):
        """Test an unknown sub-command."""
        assert main(["fit"]) == EXIT_USAGE

    def test_bad_choice(self, trio, tmp_path):
        """Test a value outside the allowed choices."""
        argv = ["returns", "--input", str(trio["target"]), "--returns", "cubic", "--output", str(tmp_path / "o.csv")]
        assert main(argv) == EXIT_USAGE

    def test_ratio_needs_one_factor(self, trio, tmp_path, capsys):
        """Test that the ratio model rejects a second factor."""
        argv = panel_argv(
            "beta", trio["target"], [trio["market"], trio["sector"]], tmp_path / "o.csv", "--model", "ratio"
        )
        assert main(argv) == EXIT_USAGE
        assert "--model ratio needs exactly one --factor" in capsys.readouterr().err

    def test_ratio_only_for_beta(self, trio, tmp_path, capsys):
        """Test that multibeta refuses the ratio model."""
        argv = panel_argv("multibeta", trio["target"], [trio["market"]], tmp_path / "o.csv", "--model", "ratio")
        assert main(argv) == EXIT_USAGE
        assert "only available with the beta command" in capsys.readouterr().err

    def test_reverse_needs_alpha(self, trio, tmp_path, capsys):
        """Test that --reverse requires the with-alpha model."""
        argv = panel_argv("beta", trio["target"], [trio["market"]], tmp_path / "o.csv", "--reverse")
        assert main(argv) == EXIT_USAGE
        assert "--reverse needs --model with_alpha" in capsys.readouterr().err


class TestParseArgs:
    """Test cases for resolving a RunConfig."""

    def test_defaults(self, trio, tmp_path):
        """Test the resolved defaults of multibeta."""
        config = parse_args(
            ["multibeta", "--target", str(trio["target"]), "--factor", str(trio["market"]), "--output", str(tmp_path / "o.csv")]
        )
        assert config.command is Command.MULTIBETA
        assert config.windows == [100, 300, 500]
        assert config.model is ModelKind.BETAS_ONLY
        assert config.mode is SeriesMode.RETURN
        assert config.epsilon == 1e-8
        assert config.effective_vol_window == 500
        assert config.inputs == [trio["target"], trio["market"]]
        assert not config.reverse

    def test_epsilon_from_environment(self, trio, tmp_path, monkeypatch):
        """Test that the environment sets epsilon and the flag overrides it."""
        monkeypatch.setenv("WRONBETA_EPSILON", "0.001")
        base = ["beta", "--target", str(trio["target"]), "--factor", str(trio["market"]), "--output", str(tmp_path / "o.csv")]
        assert parse_args(base).epsilon == 0.001
        assert parse_args(base + ["--epsilon", "1e-6"]).epsilon == 1e-6

    def test_explicit_vol_window(self, trio, tmp_path):
        """Test an explicit volatility window."""
        config = parse_args(
            [
                "beta",
                "--target", str(trio["target"]),
                "--factor", str(trio["market"]),
                "--window", "60",
                "--mode", "volatility",
                "--vol-window", "20",
                "--output", str(tmp_path / "o.csv"),
            ]
        )
        assert config.window == 60
        assert config.effective_vol_window == 20
        assert config.mode is SeriesMode.VOLATILITY

    def test_ratio_and_reverse(self, trio, tmp_path):
        """Test resolving the ratio model and the reverse flag."""
        out = tmp_path / "o.csv"
        config = parse_args(panel_argv("beta", trio["target"], [trio["market"]], out, "--model", "ratio"))
        assert config.model is ModelKind.RATIO
        config = parse_args(
            panel_argv("beta", trio["target"], [trio["market"]], out, "--model", "with_alpha", "--reverse")
        )
        assert config.reverse


class TestDataErrors:
    """Test cases for data failures."""

    def test_missing_file(self, tmp_path, capsys):
        """Test a missing input file."""
        status = main(["returns", "--input", str(tmp_path / "absent.csv"), "--output", str(tmp_path / "o.csv")])
        assert status == EXIT_DATA
        assert "input file not found" in capsys.readouterr().err
        assert not (tmp_path / "o.csv").exists()

    def test_series_too_short(self, trio, tmp_path):
        """Test a window as long as the series."""
        argv = [
            "beta",
            "--target", str(trio["target"]),
            "--factor", str(trio["market"]),
            "--window", str(SIZE),
            "--output", str(tmp_path / "o.csv"),
        ]
        assert main(argv) == EXIT_DATA

    def test_ratio_too_short(self, trio, tmp_path):
        """Test a ratio window without two windows of history."""
        argv = panel_argv(
            "beta", trio["target"], [trio["market"]], tmp_path / "o.csv", "--model", "ratio", "--window", "400"
        )
        assert main(argv) == EXIT_DATA


class TestSingleSeriesCommands:
    """Test cases for decompose, returns and vol."""

    def test_decompose(self, trio, tmp_path):
        """Test the decompose output and its warm-up flags."""
        out = tmp_path / "decompose.csv"
        assert main(["decompose", "--input", str(trio["target"]), "--window", "20", "--output", str(out)]) == EXIT_OK
        frame = read_output(out)
        assert list(frame.columns) == ["t", "date", "warmup", "value", "trend", "fluctuation"]
        assert len(frame) == SIZE
        assert frame["warmup"].tolist()[:21] == ["1"] * 20 + ["0"]
        value = frame["value"].astype(float)
        rebuilt = frame["trend"].astype(float) + frame["fluctuation"].astype(float)
        np.testing.assert_allclose(rebuilt, value, rtol=1e-10)

    def test_returns(self, trio, tmp_path):
        """Test the returns output."""
        out = tmp_path / "returns.csv"
        assert main(["returns", "--input", str(trio["market"]), "--output", str(out)]) == EXIT_OK
        frame = read_output(out)
        assert list(frame.columns) == ["t", "date", "return"]
        assert len(frame) == SIZE - 1
        assert frame["t"].iloc[0] == "1"
        assert frame["date"].iloc[0] == "2021-01-05"

    def test_vol_with_plot_data(self, trio, tmp_path):
        """Test the vol output and its plot file."""
        out = tmp_path / "vol.csv"
        argv = ["vol", "--input", str(trio["market"]), "--window", "30", "--output", str(out), "--plot-data"]
        assert main(argv) == EXIT_OK
        frame = read_output(out)
        assert list(frame.columns) == ["t", "date", "warmup", "volatility"]
        assert len(frame) == SIZE - 1
        plot = read_output(tmp_path / "vol_volatility.csv")
        assert list(plot.columns) == ["x", "y"]
        assert len(plot) == SIZE - 1 - 30


class TestBetaCommands:
    """Test cases for beta and multibeta."""

    def test_beta_with_alpha(self, trio, tmp_path):
        """Test a two-factor with-alpha run and its plot files."""
        out = tmp_path / "beta.csv"
        argv = [
            "beta",
            "--target", str(trio["target"]),
            "--factor", str(trio["market"]),
            "--factor", str(trio["sector"]),
            "--window", "200",
            "--model", "with_alpha",
            "--output", str(out),
            "--plot-data",
        ]
        assert main(argv) == EXIT_OK
        frame = read_output(out)
        assert list(frame.columns) == [
            "t", "date", "warmup", "independent", "window", "alpha", "beta_1", "beta_2", "wronskian"
        ]
        assert len(frame) == SIZE - 1
        assert (frame["warmup"].iloc[:200] == "1").all()
        assert (frame["beta_1"].iloc[:200] == "").all()
        full = frame.iloc[200:]
        assert (full["independent"] == "1").all()
        assert (full["window"] == "200").all()
        assert full["beta_1"].astype(float).between(1.0, 1.2).all()
        assert full["beta_2"].astype(float).between(-0.4, -0.2).all()
        assert (tmp_path / "beta_alpha.csv").exists()
        assert (tmp_path / "beta_beta_2.csv").exists()

    def test_volatility_mode(self, trio, tmp_path):
        """Test betas between volatility series."""
        out = tmp_path / "volbeta.csv"
        argv = [
            "beta",
            "--target", str(trio["target"]),
            "--factor", str(trio["market"]),
            "--window", "100",
            "--mode", "volatility",
            "--vol-window", "20",
            "--output", str(out),
        ]
        assert main(argv) == EXIT_OK
        frame = read_output(out)
        first = frame[frame["warmup"] == "0"].index[0]
        assert first == 100 + 20
        assert (frame["independent"].iloc[first:] == "1").all()

    def test_ratio_of_prices(self, scaled_pair, tmp_path):
        """Test the ratio model on a target priced at 2.5 x the factor."""
        out = tmp_path / "ratio.csv"
        argv = panel_argv(
            "beta", scaled_pair["double"], [scaled_pair["market"]], out,
            "--model", "ratio", "--mode", "value", "--window", "100", "--plot-data",
        )
        assert main(argv) == EXIT_OK
        frame = read_output(out)
        assert list(frame.columns) == [
            "t", "date", "warmup", "independent", "window", "alpha", "beta_1", "wronskian"
        ]
        assert len(frame) == SIZE
        first = frame[frame["warmup"] == "0"].index[0]
        assert first == 2 * 100
        full = frame.iloc[first:]
        assert (full["independent"] == "1").all()
        assert (full["alpha"] == "").all()
        np.testing.assert_allclose(full["beta_1"].astype(float), 2.5, rtol=1e-8)
        assert (full["wronskian"].astype(float) > 0).all()
        assert not (tmp_path / "ratio_alpha.csv").exists()
        assert len(read_output(tmp_path / "ratio_beta_1.csv")) == SIZE - first

    def test_ratio_of_volatilities(self, scaled_pair, tmp_path):
        """Test the ratio model between volatility series of scaled returns."""
        out = tmp_path / "volratio.csv"
        argv = panel_argv(
            "beta", scaled_pair["levered"], [scaled_pair["market"]], out,
            "--model", "ratio", "--mode", "volatility", "--window", "100", "--vol-window", "20",
        )
        assert main(argv) == EXIT_OK
        frame = read_output(out)
        assert len(frame) == SIZE - 1
        first = frame[frame["warmup"] == "0"].index[0]
        assert first == 20 + 2 * 100
        np.testing.assert_allclose(frame["beta_1"].iloc[first:].astype(float), 3.0, rtol=1e-6)

    def test_reverse(self, trio, tmp_path):
        """Test the reversed one-factor relation columns."""
        out = tmp_path / "reverse.csv"
        argv = panel_argv(
            "beta", trio["target"], [trio["market"]], out,
            "--model", "with_alpha", "--reverse", "--window", "200",
        )
        assert main(argv) == EXIT_OK
        frame = read_output(out)
        assert list(frame.columns)[-3:] == ["wronskian", "reverse_alpha", "reverse_beta"]
        assert (frame["reverse_beta"].iloc[:200] == "").all()
        full = frame.iloc[200:]
        alpha = full["alpha"].astype(float).to_numpy()
        beta = full["beta_1"].astype(float).to_numpy()
        np.testing.assert_allclose(full["reverse_beta"].astype(float), 1.0 / beta, rtol=1e-9)
        np.testing.assert_allclose(full["reverse_alpha"].astype(float), -alpha / beta, rtol=1e-9)

    def test_multibeta_is_deterministic(self, trio, tmp_path):
        """Test that multibeta output is byte-identical across runs."""
        outputs = []
        for run in range(2):
            out = tmp_path / f"multibeta_{run}.csv"
            argv = [
                "multibeta",
                "--target", str(trio["target"]),
                "--factor", str(trio["market"]),
                "--factor", str(trio["sector"]),
                "--windows", "100,300,500",
                "--mode", "return",
                "--output", str(out),
            ]
            assert main(argv) == EXIT_OK
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]

        frame = read_output(tmp_path / "multibeta_0.csv")
        assert list(frame.columns) == [
            "t", "date", "warmup", "independent", "window", "alpha", "beta_1", "beta_2", "wronskian"
        ]
        assert len(frame) == SIZE - 1
        full = frame[frame["warmup"] == "0"]
        assert len(full) == SIZE - 1 - 500
        assert set(full["window"]) <= {"100", "300", "500"}
        assert (full["alpha"] == "").all()
        assert outputs[0].endswith(b"\n")
        assert b"\r\n" not in outputs[0]
