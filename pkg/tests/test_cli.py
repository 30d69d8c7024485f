from pathlib import Path
from unittest.mock import MagicMock, call, patch

import pytest

from broadband_fit.cli import build_parser, cli_main
from broadband_fit.config import ExperimentSettings, Method
from broadband_fit.error import ConfigError, SweepError
from broadband_fit.plotting import PlotKind


@patch("sys.argv", ["cli_main", "fit"])
@patch("broadband_fit.cli.MetricsRecorder")
@patch("broadband_fit.cli.run_fit")
@patch("broadband_fit.cli.setup_logging")
@patch("broadband_fit.cli.load_settings_from_cli")
@patch("broadband_fit.cli.logger")
def test_cli_main_keyboard_interrupt(
    mock_logger,
    mock_load_settings,
    mock_setup_logging,
    mock_run_fit,
    mock_recorder,
):
    """Test that cli_main handles KeyboardInterrupt and exits gracefully."""
    mock_load_settings.return_value = ExperimentSettings()
    mock_run_fit.side_effect = KeyboardInterrupt

    with pytest.raises(SystemExit) as e:
        cli_main()

    assert e.value.code == 0
    mock_logger.info.assert_called_once_with("Run terminated by user.")
    mock_run_fit.assert_called_once()


@patch("sys.argv", ["cli_main", "fit", "--config", "missing.yaml"])
@patch("broadband_fit.cli.run_fit")
@patch("broadband_fit.cli.load_settings_from_cli")
@patch("sys.stderr", new_callable=MagicMock)
def test_cli_main_config_error(mock_stderr, mock_load_settings, mock_run_fit):
    """Test that cli_main reports a ConfigError and exits with a usage error."""
    mock_load_settings.side_effect = ConfigError("Test configuration error")

    with pytest.raises(SystemExit) as e:
        cli_main()

    assert e.value.code == 2
    mock_stderr.write.assert_has_calls(
        [call("Error loading configuration: Test configuration error"), call("\n")]
    )
    mock_load_settings.assert_called_once()
    mock_run_fit.assert_not_called()


@patch("sys.argv", ["cli_main", "fit", "--signal", "f2", "--updates", "50"])
@patch("broadband_fit.cli.MetricsRecorder")
@patch("broadband_fit.cli.run_fit")
@patch("broadband_fit.cli.setup_logging")
@patch("broadband_fit.cli.load_settings_from_cli")
def test_cli_main_fit_happy_path(
    mock_load_settings, mock_setup_logging, mock_run_fit, mock_recorder
):
    """Test that the fit command runs one fit and writes metrics."""
    settings = ExperimentSettings(output_dir="out")
    mock_load_settings.return_value = settings

    cli_main()

    args = mock_load_settings.call_args.args[0]
    assert args.signal == "f2"
    assert args.updates == 50
    mock_setup_logging.assert_called_once_with(settings.logging)
    mock_run_fit.assert_called_once_with(settings)
    mock_recorder.assert_called_once_with(settings.metrics)
    recorder = mock_recorder.return_value.__enter__.return_value
    recorder.write.assert_called_once_with(Path("out"))


@patch("sys.argv", ["cli_main", "fit", "--method", "vanilla", "--method", "pffdnn"])
@patch("broadband_fit.cli.MetricsRecorder")
@patch("broadband_fit.cli.run_fit")
@patch("broadband_fit.cli.setup_logging")
@patch("broadband_fit.cli.load_settings_from_cli")
@patch("broadband_fit.cli.logger")
def test_cli_main_fit_warns_about_extra_methods(
    mock_logger, mock_load_settings, mock_setup_logging, mock_run_fit, mock_recorder
):
    """Test that fit warns when more than one method is configured."""
    mock_load_settings.return_value = ExperimentSettings(
        methods=[Method.VANILLA, Method.PFFDNN]
    )

    cli_main()

    mock_logger.warning.assert_called_once()
    mock_run_fit.assert_called_once()


@patch("sys.argv", ["cli_main", "sweep", "--workers", "2"])
@patch("broadband_fit.cli.MetricsRecorder")
@patch("broadband_fit.cli.run_sweep", new_callable=MagicMock)
@patch("broadband_fit.cli.asyncio.run")
@patch("broadband_fit.cli.setup_logging")
@patch("broadband_fit.cli.load_settings_from_cli")
def test_cli_main_sweep(
    mock_load_settings,
    mock_setup_logging,
    mock_asyncio_run,
    mock_run_sweep,
    mock_recorder,
):
    """Test that the sweep command runs the sweep coroutine."""
    settings = ExperimentSettings(workers=2)
    mock_load_settings.return_value = settings

    cli_main()

    assert mock_load_settings.call_args.args[0].workers == 2
    mock_run_sweep.assert_called_once_with(settings)
    mock_asyncio_run.assert_called_once_with(mock_run_sweep.return_value)


@patch("sys.argv", ["cli_main", "sweep"])
@patch("broadband_fit.cli.MetricsRecorder")
@patch("broadband_fit.cli.run_sweep", new_callable=MagicMock)
@patch("broadband_fit.cli.asyncio.run")
@patch("broadband_fit.cli.setup_logging")
@patch("broadband_fit.cli.load_settings_from_cli")
@patch("broadband_fit.cli.logger")
def test_cli_main_sweep_failure(
    mock_logger,
    mock_load_settings,
    mock_setup_logging,
    mock_asyncio_run,
    mock_run_sweep,
    mock_recorder,
):
    """Test that failed sweep cells give a runtime error exit code."""
    mock_load_settings.return_value = ExperimentSettings()
    mock_asyncio_run.side_effect = SweepError({"pffdnn-dw11": ValueError("bad")})

    with pytest.raises(SystemExit) as e:
        cli_main()

    assert e.value.code == 1
    mock_logger.error.assert_called_once()
    assert "pffdnn-dw11" in mock_logger.error.call_args.args[0]


@patch("sys.argv", ["cli_main", "fit"])
@patch("broadband_fit.cli.MetricsRecorder")
@patch("broadband_fit.cli.run_fit")
@patch("broadband_fit.cli.setup_logging")
@patch("broadband_fit.cli.load_settings_from_cli")
@patch("broadband_fit.cli.logger")
def test_cli_main_unexpected_error(
    mock_logger, mock_load_settings, mock_setup_logging, mock_run_fit, mock_recorder
):
    """Test that an unexpected error is logged and exits with a runtime error."""
    mock_load_settings.return_value = ExperimentSettings()
    mock_run_fit.side_effect = FloatingPointError("overflow")

    with pytest.raises(SystemExit) as e:
        cli_main()

    assert e.value.code == 1
    mock_logger.error.assert_called_once_with(
        "FloatingPointError: overflow", exc_info=True
    )


@patch("sys.argv", ["cli_main", "signal", "--signal", "enso", "-o", "dump"])
@patch("broadband_fit.cli.dump_signal")
@patch("broadband_fit.cli.setup_logging")
@patch("broadband_fit.cli.load_settings_from_cli")
def test_cli_main_signal(mock_load_settings, mock_setup_logging, mock_dump_signal):
    """Test that the signal command dumps samples and spectrum."""
    settings = ExperimentSettings.model_validate(
        {"signal": {"kind": "enso"}, "output_dir": "dump"}
    )
    mock_load_settings.return_value = settings

    cli_main()

    assert mock_load_settings.call_args.args[0].out == "dump"
    mock_dump_signal.assert_called_once_with(settings.signal, "dump")


@patch(
    "sys.argv",
    ["cli_main", "plot", "a.csv", "b.csv", "-o", "plot.svg", "--title", "f1"],
)
@patch("broadband_fit.cli.render_plot")
@patch("broadband_fit.cli.load_settings_from_cli")
def test_cli_main_plot(mock_load_settings, mock_render_plot):
    """Test that the plot command renders the given CSVs without loading settings."""
    cli_main()

    mock_render_plot.assert_called_once_with(
        [Path("a.csv"), Path("b.csv")], Path("plot.svg"), "convergence", "f1"
    )
    mock_load_settings.assert_not_called()


@patch("sys.argv", ["cli_main"])
@patch("sys.stderr", new_callable=MagicMock)
def test_cli_main_requires_a_command(mock_stderr):
    """Test that running without a subcommand is a usage error."""
    with pytest.raises(SystemExit) as e:
        cli_main()

    assert e.value.code == 2


@patch("sys.argv", ["cli_main", "--version"])
@patch("sys.stdout", new_callable=MagicMock)
@patch("broadband_fit.cli.version")
def test_cli_main_version_option(
    mock_version,
    mock_stdout,
):
    """Test that --version option displays the correct version and exits."""
    mock_version.return_value = "1.2.3"

    with pytest.raises(SystemExit) as e:
        cli_main()

    assert e.value.code == 0
    mock_stdout.write.assert_called_once_with("broadband-fit 1.2.3\n")
    mock_version.assert_called_once_with("broadband-fit")


def test_build_parser_leaves_unset_flags_empty():
    """Test that unset flags stay None so config file values are kept."""
    args = build_parser().parse_args(["sweep", "--delta-omega", "11", "-vv"])

    assert args.command == "sweep"
    assert args.delta_omega == [11]
    assert args.verbose == 2
    assert args.method is None
    assert args.updates is None
    assert args.metrics_enabled is None
    assert args.workers is None


def test_build_parser_plot_defaults():
    args = build_parser().parse_args(["plot", "c.csv", "-o", "c.svg"])

    assert args.kind == PlotKind.CONVERGENCE.value
    assert args.title is None
    assert args.csv == ["c.csv"]
