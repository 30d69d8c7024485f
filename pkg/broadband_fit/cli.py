import argparse
import asyncio
import logging
import sys
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

from .config import ExperimentSettings, Method, SignalKind
from .config_loader import load_settings_from_cli
from .error import ConfigError, SweepError
from .logging import setup_logging
from .metrics import MetricsRecorder
from .plotting import PlotKind, render_plot
from .runner import dump_signal, run_fit, run_sweep

logger = logging.getLogger(__name__)

DEFAULTS = ExperimentSettings()

EXIT_RUNTIME_ERROR = 1
EXIT_USAGE_ERROR = 2


def _add_experiment_arguments(parser: argparse.ArgumentParser, sweep: bool):
    general_group = parser.add_argument_group("General Settings")
    general_group.add_argument(
        "-c",
        "--config",
        default=None,
        help="Path to a YAML configuration file. Flags override its values.",
        metavar="PATH",
    )
    general_group.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Increase logging verbosity (-v: checkpoints, -vv: debug, "
        "-vvv: full debug).",
    )
    general_group.add_argument(
        "-o",
        "--out",
        default=None,
        help=f'Output directory. (default: "{DEFAULTS.output_dir}")',
        metavar="DIR",
    )

    signal_group = parser.add_argument_group("Signal Settings")
    signal_group.add_argument(
        "--signal",
        choices=[kind.value for kind in SignalKind],
        default=None,
        help=f"Test signal to fit. (default: {DEFAULTS.signal.kind.value})",
    )
    signal_group.add_argument(
        "--samples",
        type=int,
        default=None,
        help=f"Number of samples n. (default: {DEFAULTS.signal.n})",
        metavar="N",
    )

    fit_group = parser.add_argument_group("Fit Settings")
    fit_group.add_argument(
        "--method",
        action="append",
        choices=[method.value for method in Method],
        default=None,
        help="Fitting method; repeat to sweep several. "
        f"(default: {DEFAULTS.methods[0].value})",
    )
    fit_group.add_argument(
        "--delta-omega",
        action="append",
        type=int,
        default=None,
        help="Segment width in bins; repeat to sweep several. "
        f"(default: {', '.join(map(str, DEFAULTS.delta_omega))})",
        metavar="BINS",
    )
    fit_group.add_argument(
        "--energy-threshold",
        type=float,
        default=None,
        help="Fraction of spectral energy the kept segments must hold. "
        f"(default: {DEFAULTS.energy_threshold!r})",
        metavar="FRACTION",
    )
    fit_group.add_argument(
        "--updates",
        type=int,
        default=None,
        help=f"Adam updates per network. (default: {DEFAULTS.training.updates})",
        metavar="N",
    )
    fit_group.add_argument(
        "--eval-every",
        type=int,
        default=None,
        help=f"Updates between checkpoints. (default: {DEFAULTS.training.eval_every})",
        metavar="N",
    )
    fit_group.add_argument(
        "--seed",
        type=int,
        default=None,
        help=f"Base seed. (default: {DEFAULTS.training.seed})",
    )
    fit_group.add_argument(
        "--net-shape",
        default=None,
        help="Layer sizes, e.g. 1,40,40,40,1. "
        f"(default: {','.join(map(str, DEFAULTS.training.net_shape))})",
        metavar="SIZES",
    )
    fit_group.add_argument(
        "--learning-rate",
        type=float,
        default=None,
        help=f"Adam learning rate. (default: {DEFAULTS.training.learning_rate})",
        metavar="RATE",
    )

    output_group = parser.add_argument_group("Output Settings")
    output_group.add_argument(
        "--metrics",
        dest="metrics_enabled",
        action="store_true",
        default=None,
        help="Write a Prometheus textfile with run metrics into the output "
        "directory.",
    )
    if sweep:
        output_group.add_argument(
            "--workers",
            type=int,
            default=None,
            help=f"Cells to run in parallel processes. (default: {DEFAULTS.workers})",
            metavar="N",
        )


def build_parser(app_version: str = "unknown") -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="broadband-fit",
        description="Fit broadband signals with per-segment spectral networks "
        "and compare against frequency-shift and plain network baselines.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {app_version}"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    fit_parser = subparsers.add_parser(
        "fit", help="Run one method at one delta_omega and write its artifacts."
    )
    _add_experiment_arguments(fit_parser, sweep=False)

    sweep_parser = subparsers.add_parser(
        "sweep", help="Run every method x delta_omega cell and a combined CSV."
    )
    _add_experiment_arguments(sweep_parser, sweep=True)

    signal_parser = subparsers.add_parser(
        "signal", help="Write a signal's samples and half-spectrum as CSV."
    )
    _add_experiment_arguments(signal_parser, sweep=False)

    plot_parser = subparsers.add_parser("plot", help="Render result CSVs as SVG.")
    plot_parser.add_argument(
        "csv", nargs="+", help="Convergence or reconstruction CSV files."
    )
    plot_parser.add_argument(
        "--kind",
        choices=[kind.value for kind in PlotKind],
        default=PlotKind.CONVERGENCE.value,
        help="Plot kind. (default: convergence)",
    )
    plot_parser.add_argument(
        "-o", "--output", required=True, help="SVG file to write.", metavar="PATH"
    )
    plot_parser.add_argument("--title", default=None, help="Figure title.")
    plot_parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="Increase verbosity."
    )
    return parser


def _run_command(args: argparse.Namespace) -> None:
    if args.command == "plot":
        if args.verbose:
            logging.basicConfig(level=logging.DEBUG, force=True)
        render_plot(
            [Path(p) for p in args.csv], Path(args.output), args.kind, args.title
        )
        return

    settings = load_settings_from_cli(args)
    setup_logging(settings.logging)

    if args.command == "signal":
        dump_signal(settings.signal, settings.output_dir)
        return

    with MetricsRecorder(settings.metrics) as recorder:
        if args.command == "fit":
            several_widths = (
                "delta_omega" in settings.model_fields_set
                and len(settings.delta_omega) > 1
            )
            if len(settings.methods) > 1 or several_widths:
                logger.warning(
                    "fit runs only the first configured method and delta_omega; "
                    "use sweep for the full grid."
                )
            run_fit(settings)
        else:
            asyncio.run(run_sweep(settings))
        recorder.write(Path(settings.output_dir))


def cli_main():
    """Synchronous entry point for the command-line interface."""
    try:
        app_version = version("broadband-fit")
    except PackageNotFoundError:
        app_version = "unknown"

    parser = build_parser(app_version)
    args = parser.parse_args()

    try:
        _run_command(args)
    except ConfigError as e:
        print(f"Error loading configuration: {e}", file=sys.stderr)
        sys.exit(EXIT_USAGE_ERROR)
    except SweepError as e:
        logger.error(str(e))
        sys.exit(EXIT_RUNTIME_ERROR)
    except KeyboardInterrupt:
        logger.info("Run terminated by user.")
        sys.exit(0)
    except Exception as e:
        logger.error(f"{type(e).__name__}: {e}", exc_info=True)
        sys.exit(EXIT_RUNTIME_ERROR)


if __name__ == "__main__":
    cli_main()
