import argparse
from pathlib import Path
from typing import Any, Optional

from pydantic import ValidationError
from ruamel.yaml import YAML
from ruamel.yaml.error import YAMLError

from .config import ExperimentSettings
from .error import ConfigError, config_snippet, format_validation_error

CLI_TO_CONFIG_MAP = {
    "signal": "signal.kind",
    "samples": "signal.n",
    "method": "methods",
    "delta_omega": "delta_omega",
    "updates": "training.updates",
    "eval_every": "training.eval_every",
    "seed": "training.seed",
    "net_shape": "training.net_shape",
    "learning_rate": "training.learning_rate",
    "energy_threshold": "energy_threshold",
    "out": "output_dir",
    "workers": "workers",
    "metrics_enabled": "metrics.enabled",
}


def _set_nested_value(d: dict, key_path: str, value: Any):
    keys = key_path.split(".")
    for key in keys[:-1]:
        d = d.setdefault(key, {})
    d[keys[-1]] = value


def load_config_file(config_path: Path) -> dict:
    """Loads a YAML config file, keeping ruamel position info for error reports."""
    yaml = YAML(typ="rt")
    try:
        with open(config_path, "r") as f:
            return yaml.load(f) or {}
    except FileNotFoundError:
        raise ConfigError(f"Configuration file not found at {config_path}")
    except YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        problem = getattr(e, "problem", e)
        if mark:
            error_messages = [f"YAML Parsing Error in '{config_path}':"]
            snippet = config_snippet(config_path, (mark.line, mark.column))
            if snippet:
                error_messages.append("")
                error_messages.append(snippet)

            error_messages.append("")
            error_messages.append(f"Error at line {mark.line + 1}: {problem}")
            raise ConfigError("\n".join(error_messages))
        else:
            raise ConfigError(f"YAML Parsing Error: {problem}")


def load_settings_from_cli(args: argparse.Namespace) -> ExperimentSettings:
    """
    Builds ExperimentSettings from an optional YAML file overridden by flags.

    Flags left unset (None) keep the file's value or the model default.
    """
    config_path: Optional[Path] = None
    config_data: dict = {}
    if getattr(args, "config", None):
        config_path = Path(args.config)
        config_data = load_config_file(config_path)

    for arg_key, key_path in CLI_TO_CONFIG_MAP.items():
        value = getattr(args, arg_key, None)
        if value is not None:
            _set_nested_value(config_data, key_path, value)

    # Apply verbose setting from CLI to logging configuration
    verbose_level = getattr(args, "verbose", 0) or 0
    if verbose_level > 0:
        config_data.setdefault("logging", {})

        if verbose_level == 1:
            logging_override = {
                "level": "INFO",
                "loggers": {"broadband_fit.fitters": "DEBUG"},
            }
        elif verbose_level == 2:
            logging_override = {"level": "DEBUG", "loggers": {"matplotlib": "INFO"}}
        else:  # verbose_level >= 3:
            logging_override = {"level": "DEBUG", "loggers": {}}

        config_data["logging"].update(logging_override)

    try:
        return ExperimentSettings.model_validate(config_data)
    except ValidationError as e:
        if config_path is None:
            raise ConfigError(f"Invalid settings:\n{e}") from e
        error_message = format_validation_error(e, config_path, config_data)
        raise ConfigError(error_message)
