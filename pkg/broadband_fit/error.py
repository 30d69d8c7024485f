from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple

from pydantic import ValidationError
from ruamel.yaml.comments import CommentedMap, CommentedSeq


class ConfigError(Exception):
    """Custom exception for configuration-related errors."""

    pass


class NumericError(ArithmeticError):
    """Raised when a network produces a non-finite output or loss."""

    pass


class SymmetryError(ValueError):
    """Raised when an inverse transform leaves a non-negligible imaginary part."""

    pass


class UnsupportedGridError(ValueError):
    """Raised for sample grids the half-spectrum bookkeeping cannot represent."""

    pass


class IntegrationError(RuntimeError):
    """Raised when the delay-equation integrator leaves the finite range."""

    pass


class RecordParseError(ValueError):
    """Raised when a results CSV does not conform to its schema."""

    pass


class SweepError(RuntimeError):
    """Raised after a sweep finishes with one or more failed cells."""

    def __init__(self, failures: Dict[str, BaseException]):
        self.failures = failures
        lines = [f"{len(failures)} sweep cell(s) failed:"]
        for cell, exc in failures.items():
            lines.append(f"  {cell}: {type(exc).__name__}: {exc}")
        super().__init__("\n".join(lines))


Position = Tuple[int, int]

UNKNOWN_ERROR_MESSAGE = "An unknown validation error occurred."


def config_snippet(
    config_path: Path, position: Position, context_lines: int = 2
) -> Optional[str]:
    """Numbered config lines around `position` (0-based), the offending line marked."""
    try:
        lines = Path(config_path).read_text().splitlines()
    except (OSError, UnicodeDecodeError):
        return None
    if not lines:
        return None

    # Parser marks past the end (e.g. an unclosed flow list) point at the last line.
    line = min(position[0], len(lines) - 1)
    context = max(0, context_lines)
    first, last = max(0, line - context), min(len(lines), line + context + 1)
    return "\n".join(
        f"{'> ' if i == line else '  '}{i + 1:^4}| {lines[i].rstrip()}"
        for i in range(first, last)
    )


def setting_path(loc: Sequence[Any]) -> str:
    """Dotted settings path with list indices in brackets, e.g. delta_omega[1]."""
    path = ""
    for key in loc:
        if isinstance(key, int):
            path += f"[{key}]"
        else:
            path += f".{key}" if path else str(key)
    return path


def locate_setting(config_data: Any, loc: Sequence[Any]) -> Optional[Position]:
    """
    Line and column of the deepest node along `loc` that the YAML file defines.

    Values merged in from command-line flags carry no position, so the search
    stops at the last node that came from the file.
    """
    position: Optional[Position] = None
    node = config_data
    for key in loc:
        try:
            if isinstance(node, CommentedMap):
                position = node.lc.value(key)
            elif isinstance(node, CommentedSeq) and isinstance(key, int):
                position = node.lc.item(key)
            else:
                break
            node = node[key]
        except (KeyError, IndexError, TypeError):
            break
    return position


def describe_setting_error(error: Dict[str, Any]) -> str:
    loc = error.get("loc", ())
    name = next((key for key in reversed(loc) if isinstance(key, str)), "value")
    error_type = error.get("type")
    if error_type == "missing":
        return f"Required field '{name}' is missing"
    if error_type == "extra_forbidden":
        return f"Unexpected field '{name}'"
    if error_type == "enum":
        expected = (error.get("ctx") or {}).get("expected")
        if expected:
            return f"Unknown {name} '{error.get('input')}'; expected {expected}"
    return error.get("msg") or UNKNOWN_ERROR_MESSAGE


def format_validation_error(
    e: ValidationError, config_path: Path, config_data: Any
) -> str:
    """
    Renders every validation error of a settings file, each with the file
    snippet it points at. Consecutive errors on one line share a snippet.
    """
    lines = [f"Configuration Error in '{config_path}':"]
    shown_line: Optional[int] = None
    for error in e.errors():
        loc = tuple(error.get("loc", ()))
        message = describe_setting_error(error)  # type: ignore[arg-type]
        position = locate_setting(config_data, loc)
        if position is None:
            lines += ["", f"Error at '{setting_path(loc)}': {message}"]
            shown_line = None
            continue

        if position[0] != shown_line:
            lines.append("")
            snippet = config_snippet(config_path, position)
            if snippet:
                lines += [snippet, ""]
            shown_line = position[0]
        where = f"line {position[0] + 1} ({setting_path(loc)})"
        lines.append(f"Error at {where}: {message}")
    return "\n".join(lines)
