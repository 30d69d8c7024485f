import logging
from typing import Callable, Dict

import numpy as np

from .config import ChirpSettings, SignalKind, SignalSpec
from .mackey_glass import integrate_mackey_glass

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


def _sine_on_polynomial(x: np.ndarray, spec: SignalSpec) -> np.ndarray:
    return 0.1 * x**3 - 0.1 * x**2 - 0.5 * x + 0.3 + np.sin(50.0 * x)


def _enso(x: np.ndarray, spec: SignalSpec) -> np.ndarray:
    return (
        4.7 * np.cos(TWO_PI * x / 12.0)
        + 1.1 * np.sin(TWO_PI * x / 12.0)
        + 0.2 * np.cos(TWO_PI * x / 1.7)
        + 2.7 * np.sin(TWO_PI * x / 1.7)
        + 2.1 * np.cos(TWO_PI * x / 0.7)
        + 2.1 * np.sin(TWO_PI * x / 0.7)
        - 0.5
    )


def _chirp(x: np.ndarray, spec: SignalSpec) -> np.ndarray:
    settings: ChirpSettings = spec.chirp
    rate = (settings.f_end - settings.f0) / settings.period
    # The cubic form sweeps with x**3 both inside the rate term and outside it.
    power = x if settings.linear else x**3
    return np.cos(np.pi * (settings.f0 + rate * power) * power)


def _piecewise(x: np.ndarray, spec: SignalSpec) -> np.ndarray:
    low = 10.0 * (np.sin(x) + np.sin(3.0 * x))
    high = 10.0 * (np.sin(23.0 * x) + np.sin(137.0 * x) + np.sin(203.0 * x))
    return np.where(x < 0, low, high)


def _square_wave(x: np.ndarray, spec: SignalSpec) -> np.ndarray:
    return (
        np.sin(x)
        + np.sign(np.sin(13.0 * x))
        + np.sign(np.sin(23.0 * x))
        + np.sign(np.sin(47.0 * x))
    )


def _tones(*frequencies: float) -> Callable[[np.ndarray, SignalSpec], np.ndarray]:
    def evaluate(x: np.ndarray, spec: SignalSpec) -> np.ndarray:
        return sum(np.sin(w * x) for w in frequencies)  # type: ignore[return-value]

    return evaluate


CLOSED_FORMS: Dict[SignalKind, Callable[[np.ndarray, SignalSpec], np.ndarray]] = {
    SignalKind.SINE_ON_POLYNOMIAL: _sine_on_polynomial,
    SignalKind.ENSO: _enso,
    SignalKind.CHIRP: _chirp,
    SignalKind.PIECEWISE: _piecewise,
    SignalKind.SQUARE_WAVE: _square_wave,
    SignalKind.F1: _tones(5.0, 7.0, 11.0),
    SignalKind.F2: _tones(17.0, 19.0, 23.0),
    SignalKind.F3: _tones(67.0, 71.0, 73.0),
}


def grid(spec: SignalSpec) -> np.ndarray:
    """The half-open sampling grid x_j = x_start + j * spacing, j = 0..n-1."""
    return spec.x_start + np.arange(spec.n) * spec.spacing


def midpoint_grid(spec: SignalSpec) -> np.ndarray:
    """Points halfway between consecutive sampling points, used as held-out data."""
    return spec.x_start + (np.arange(spec.n) + 0.5) * spec.spacing


def eval_closed_form(spec: SignalSpec, x):
    """Evaluates a closed-form signal at a scalar or an array of points."""
    try:
        formula = CLOSED_FORMS[spec.kind]
    except KeyError:
        raise ValueError(
            f"'{spec.kind.value}' has no closed form; use sample_signal instead"
        ) from None
    values = formula(np.asarray(x, dtype=np.float64), spec)
    return float(values) if np.ndim(values) == 0 else values


def sample_signal(spec: SignalSpec) -> np.ndarray:
    """Samples `spec` on its grid; Mackey-Glass is integrated from x = 0 first."""
    x = grid(spec)
    if spec.is_closed_form:
        return eval_closed_form(spec, x)

    solution = integrate_mackey_glass(spec.mackey_glass, spec.x_end)
    logger.debug(
        f"Sampling Mackey-Glass on [{spec.x_start}, {spec.x_end}) "
        f"after a transient of {spec.x_start}"
    )
    return solution(x)
