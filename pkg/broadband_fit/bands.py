"""
Band decomposition for the frequency-shift baseline.

Each band keeps the positive-frequency bins of one segment of the
half-spectrum (no conjugate mirror), which gives a complex analytic band
signal. The band signal is then shifted down by its center frequency. A real
signal is recovered as sum_j 2 * Re[g_j(t) * exp(i w_j t)], with the DC bin
halved inside band 0 so that it is counted once.
"""

import logging
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .error import UnsupportedGridError
from .spectral import ComplexSpectrum, SegmentPlan

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Band:
    index: int
    bins: range
    center_bin: int
    center_frequency: float
    signal: np.ndarray

    @property
    def contains_dc(self) -> bool:
        return self.bins.start == 0


def band_rotation(center_bin: int, n: int, shift: float = 0.0) -> np.ndarray:
    """
    exp(i * w_c * t) at t = (j + shift) * spacing, j = 0..n-1, for the center
    frequency of bin `center_bin` on an n-point grid.
    """
    j = np.arange(n)
    # Reduce the integer phase numerator modulo n to keep the angle small.
    phase = ((center_bin * j) % n + center_bin * shift) / n
    return np.exp(2j * np.pi * phase)


def decompose_bands(spectrum: ComplexSpectrum, plan: SegmentPlan) -> List[Band]:
    """Baseband signals of the retained bands, in ascending band order."""
    if spectrum.n != plan.sample_count:
        raise ValueError(
            f"Spectrum has {spectrum.n} bins, plan expects {plan.sample_count}"
        )
    n = spectrum.n
    if n % 2 == 0:
        raise UnsupportedGridError(
            f"Band decomposition needs an odd sample count, got n={n}"
        )
    half = spectrum.half
    frequencies = spectrum.frequencies()
    bands = []
    for index in range(plan.retained_count):
        bins = plan.bins(index)
        masked = np.zeros(n, dtype=np.complex128)
        masked[bins.start : bins.stop] = half[bins.start : bins.stop]
        if bins.start == 0:
            masked[0] *= 0.5
        analytic = np.fft.ifft(masked)
        center_bin = bins.start + (len(bins) - 1) // 2
        bands.append(
            Band(
                index=index,
                bins=bins,
                center_bin=center_bin,
                center_frequency=float(frequencies[center_bin]),
                signal=analytic * np.conj(band_rotation(center_bin, n)),
            )
        )
    logger.debug(f"Decomposed n={n} signal into {len(bands)} bands")
    return bands


def reassemble(
    bands: Sequence[Band],
    signals: Sequence[np.ndarray],
    n: int,
    shift: float = 0.0,
) -> np.ndarray:
    """
    sum_j 2 * Re[signals[j] * exp(i w_j t)] over the bands in ascending order.

    `signals[j]` holds the baseband values of band j at t = (k + shift) *
    spacing; shift 0 is the sampling grid itself.
    """
    if len(signals) != len(bands):
        raise ValueError(f"Expected {len(bands)} band signals, got {len(signals)}")
    total = np.zeros(n)
    for band, values in zip(bands, signals):
        total += 2.0 * np.real(values * band_rotation(band.center_bin, n, shift))
    return total
