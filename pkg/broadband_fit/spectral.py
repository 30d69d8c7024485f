"""
Discrete Fourier bookkeeping for real sampled signals.

The forward transform follows the engineering sign convention
F_k = sum_j f_j exp(-2 pi i k j / n); the inverse carries the 1/n factor.
Real signals are handled through their half-spectrum, bins
0..(n - 1) // 2, which is tiled into contiguous segments of delta_omega bins.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np

from .config import DEFAULT_ENERGY_THRESHOLD
from .error import SymmetryError, UnsupportedGridError

logger = logging.getLogger(__name__)

IMAGINARY_TOLERANCE = 1e-8


def half_length_for(n: int) -> int:
    return (n - 1) // 2 + 1


@dataclass(frozen=True)
class ComplexSpectrum:
    values: np.ndarray
    spacing: float = 1.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.complex128)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("A spectrum needs a non-empty 1-D array of values")
        if not self.spacing > 0:
            raise ValueError(f"Sample spacing must be positive, got {self.spacing}")
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def half_length(self) -> int:
        return half_length_for(self.n)

    @property
    def half(self) -> np.ndarray:
        return self.values[: self.half_length]

    def frequencies(self) -> np.ndarray:
        """Angular frequency (radians per signal unit) of each half-spectrum bin."""
        return 2.0 * np.pi * np.arange(self.half_length) / (self.n * self.spacing)


@dataclass(frozen=True)
class SpectrumSegment:
    index: int
    bins: range
    values: np.ndarray


@dataclass(frozen=True)
class SegmentPlan:
    """
    Tiling of the half-spectrum into segments of `delta_omega` bins.

    `retained_count` is the number of leading segments that receive a model;
    the segments after them are treated as identically zero.
    """

    sample_count: int
    delta_omega: int
    segment_count: int
    retained_count: int
    half_length: int

    def __post_init__(self):
        if self.delta_omega < 1:
            raise ValueError(f"delta_omega must be at least 1, got {self.delta_omega}")
        if self.half_length != half_length_for(self.sample_count):
            raise ValueError(
                f"half_length {self.half_length} does not match n={self.sample_count}"
            )
        if self.segment_count != math.ceil(self.half_length / self.delta_omega):
            raise ValueError(
                f"{self.segment_count} segments cannot tile {self.half_length} "
                f"bins at delta_omega={self.delta_omega}"
            )
        if not 0 <= self.retained_count <= self.segment_count:
            raise ValueError(
                f"retained_count {self.retained_count} outside "
                f"[0, {self.segment_count}]"
            )

    def bins(self, index: int) -> range:
        if not 0 <= index < self.segment_count:
            raise IndexError(f"Segment {index} outside [0, {self.segment_count})")
        start = index * self.delta_omega
        return range(start, min(start + self.delta_omega, self.half_length))

    @property
    def retained_bins(self) -> int:
        """Number of half-spectrum bins covered by the retained segments."""
        return min(self.retained_count * self.delta_omega, self.half_length)

    def split(self, spectrum: ComplexSpectrum) -> List[SpectrumSegment]:
        """Cuts the retained segments out of `spectrum`'s half-spectrum."""
        if spectrum.n != self.sample_count:
            raise ValueError(
                f"Spectrum has {spectrum.n} bins, plan expects {self.sample_count}"
            )
        half = spectrum.half
        segments = []
        for index in range(self.retained_count):
            bins = self.bins(index)
            segments.append(
                SpectrumSegment(index, bins, half[bins.start : bins.stop].copy())
            )
        return segments


def dft_forward(samples, spacing: float = 1.0) -> ComplexSpectrum:
    """
    Full length-n DFT of a real sequence.

    Bins above the half-spectrum are filled as conjugates of the lower ones,
    so the result satisfies the real-signal symmetry exactly.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 1 or samples.size == 0:
        raise ValueError("dft_forward needs a non-empty 1-D real sequence")
    n = samples.size
    half = np.fft.rfft(samples)
    values = np.empty(n, dtype=np.complex128)
    values[: half.size] = half
    values[half.size :] = np.conj(half[1 : n - half.size + 1])[::-1]
    return ComplexSpectrum(values, spacing)


def dft_inverse(spectrum: ComplexSpectrum) -> np.ndarray:
    """
    Real inverse DFT.

    Raises SymmetryError when the imaginary residual exceeds
    IMAGINARY_TOLERANCE relative to the largest output magnitude.
    """
    result = np.fft.ifft(spectrum.values)
    residual = float(np.max(np.abs(result.imag)))
    reference = float(np.max(np.abs(result)))
    if residual > IMAGINARY_TOLERANCE * reference:
        raise SymmetryError(
            f"Inverse transform has imaginary residual {residual:.3g} "
            f"(largest magnitude {reference:.3g}); spectrum is not conjugate-symmetric"
        )
    return result.real.copy()


def conjugate_extend(half, n: int, spacing: float = 1.0) -> ComplexSpectrum:
    """
    Builds the full spectrum of a real signal from its half-spectrum.

    Only odd n is supported, since even grids carry an unpaired Nyquist bin.
    The DC bin is taken as its real part.
    """
    if n % 2 == 0:
        raise UnsupportedGridError(
            f"Conjugate extension needs an odd sample count, got n={n}"
        )
    half = np.asarray(half, dtype=np.complex128)
    expected = half_length_for(n)
    if half.shape != (expected,):
        raise ValueError(
            f"Half-spectrum for n={n} needs {expected} values, got {half.shape}"
        )
    values = np.empty(n, dtype=np.complex128)
    values[:expected] = half
    values[0] = half[0].real
    values[expected:] = np.conj(half[1:])[::-1]
    return ComplexSpectrum(values, spacing)


def plan_segments(
    n: int,
    delta_omega: int,
    spectrum: Optional[ComplexSpectrum] = None,
    energy_threshold: float = DEFAULT_ENERGY_THRESHOLD,
    retained_count: Optional[int] = None,
) -> SegmentPlan:
    """
    Tiles the half-spectrum of an n-point signal and picks how many leading
    segments to keep.

    The kept count is the smallest number of leading segments holding at
    least `energy_threshold` of the half-spectrum energy, or `retained_count`
    when given. A threshold of 1 keeps everything up to the last segment with
    nonzero energy. Without a spectrum or an explicit count every segment is
    kept.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if delta_omega < 1:
        raise ValueError(f"delta_omega must be at least 1, got {delta_omega}")
    if not 0 < energy_threshold <= 1:
        raise ValueError(
            f"energy_threshold must lie in (0, 1], got {energy_threshold}"
        )
    half_length = half_length_for(n)
    segment_count = math.ceil(half_length / delta_omega)

    if retained_count is None:
        if spectrum is None:
            retained_count = segment_count
        else:
            if spectrum.n != n:
                raise ValueError(f"Spectrum has {spectrum.n} bins, expected {n}")
            retained_count = _retained_by_energy(
                spectrum.half, delta_omega, energy_threshold
            )

    plan = SegmentPlan(
        sample_count=n,
        delta_omega=delta_omega,
        segment_count=segment_count,
        retained_count=retained_count,
        half_length=half_length,
    )
    logger.debug(
        f"Planned {segment_count} segments of {delta_omega} bins for n={n}, "
        f"keeping {retained_count}"
    )
    return plan


def _retained_by_energy(
    half: np.ndarray, delta_omega: int, energy_threshold: float
) -> int:
    energy = half.real**2 + half.imag**2
    starts = np.arange(0, half.size, delta_omega)
    per_segment = np.add.reduceat(energy, starts)
    cumulative = np.cumsum(per_segment)
    total = cumulative[-1]
    if total == 0:
        return 0
    if energy_threshold >= 1.0:
        # Every segment up to the last one holding any energy at all.
        return int(np.flatnonzero(per_segment)[-1]) + 1
    return int(np.argmax(cumulative >= energy_threshold * total)) + 1


def concatenate(
    segments: Sequence[Union[SpectrumSegment, np.ndarray, Sequence[complex]]],
    plan: SegmentPlan,
    spacing: float = 1.0,
) -> ComplexSpectrum:
    """
    Places approximated values of the retained segments into a zero
    half-spectrum, in ascending segment order, and extends it to the full
    conjugate-symmetric spectrum.
    """
    if len(segments) != plan.retained_count:
        raise ValueError(
            f"Expected {plan.retained_count} segments, got {len(segments)}"
        )
    half = np.zeros(plan.half_length, dtype=np.complex128)
    for index, segment in enumerate(segments):
        values = segment.values if isinstance(segment, SpectrumSegment) else segment
        values = np.asarray(values, dtype=np.complex128)
        bins = plan.bins(index)
        if values.shape != (len(bins),):
            raise ValueError(
                f"Segment {index} needs {len(bins)} values, got {values.shape}"
            )
        half[bins.start : bins.stop] = values
    return conjugate_extend(half, plan.sample_count, spacing)


def truncation_rmse(spectrum: ComplexSpectrum, plan: SegmentPlan) -> float:
    """Exact RMSE between a signal and its reconstruction from the kept segments."""
    half = spectrum.half
    dropped = half[plan.retained_bins :]
    energy = 2.0 * float(np.sum(dropped.real**2 + dropped.imag**2))
    if plan.retained_bins == 0:
        energy -= float(abs(half[0]) ** 2)
    return math.sqrt(max(energy, 0.0)) / spectrum.n


def truncation_bound(spectrum: ComplexSpectrum, plan: SegmentPlan) -> float:
    """sqrt((1 - kept half-spectrum energy fraction) / n) * ||F||_2."""
    energy = spectrum.half.real**2 + spectrum.half.imag**2
    total = float(np.sum(energy))
    if total == 0:
        return 0.0
    fraction = float(np.sum(energy[: plan.retained_bins])) / total
    norm = float(np.linalg.norm(spectrum.values))
    return math.sqrt(max(1.0 - fraction, 0.0) / spectrum.n) * norm


def shifted_samples(spectrum: ComplexSpectrum, shift: float = 0.5) -> np.ndarray:
    """
    Trigonometric interpolation of the signal at x_j + shift * spacing.

    Each half-spectrum bin k is rotated by exp(2 pi i k shift / n) before the
    real inverse, which evaluates the inverse transform between grid points.
    """
    n = spectrum.n
    k = np.arange(spectrum.half_length)
    rotated = spectrum.half * np.exp(2j * np.pi * k * shift / n)
    return dft_inverse(conjugate_extend(rotated, n, spectrum.spacing))
