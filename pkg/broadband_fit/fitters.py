"""
The three fitting methods.

- vanilla: one network maps x to f(x) directly.
- phasednn: the signal is split into frequency bands, each band is shifted
  to baseband and fitted in the time domain, then shifted back and summed.
- pffdnn: the half-spectrum is split into segments of delta_omega bins, each
  segment's real and imaginary parts are fitted over the bin index, and the
  signal is rebuilt with a single inverse transform.

Every method trains its networks for the same number of updates and
evaluates the reconstruction at checkpoints 0, eval_every, 2 * eval_every,
..., updates.
"""

import logging
import math
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .bands import Band, decompose_bands, reassemble
from .bank import FitTask, LookupBank, ModelBank, NetworkBank
from .config import DEFAULT_ENERGY_THRESHOLD, Method, SignalSpec, TrainingSettings
from .events import checkpoint_recorded
from .seeding import PARTS, derive_seed
from .signals import eval_closed_form, grid, midpoint_grid
from .spectral import (
    ComplexSpectrum,
    SegmentPlan,
    concatenate,
    dft_forward,
    dft_inverse,
    plan_segments,
    shifted_samples,
)

logger = logging.getLogger(__name__)

UNIT_SPAN_BINS = 11


def rmse(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"Length mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise ValueError("rmse needs at least one value")
    diff = a - b
    return math.sqrt(float(np.mean(diff * diff)))


def checkpoint_schedule(updates: int, eval_every: int) -> List[int]:
    """Update counts at which a fit is evaluated; always starts at 0 and ends at N."""
    if updates < 0:
        raise ValueError(f"updates must be non-negative, got {updates}")
    if eval_every < 1:
        raise ValueError(f"eval_every must be at least 1, got {eval_every}")
    schedule = list(range(0, updates + 1, eval_every))
    if schedule[-1] != updates:
        schedule.append(updates)
    return schedule


def normalize_positions(x, spec: SignalSpec) -> np.ndarray:
    """Maps the sampling domain onto [-1, 1)."""
    return 2.0 * (np.asarray(x) - spec.x_start) / (spec.x_end - spec.x_start) - 1.0


def normalize_bins(bins: range) -> np.ndarray:
    """
    Centers a segment's bin indices on 0.

    Segments of up to UNIT_SPAN_BINS bins span [-1, 1]; wider segments keep the
    bin spacing of a UNIT_SPAN_BINS-bin segment and span proportionally more,
    so neighbouring bins stay equally far apart for every delta_omega. A single
    bin maps to 0.
    """
    count = len(bins)
    if count == 1:
        return np.zeros(1)
    spacing = 2.0 / (min(count, UNIT_SPAN_BINS) - 1)
    return spacing * (np.arange(count) - 0.5 * (count - 1))


@dataclass(frozen=True)
class Checkpoint:
    update_count: int
    rmse: float
    relative_rmse: float
    test_rmse: Optional[float]
    train_mse: Optional[float]
    wall_seconds: float


class FitModel(ABC):
    method: Method

    def __init__(self, bank: ModelBank, spec: SignalSpec):
        self.bank = bank
        self.spec = spec

    @property
    def network_count(self) -> int:
        return self.bank.network_count

    @abstractmethod
    def reconstruct(self) -> np.ndarray:
        """Current approximation of the signal on the sampling grid."""
        pass

    @abstractmethod
    def reconstruct_midpoints(self) -> Optional[np.ndarray]:
        """Current approximation halfway between grid points, when available."""
        pass


class VanillaModel(FitModel):
    method = Method.VANILLA

    @property
    def scale(self) -> float:
        return self.bank.tasks[0].scale

    def reconstruct(self) -> np.ndarray:
        return self.bank.predict()[0]

    def reconstruct_midpoints(self) -> Optional[np.ndarray]:
        if isinstance(self.bank, LookupBank):
            return None
        inputs = normalize_positions(midpoint_grid(self.spec), self.spec)
        return self.bank.predict([inputs])[0]


class PhaseModel(FitModel):
    method = Method.PHASEDNN

    def __init__(
        self, bank: ModelBank, spec: SignalSpec, plan: SegmentPlan, bands: List[Band]
    ):
        super().__init__(bank, spec)
        self.plan = plan
        self.bands = bands

    @property
    def band_centers(self) -> List[float]:
        return [band.center_frequency for band in self.bands]

    def band_signals(
        self, inputs: Optional[List[np.ndarray]] = None
    ) -> List[np.ndarray]:
        """Predicted baseband signal of every band, in ascending band order."""
        parts = self.bank.predict(inputs)
        return [parts[2 * j] + 1j * parts[2 * j + 1] for j in range(len(self.bands))]

    def reconstruct(self) -> np.ndarray:
        return reassemble(self.bands, self.band_signals(), self.spec.n)

    def reconstruct_midpoints(self) -> Optional[np.ndarray]:
        if isinstance(self.bank, LookupBank):
            return None
        inputs = normalize_positions(midpoint_grid(self.spec), self.spec)
        signals = self.band_signals([inputs] * len(self.bank.tasks))
        return reassemble(self.bands, signals, self.spec.n, shift=0.5)


class PffModel(FitModel):
    method = Method.PFFDNN

    def __init__(self, bank: ModelBank, spec: SignalSpec, plan: SegmentPlan):
        super().__init__(bank, spec)
        self.plan = plan

    def segment_values(self) -> List[np.ndarray]:
        """Predicted complex spectrum values of every retained segment."""
        parts = self.bank.predict()
        return [
            parts[2 * i] + 1j * parts[2 * i + 1]
            for i in range(self.plan.retained_count)
        ]

    def spectrum(self) -> ComplexSpectrum:
        return concatenate(self.segment_values(), self.plan, self.spec.spacing)

    def reconstruct(self) -> np.ndarray:
        return dft_inverse(self.spectrum())

    def reconstruct_midpoints(self) -> Optional[np.ndarray]:
        return shifted_samples(self.spectrum(), 0.5)


@dataclass(frozen=True)
class FitResult:
    method: Method
    signal: str
    delta_omega: int
    seed: int
    reconstruction: np.ndarray
    convergence: Tuple[Checkpoint, ...]
    wall_seconds: float
    network_count: int
    model: Optional[FitModel] = None

    @property
    def final(self) -> Checkpoint:
        return self.convergence[-1]


def _make_bank(
    tasks: List[FitTask], training: TrainingSettings, oracle: bool
) -> ModelBank:
    if oracle:
        return LookupBank(tasks)
    return NetworkBank(tasks, training)


def _check_samples(samples, spec: SignalSpec) -> np.ndarray:
    samples = np.asarray(samples, dtype=np.float64)
    if samples.shape != (spec.n,):
        raise ValueError(f"Expected {spec.n} samples, got shape {samples.shape}")
    if not np.all(np.isfinite(samples)):
        raise ValueError("Samples must be finite")
    return samples


def _run_checkpoints(
    model: FitModel,
    samples: np.ndarray,
    training: TrainingSettings,
    delta_omega: int,
) -> FitResult:
    spec = model.spec
    truth_midpoints = (
        eval_closed_form(spec, midpoint_grid(spec)) if spec.is_closed_form else None
    )
    signal_rms = math.sqrt(float(np.mean(samples * samples)))

    started = time.perf_counter()
    checkpoints: List[Checkpoint] = []
    reconstruction = samples
    for update_count in checkpoint_schedule(training.updates, training.eval_every):
        model.bank.advance(update_count - model.bank.updates_done)
        reconstruction = model.reconstruct()
        error = rmse(reconstruction, samples)
        if signal_rms > 0:
            relative = error / signal_rms
        else:
            relative = 0.0 if error == 0 else math.inf

        test_error = None
        if truth_midpoints is not None:
            midpoints = model.reconstruct_midpoints()
            if midpoints is not None:
                test_error = rmse(midpoints, truth_midpoints)

        checkpoint = Checkpoint(
            update_count=update_count,
            rmse=error,
            relative_rmse=relative,
            test_rmse=test_error,
            train_mse=model.bank.train_mse() if update_count > 0 else None,
            wall_seconds=time.perf_counter() - started,
        )
        checkpoints.append(checkpoint)
        logger.debug(
            f"{model.method.value} dw={delta_omega} N={update_count}: "
            f"rmse={error:.6g} relative={relative:.6g}"
        )
        checkpoint_recorded.send(
            model.method.value,
            signal_kind=spec.kind.value,
            delta_omega=delta_omega,
            checkpoint=checkpoint,
        )

    return FitResult(
        method=model.method,
        signal=spec.kind.value,
        delta_omega=delta_omega,
        seed=training.seed,
        reconstruction=reconstruction,
        convergence=tuple(checkpoints),
        wall_seconds=time.perf_counter() - started,
        network_count=model.network_count,
        model=model,
    )


def fit_vanilla(
    samples, spec: SignalSpec, training: TrainingSettings, oracle: bool = False
) -> FitResult:
    """Fits the samples with a single network over the normalized position."""
    samples = _check_samples(samples, spec)
    task = FitTask(
        index=0,
        part=PARTS[0],
        inputs=normalize_positions(grid(spec), spec),
        targets=samples,
        seed=derive_seed(training.seed, Method.VANILLA.value, 0, PARTS[0]),
    )
    model = VanillaModel(_make_bank([task], training, oracle), spec)
    logger.info(
        f"Fitting {spec.kind.value} with one network ({training.updates} updates)"
    )
    return _run_checkpoints(model, samples, training, delta_omega=0)


def fit_phasednn(
    samples,
    spec: SignalSpec,
    delta_omega: int,
    training: TrainingSettings,
    energy_threshold: float = DEFAULT_ENERGY_THRESHOLD,
    oracle: bool = False,
) -> FitResult:
    """Fits baseband-shifted band signals in the time domain, two networks per band."""
    samples = _check_samples(samples, spec)
    spectrum = dft_forward(samples, spec.spacing)
    plan = plan_segments(spec.n, delta_omega, spectrum, energy_threshold)
    bands = decompose_bands(spectrum, plan)

    inputs = normalize_positions(grid(spec), spec)
    tasks = []
    for band in bands:
        for part, values in zip(PARTS, (band.signal.real, band.signal.imag)):
            tasks.append(
                FitTask(
                    index=band.index,
                    part=part,
                    inputs=inputs,
                    targets=values,
                    seed=derive_seed(
                        training.seed, Method.PHASEDNN.value, band.index, part
                    ),
                )
            )
    model = PhaseModel(_make_bank(tasks, training, oracle), spec, plan, bands)
    logger.info(
        f"Fitting {spec.kind.value} with {len(bands)} of {plan.segment_count} bands "
        f"at dw={delta_omega} ({model.network_count} networks)"
    )
    return _run_checkpoints(model, samples, training, delta_omega)


def fit_pffdnn(
    samples,
    spec: SignalSpec,
    delta_omega: int,
    training: TrainingSettings,
    energy_threshold: float = DEFAULT_ENERGY_THRESHOLD,
    oracle: bool = False,
) -> FitResult:
    """Fits the half-spectrum segment by segment and inverts it once per checkpoint."""
    samples = _check_samples(samples, spec)
    spectrum = dft_forward(samples, spec.spacing)
    plan = plan_segments(spec.n, delta_omega, spectrum, energy_threshold)

    tasks = []
    for segment in plan.split(spectrum):
        inputs = normalize_bins(segment.bins)
        for part, values in zip(PARTS, (segment.values.real, segment.values.imag)):
            tasks.append(
                FitTask(
                    index=segment.index,
                    part=part,
                    inputs=inputs,
                    targets=values,
                    seed=derive_seed(
                        training.seed, Method.PFFDNN.value, segment.index, part
                    ),
                )
            )
    model = PffModel(_make_bank(tasks, training, oracle), spec, plan)
    logger.info(
        f"Fitting {spec.kind.value} spectrum with {plan.retained_count} of "
        f"{plan.segment_count} segments at dw={delta_omega} "
        f"({model.network_count} networks)"
    )
    return _run_checkpoints(model, samples, training, delta_omega)


def fit(
    method: Method,
    samples,
    spec: SignalSpec,
    delta_omega: int,
    training: TrainingSettings,
    energy_threshold: float = DEFAULT_ENERGY_THRESHOLD,
    oracle: bool = False,
) -> FitResult:
    """Dispatches to the fitter of `method`; vanilla ignores delta_omega."""
    if method == Method.VANILLA:
        return fit_vanilla(samples, spec, training, oracle=oracle)
    fitter = fit_phasednn if method == Method.PHASEDNN else fit_pffdnn
    return fitter(
        samples, spec, delta_omega, training, energy_threshold, oracle=oracle
    )
