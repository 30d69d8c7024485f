"""
Experiment orchestration: single fits, method x delta_omega sweeps and
signal dumps, each writing its artifacts into its own run directory.
"""

import asyncio
import dataclasses
import logging
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
import scipy
from ruamel.yaml import YAML

from .config import ExperimentSettings, LoggingSettings, Method, SignalSpec
from .error import SweepError
from .events import fit_completed
from .fitters import FitResult, fit
from .logging import setup_logging
from .records import (
    convergence_records,
    sort_records,
    timing_records,
    write_convergence,
    write_reconstruction,
    write_samples,
    write_spectrum,
    write_timings,
)
from .signals import grid, sample_signal
from .spectral import dft_forward

logger = logging.getLogger(__name__)

CONVERGENCE_FILE = "convergence.csv"
RECONSTRUCTION_FILE = "reconstruction.csv"
TIMINGS_FILE = "timings.csv"
META_FILE = "run.meta"
COMBINED_FILE = "combined.csv"
SAMPLES_FILE = "samples.csv"
SPECTRUM_FILE = "spectrum.csv"


@dataclass(frozen=True)
class RunCell:
    """One (method, delta_omega) combination; vanilla always uses delta_omega 0."""

    method: Method
    delta_omega: int

    @property
    def name(self) -> str:
        return f"{self.method.value}-dw{self.delta_omega}"


@dataclass(frozen=True)
class SweepOutcome:
    results: Dict[RunCell, FitResult]
    combined_path: Path


def sweep_cells(settings: ExperimentSettings) -> List[RunCell]:
    cells: List[RunCell] = []
    for method in settings.methods:
        if method == Method.VANILLA:
            candidates = [RunCell(method, 0)]
        else:
            candidates = [RunCell(method, dw) for dw in settings.delta_omega]
        for cell in candidates:
            if cell not in cells:
                cells.append(cell)
    return cells


def package_versions() -> Dict[str, str]:
    try:
        own = version("broadband-fit")
    except PackageNotFoundError:
        own = "unknown"
    return {
        "broadband-fit": own,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
    }


def write_run_meta(
    path: Path, settings: ExperimentSettings, cell: RunCell, result: FitResult
) -> Path:
    """Echoes the resolved configuration, the network seeds and library versions."""
    network_seeds = {}
    if result.model is not None:
        network_seeds = {
            f"{task.index}/{task.part}": task.seed for task in result.model.bank.tasks
        }
    meta = {
        "run": {
            "method": cell.method.value,
            "delta_omega": cell.delta_omega,
            "seed": result.seed,
            "networks": result.network_count,
            "network_seeds": network_seeds,
        },
        "config": settings.model_dump(mode="json"),
        "versions": package_versions(),
    }
    yaml = YAML()
    yaml.default_flow_style = False
    with open(path, "w") as f:
        yaml.dump(meta, f)
    return path


def run_fit(
    settings: ExperimentSettings,
    run_dir: Optional[Union[str, Path]] = None,
    notify: bool = True,
) -> FitResult:
    """
    Runs the first configured method at the first configured delta_omega and
    writes convergence.csv, timings.csv, reconstruction.csv and run.meta.
    """
    method = settings.methods[0]
    cell = RunCell(method, 0 if method == Method.VANILLA else settings.delta_omega[0])
    run_dir = Path(run_dir) if run_dir else Path(settings.output_dir) / cell.name
    run_dir.mkdir(parents=True, exist_ok=True)
    spec = settings.signal

    logger.info(
        f"Starting {cell.name} on {spec.kind.value} (n={spec.n}, "
        f"N={settings.training.updates}, seed={settings.training.seed})"
    )
    samples = sample_signal(spec)
    try:
        result = fit(
            method,
            samples,
            spec,
            cell.delta_omega,
            settings.training,
            settings.energy_threshold,
        )
    except Exception as e:
        logger.error(f"{cell.name} on {spec.kind.value} failed: {e}")
        raise

    write_convergence(convergence_records(result), run_dir / CONVERGENCE_FILE)
    write_timings(timing_records(result), run_dir / TIMINGS_FILE)
    write_reconstruction(
        grid(spec), samples, result.reconstruction, run_dir / RECONSTRUCTION_FILE
    )
    write_run_meta(run_dir / META_FILE, settings, cell, result)
    logger.info(
        f"Finished {cell.name}: relative RMSE {result.final.relative_rmse:.4g} "
        f"after {result.final.update_count} updates; artifacts in {run_dir}"
    )
    if notify:
        fit_completed.send(method.value, result=result, run_dir=run_dir)
    return result


def _settings_for_cell(
    settings: ExperimentSettings, cell: RunCell
) -> ExperimentSettings:
    update: Dict[str, object] = {"methods": [cell.method]}
    if cell.method != Method.VANILLA:
        update["delta_omega"] = [cell.delta_omega]
    return settings.model_copy(update=update)


def _run_cell(settings: ExperimentSettings, cell: RunCell) -> FitResult:
    result = run_fit(
        _settings_for_cell(settings, cell),
        Path(settings.output_dir) / cell.name,
        notify=False,
    )
    # The trained model stays in the worker; only the summary crosses back.
    return dataclasses.replace(result, model=None)


def _init_worker(logging_settings: LoggingSettings) -> None:
    setup_logging(logging_settings)


async def run_sweep(settings: ExperimentSettings) -> SweepOutcome:
    """
    Runs every (method, delta_omega) cell and writes combined.csv.

    With workers > 1 cells run in a process pool. A failing cell does not
    stop the others; SweepError is raised once all cells have finished.
    """
    cells = sweep_cells(settings)
    output_dir = Path(settings.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    logger.info(
        f"Sweeping {len(cells)} cells on {settings.signal.kind.value} "
        f"with {settings.workers} worker(s)"
    )

    outcomes: List[Union[FitResult, BaseException]]
    if settings.workers > 1:
        loop = asyncio.get_running_loop()
        with ProcessPoolExecutor(
            max_workers=settings.workers,
            initializer=_init_worker,
            initargs=(settings.logging,),
        ) as pool:
            futures = [
                loop.run_in_executor(pool, _run_cell, settings, cell) for cell in cells
            ]
            outcomes = list(await asyncio.gather(*futures, return_exceptions=True))
    else:
        outcomes = []
        for cell in cells:
            try:
                outcomes.append(_run_cell(settings, cell))
            except Exception as e:
                outcomes.append(e)

    results: Dict[RunCell, FitResult] = {}
    failures: Dict[str, BaseException] = {}
    for cell, outcome in zip(cells, outcomes):
        if isinstance(outcome, BaseException):
            logger.error(f"Sweep cell {cell.name} failed: {outcome}")
            failures[cell.name] = outcome
            continue
        results[cell] = outcome
        fit_completed.send(
            cell.method.value, result=outcome, run_dir=output_dir / cell.name
        )

    records = sort_records(
        record for result in results.values() for record in convergence_records(result)
    )
    combined_path = write_convergence(records, output_dir / COMBINED_FILE)
    logger.info(f"Wrote {len(records)} records to {combined_path}")

    if failures:
        raise SweepError(failures)
    return SweepOutcome(results, combined_path)


def dump_signal(spec: SignalSpec, output_dir: Union[str, Path]) -> Tuple[Path, Path]:
    """Writes samples.csv (x, f) and spectrum.csv for the half-spectrum."""
    output_dir = Path(output_dir)
    samples = sample_signal(spec)
    x = grid(spec)
    samples_path = write_samples(x, samples, output_dir / SAMPLES_FILE)
    spectrum_path = write_spectrum(
        dft_forward(samples, spec.spacing), output_dir / SPECTRUM_FILE
    )
    logger.info(f"Wrote {spec.kind.value} samples and spectrum to {output_dir}")
    return samples_path, spectrum_path
