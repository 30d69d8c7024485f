"""
CSV artifacts of fits and signal dumps.

Floats are written with 17 significant digits and read back with pandas'
round-trip parser, so records survive a write/read cycle unchanged.
"""

import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Type, TypeVar

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .error import RecordParseError
from .fitters import FitResult
from .spectral import ComplexSpectrum

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"

CONVERGENCE_COLUMNS = [
    "method",
    "signal",
    "delta_omega",
    "seed",
    "update_count",
    "rmse",
    "relative_rmse",
    "test_rmse",
    "train_mse",
]
TIMING_COLUMNS = [
    "method",
    "signal",
    "delta_omega",
    "seed",
    "update_count",
    "wall_seconds",
]
RECONSTRUCTION_COLUMNS = ["x", "f_true", "f_fit"]
SAMPLE_COLUMNS = ["x", "f"]
SPECTRUM_COLUMNS = ["k", "omega", "magnitude", "real", "imag"]


class RecordModel(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ConvergenceRecord(RecordModel):
    method: str
    signal: str
    delta_omega: int = Field(ge=0)
    seed: int = Field(ge=0)
    update_count: int = Field(ge=0)
    rmse: float = Field(ge=0)
    relative_rmse: float = Field(ge=0)
    test_rmse: Optional[float] = Field(default=None, ge=0)
    train_mse: Optional[float] = Field(default=None, ge=0)


class TimingRecord(RecordModel):
    method: str
    signal: str
    delta_omega: int = Field(ge=0)
    seed: int = Field(ge=0)
    update_count: int = Field(ge=0)
    wall_seconds: float = Field(ge=0)


class ReconstructionRecord(RecordModel):
    x: float
    f_true: float
    f_fit: float


RecordType = TypeVar("RecordType", bound=RecordModel)


def convergence_records(result: FitResult) -> List[ConvergenceRecord]:
    return [
        ConvergenceRecord(
            method=result.method.value,
            signal=result.signal,
            delta_omega=result.delta_omega,
            seed=result.seed,
            update_count=checkpoint.update_count,
            rmse=checkpoint.rmse,
            relative_rmse=checkpoint.relative_rmse,
            test_rmse=checkpoint.test_rmse,
            train_mse=checkpoint.train_mse,
        )
        for checkpoint in result.convergence
    ]


def timing_records(result: FitResult) -> List[TimingRecord]:
    return [
        TimingRecord(
            method=result.method.value,
            signal=result.signal,
            delta_omega=result.delta_omega,
            seed=result.seed,
            update_count=checkpoint.update_count,
            wall_seconds=checkpoint.wall_seconds,
        )
        for checkpoint in result.convergence
    ]


def sort_records(records: Iterable[ConvergenceRecord]) -> List[ConvergenceRecord]:
    """Orders records by (method, delta_omega, update_count)."""
    return sorted(
        records, key=lambda r: (r.method, r.delta_omega, r.update_count)
    )


def write_frame(frame: pd.DataFrame, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.debug(f"Wrote {len(frame)} rows to {path}")
    return path


def write_records(
    records: Sequence[RecordModel], columns: List[str], path: Path
) -> Path:
    frame = pd.DataFrame([r.model_dump() for r in records], columns=columns)
    return write_frame(frame, path)


def read_frame(path: Path, columns: List[str]) -> pd.DataFrame:
    """Reads a CSV and checks that its header is exactly `columns`."""
    path = Path(path)
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise RecordParseError(f"Cannot parse '{path}': {e}") from e
    if list(frame.columns) != columns:
        raise RecordParseError(
            f"'{path}' line 1: expected columns {columns}, "
            f"got {list(frame.columns)}"
        )
    return frame


def _plain(value: Any) -> Any:
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def read_records(
    path: Path, model: Type[RecordType], columns: List[str]
) -> List[RecordType]:
    frame = read_frame(path, columns)
    records = []
    for row_number, row in enumerate(frame.to_dict("records")):
        data: Dict[str, Any] = {key: _plain(value) for key, value in row.items()}
        try:
            records.append(model.model_validate(data))
        except ValidationError as e:
            # Header is line 1, so data row i sits on line i + 2.
            problems = "; ".join(
                f"{'.'.join(map(str, err['loc']))}: {err['msg']}" for err in e.errors()
            )
            raise RecordParseError(
                f"'{path}' line {row_number + 2}: {problems}"
            ) from e
    return records


def write_convergence(records: Sequence[ConvergenceRecord], path: Path) -> Path:
    return write_records(records, CONVERGENCE_COLUMNS, path)


def read_convergence(path: Path) -> List[ConvergenceRecord]:
    return read_records(path, ConvergenceRecord, CONVERGENCE_COLUMNS)


def write_timings(records: Sequence[TimingRecord], path: Path) -> Path:
    return write_records(records, TIMING_COLUMNS, path)


def read_timings(path: Path) -> List[TimingRecord]:
    return read_records(path, TimingRecord, TIMING_COLUMNS)


def write_reconstruction(x, f_true, f_fit, path: Path) -> Path:
    frame = pd.DataFrame(
        {"x": x, "f_true": f_true, "f_fit": f_fit}, columns=RECONSTRUCTION_COLUMNS
    )
    return write_frame(frame, path)


def read_reconstruction(path: Path) -> List[ReconstructionRecord]:
    return read_records(path, ReconstructionRecord, RECONSTRUCTION_COLUMNS)


def write_samples(x, f, path: Path) -> Path:
    return write_frame(pd.DataFrame({"x": x, "f": f}, columns=SAMPLE_COLUMNS), path)


def write_spectrum(spectrum: ComplexSpectrum, path: Path) -> Path:
    """Writes the half-spectrum: bin, angular frequency, magnitude and parts."""
    half = spectrum.half
    frame = pd.DataFrame(
        {
            "k": np.arange(spectrum.half_length),
            "omega": spectrum.frequencies(),
            "magnitude": np.abs(half),
            "real": half.real,
            "imag": half.imag,
        },
        columns=SPECTRUM_COLUMNS,
    )
    return write_frame(frame, path)
