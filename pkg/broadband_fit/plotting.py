"""
SVG figures from result CSVs.

Rendering is headless (Agg) and reproducible: the SVG hash salt is fixed,
the date metadata is dropped and path simplification is off, so the same
CSVs always give the same bytes.
"""

import logging
from enum import Enum
from itertools import groupby
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .records import (  # noqa: E402
    ConvergenceRecord,
    read_convergence,
    read_reconstruction,
)

logger = logging.getLogger(__name__)

SVG_RC = {
    "svg.hashsalt": "broadband-fit",
    "svg.fonttype": "none",
    "path.simplify": False,
}


class PlotKind(str, Enum):
    CONVERGENCE = "convergence"
    RECONSTRUCTION = "reconstruction"


def series_id(method: str, delta_omega: int) -> str:
    return f"{method}-dw{delta_omega}"


def _series(
    records: Sequence[ConvergenceRecord],
) -> Dict[Tuple[str, int], List[ConvergenceRecord]]:
    def key(r: ConvergenceRecord) -> Tuple[str, int]:
        return (r.method, r.delta_omega)

    ordered = sorted(records, key=lambda r: (key(r), r.update_count))
    return {k: list(group) for k, group in groupby(ordered, key=key)}


def _plot_convergence(ax, csv_paths: Sequence[Path]) -> int:
    records: List[ConvergenceRecord] = []
    for path in csv_paths:
        records.extend(read_convergence(path))

    series = _series(records)
    for (method, delta_omega), rows in series.items():
        label = method if method == "vanilla" else f"{method} dw={delta_omega}"
        (line,) = ax.plot(
            [r.update_count for r in rows],
            [r.relative_rmse for r in rows],
            label=label,
        )
        line.set_gid(f"series-{series_id(method, delta_omega)}")

    ax.set_yscale("log")
    ax.set_xlabel("update count N")
    ax.set_ylabel("relative RMSE")
    return len(series)


def _plot_reconstruction(ax, csv_paths: Sequence[Path]) -> int:
    count = 0
    for index, path in enumerate(csv_paths):
        rows = read_reconstruction(path)
        x = [r.x for r in rows]
        if index == 0:
            (truth,) = ax.plot(x, [r.f_true for r in rows], label="target")
            truth.set_gid("series-target")
            count += 1
        (fit,) = ax.plot(
            x, [r.f_fit for r in rows], linestyle="--", label=Path(path).parent.name
        )
        fit.set_gid(f"series-fit-{index}")
        count += 1
    ax.set_xlabel("x")
    ax.set_ylabel("f(x)")
    return count


def render_plot(
    csv_paths: Sequence[Path],
    output_path: Path,
    kind: PlotKind = PlotKind.CONVERGENCE,
    title: Optional[str] = None,
) -> Path:
    """
    Draws one line per series and writes a standalone SVG.

    Convergence plots show relative RMSE against update count on a log axis,
    one series per (method, delta_omega). Reconstruction plots overlay the
    fitted signals of one or more runs on the target.
    """
    if not csv_paths:
        raise ValueError("render_plot needs at least one CSV file")
    kind = PlotKind(kind)
    output_path = Path(output_path)

    with plt.rc_context(SVG_RC):
        fig, ax = plt.subplots(figsize=(8, 5))
        try:
            if kind == PlotKind.CONVERGENCE:
                count = _plot_convergence(ax, csv_paths)
            else:
                count = _plot_reconstruction(ax, csv_paths)
            if title:
                ax.set_title(title)
            legend = ax.legend()
            for handle, text in zip(legend.get_lines(), legend.get_texts()):
                handle.set_gid(f"legend-{text.get_text().replace(' dw=', '-dw')}")
            output_path.parent.mkdir(parents=True, exist_ok=True)
            fig.savefig(output_path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)

    logger.info(f"Rendered {kind.value} plot with {count} series to {output_path}")
    return output_path
