import re

import pytest

from broadband_fit.error import RecordParseError
from broadband_fit.plotting import PlotKind, render_plot
from broadband_fit.records import (
    ConvergenceRecord,
    write_convergence,
    write_reconstruction,
)


def _write_series(path, method, delta_omega, errors):
    records = [
        ConvergenceRecord(
            method=method,
            signal="f1",
            delta_omega=delta_omega,
            seed=0,
            update_count=10 * i,
            rmse=error,
            relative_rmse=error,
        )
        for i, error in enumerate(errors)
    ]
    return write_convergence(records, path)


def _series_ids(svg: str):
    return re.findall(r'<g id="(series-[^"]+)"', svg)


def test_single_series_has_one_line_with_every_point(tmp_path):
    csv = _write_series(tmp_path / "c.csv", "pffdnn", 11, [1.0, 0.1, 0.01])
    output = render_plot([csv], tmp_path / "plot.svg")
    svg = output.read_text()

    assert _series_ids(svg) == ["series-pffdnn-dw11"]
    match = re.search(r'<g id="series-pffdnn-dw11">\s*<path d="([^"]+)"', svg)
    assert match is not None
    path_data = match.group(1)
    assert path_data.count("M") == 1
    assert path_data.count("L") == 2


def test_two_methods_two_widths_give_four_series(tmp_path):
    paths = [
        _write_series(tmp_path / f"{method}-{dw}.csv", method, dw, [1.0, 0.5])
        for method in ("pffdnn", "phasednn")
        for dw in (11, 21)
    ]
    svg = render_plot(paths, tmp_path / "plot.svg").read_text()

    assert sorted(_series_ids(svg)) == [
        "series-pffdnn-dw11",
        "series-pffdnn-dw21",
        "series-phasednn-dw11",
        "series-phasednn-dw21",
    ]
    legend_ids = re.findall(r'<g id="(legend-[^"]+)"', svg)
    assert sorted(legend_ids) == [
        "legend-pffdnn-dw11",
        "legend-pffdnn-dw21",
        "legend-phasednn-dw11",
        "legend-phasednn-dw21",
    ]


def test_series_from_one_file_are_split_by_method(tmp_path):
    a = _write_series(tmp_path / "a.csv", "vanilla", 0, [1.0, 0.9])
    b = _write_series(tmp_path / "b.csv", "pffdnn", 11, [1.0, 0.1])
    svg = render_plot([a, b], tmp_path / "plot.svg").read_text()
    assert sorted(_series_ids(svg)) == ["series-pffdnn-dw11", "series-vanilla-dw0"]
    assert '<g id="legend-vanilla">' in svg


def test_rendering_is_byte_identical(tmp_path):
    csv = _write_series(tmp_path / "c.csv", "pffdnn", 11, [1.0, 0.1, 0.01])
    first = render_plot([csv], tmp_path / "a.svg", title="f1").read_bytes()
    second = render_plot([csv], tmp_path / "b.svg", title="f1").read_bytes()
    assert first == second


def test_reconstruction_plot(tmp_path):
    run_dir = tmp_path / "pffdnn-dw11"
    csv = write_reconstruction(
        [0.0, 1.0, 2.0], [0.0, 1.0, 0.0], [0.1, 0.9, 0.1], run_dir / "r.csv"
    )
    svg = render_plot(
        [csv], tmp_path / "r.svg", kind=PlotKind.RECONSTRUCTION
    ).read_text()
    assert _series_ids(svg) == ["series-target", "series-fit-0"]
    assert '<g id="legend-pffdnn-dw11">' in svg


def test_render_plot_needs_paths(tmp_path):
    with pytest.raises(ValueError):
        render_plot([], tmp_path / "plot.svg")


def test_render_plot_rejects_malformed_csv(tmp_path):
    csv = tmp_path / "c.csv"
    csv.write_text("a,b\n1,2\n")
    with pytest.raises(RecordParseError):
        render_plot([csv], tmp_path / "plot.svg")
    assert not (tmp_path / "plot.svg").exists()
