"""SVG chart output: structure, determinism, and input validation."""

import pytest

from zopt.harness import SummaryRow
from zopt.svg import comparison_bars, convergence_plot


def test_convergence_plot_basic(tmp_path):
    path = tmp_path / "c.svg"
    convergence_plot({"so": [10.0, 5.0, 1.0], "de": [10.0, 9.0, 8.0]},
                     str(path), title="demo & <check>")
    text = path.read_text()
    assert text.startswith("<svg")
    assert text.rstrip().endswith("</svg>")
    assert text.count("<polyline") == 2
    # strictly positive values get a log axis
    assert "(log)" in text
    # title is escaped, never raw
    assert "demo &amp; &lt;check&gt;" in text
    assert "&amp;amp;" not in text


def test_convergence_plot_linear_axis_with_nonpositive_values(tmp_path):
    path = tmp_path / "c.svg"
    convergence_plot({"so": [3.0, 0.0, -1.0]}, str(path))
    assert "(log)" not in path.read_text()


def test_convergence_plot_deterministic_bytes(tmp_path):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    series = {"so": [4.0, 2.0], "sa": [4.0, 3.0]}
    convergence_plot(series, str(a))
    convergence_plot(series, str(b))
    assert a.read_bytes() == b.read_bytes()


def test_convergence_plot_rejects_empty(tmp_path):
    with pytest.raises(ValueError):
        convergence_plot({}, str(tmp_path / "x.svg"))
    with pytest.raises(ValueError):
        convergence_plot({"so": []}, str(tmp_path / "x.svg"))


def test_comparison_bars_from_summary_rows(tmp_path):
    rows = [
        SummaryRow("so", "sphere", 2, 0.5, 0.1, 120.0),
        SummaryRow("de", "sphere", 2, 2.5, 0.3, 40.0),
    ]
    path = tmp_path / "bars.svg"
    comparison_bars(rows, str(path))
    text = path.read_text()
    # one bar per algorithm per panel
    assert text.count("<rect") == 1 + 4  # background + 2 algos x 2 panels
    assert ">so<" in text and ">de<" in text
    assert "mean final value" in text and "mean elapsed ms" in text


def test_comparison_bars_accepts_tuples_and_rejects_empty(tmp_path):
    path = tmp_path / "bars.svg"
    comparison_bars([("so", 1.0, 2.0)], str(path))
    assert path.is_file()
    with pytest.raises(ValueError):
        comparison_bars([], str(tmp_path / "y.svg"))
