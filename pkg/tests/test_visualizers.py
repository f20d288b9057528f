"""Tests for the emitted pyqtgraph plot scripts."""

import pytest

from experiments import CurveCell, CurveResult
from visualizers import BasePlotScript, CurvePlotScript, format_series


@pytest.fixture
def result():
    return CurveResult(
        cells=(
            CurveCell(10, "gardes_stupfler", 5, 0, 0.3, 0.05, 0.01, 0.11),
            CurveCell(10, "lynden_bell_hill", 5, 5, None, None, None, None),
            CurveCell(20, "gardes_stupfler", 5, 0, 0.28, 0.03, 0.008, 0.094),
            CurveCell(20, "lynden_bell_hill", 5, 0, 0.26, 0.01, 0.006, 0.078),
        )
    )


def test_format_series():
    assert format_series([1.0, None, 2.5]) == "[1.0, float('nan'), 2.5]"
    assert format_series([]) == "[]"


class TestCurvePlotScript:
    def test_script_compiles(self, result):
        text = CurvePlotScript(result, "burr(10,4,1) / burr(10,2,1)").render()
        compile(text, "curves_plot.py", "exec")

    def test_two_panels(self, result):
        text = CurvePlotScript(result, "demo").render()
        assert "bias_plot = window.addPlot(row=0, col=0, title='Bias')" in text
        assert "rmse_plot = window.addPlot(row=0, col=1, title='RMSE')" in text
        assert "bias_plot.addLine(y=0" in text
        assert "rmse_plot.addLine" not in text

    def test_line_styles_per_estimator(self, result):
        lines = CurvePlotScript(result, "demo").render().splitlines()
        baseline = [line for line in lines if "name='gardes_stupfler'" in line]
        lynden_bell = [line for line in lines if "name='lynden_bell_hill'" in line]
        assert len(baseline) == len(lynden_bell) == 2
        assert all("PenStyle.DashLine" in line for line in baseline)
        assert all("PenStyle.SolidLine" in line for line in lynden_bell)

    def test_missing_cells_become_nan(self, result):
        text = CurvePlotScript(result, "demo").render()
        assert "[float('nan'), 0.01]" in text
        assert "connect='finite'" in text

    def test_write(self, result, tmp_path):
        path = CurvePlotScript(result, "demo").write(tmp_path / "plot.py")
        assert path.read_text(encoding="utf-8").startswith("#!/usr/bin/env python3")


def test_base_class_is_abstract():
    with pytest.raises(TypeError):
        BasePlotScript("demo")  # pylint: disable=abstract-class-instantiated
