"""
Bias and RMSE Curves Against k.

Renders a CurveResult as two side-by-side panels, bias on the left and RMSE on
the right, one line per estimator: a plain line for the Lynden-Bell estimator
and a dashed line for the two-Hill baseline.
"""

from typing import List

from config import COLORS, PLOT_CONFIG
from experiments import CurveResult

from .base import BasePlotScript, format_series

_PANELS = (("bias", "Bias"), ("rmse", "RMSE"))


class CurvePlotScript(BasePlotScript):
    """
    Plot script for a bias/RMSE study.

    Args:
        result: Aggregated curves to draw
        title: Window title

    Example:
        >>> script = CurvePlotScript(result, "burr(10,4,1) / burr(10,2,1)")
        >>> script.write("curves_plot.py")
    """

    def __init__(self, result: CurveResult, title: str) -> None:
        super().__init__(title)
        self.result = result

    def _pen(self, estimator: str) -> str:
        color = COLORS["estimators"].get(estimator, COLORS["zero_line"])
        style = PLOT_CONFIG["line_styles"].get(estimator, "SolidLine")
        return (
            f"pg.mkPen(color={tuple(color)!r}, width={PLOT_CONFIG['line_width']}, "
            f"style=QtCore.Qt.PenStyle.{style})"
        )

    def body(self) -> List[str]:
        lines: List[str] = []
        for column, (statistic, label) in enumerate(_PANELS):
            panel = f"{statistic}_plot"
            lines += [
                f"{panel} = window.addPlot(row=0, col={column}, title={label!r})",
                f"{panel}.addLegend()",
                f"{panel}.showGrid(x=True, y=True, alpha={COLORS['grid_alpha']})",
                f"{panel}.setLabel('bottom', 'k')",
                f"{panel}.setLabel('left', {label!r})",
            ]
            if statistic == "bias":
                lines.append(f"{panel}.addLine(y=0, pen=pg.mkPen({tuple(COLORS['zero_line'])!r}))")
            for estimator in self.result.estimators():
                ks, values = self.result.curve(estimator, statistic)
                lines.append(
                    f"{panel}.plot({format_series([float(k) for k in ks])}, {format_series(values)}, "
                    f"pen={self._pen(estimator)}, name={estimator!r}, connect='finite')"
                )
            lines.append("")
        return lines
