"""
Plot-Script Emitters for Tail-Index Studies.

Components:
    BasePlotScript: Abstract base class for script emitters
    CurvePlotScript: Bias (left) and RMSE (right) against k, one line per estimator

Usage:
    >>> from visualizers import CurvePlotScript
    >>> CurvePlotScript(result, "burr(10,4,1) / burr(10,2,1)").write("curves_plot.py")
"""

from .base import BasePlotScript, format_series
from .curves import CurvePlotScript

__all__ = [
    'BasePlotScript',
    'CurvePlotScript',
    'format_series',
]
