"""
Base Plot-Script Classes and Common Utilities.

Plots are emitted as self-contained Python scripts: the data is embedded as
literals and the drawing commands use pyqtgraph, so the toolkit itself never
imports a GUI library. Running an emitted script needs the ``plot`` extra
(PySide6 and pyqtgraph).
"""

from abc import ABC, abstractmethod
from pathlib import Path
from typing import List, Optional, Sequence, Union

from config import APP_INFO, COLORS, PLOT_CONFIG
from logging_utils import get_logger

logger = get_logger(__name__)


def format_series(values: Sequence[Optional[float]]) -> str:
    """Render a sequence as a Python list literal; None becomes float('nan')."""
    items = ["float('nan')" if value is None else repr(float(value)) for value in values]
    return "[" + ", ".join(items) + "]"


class BasePlotScript(ABC):
    """
    Abstract base class for plot-script emitters.

    Subclasses implement ``body()`` returning the drawing code that runs after
    the common header (imports, application and window setup) and before the
    common footer (show and event loop).

    Attributes:
        title: Window title

    Example:
        >>> class EmptyPlot(BasePlotScript):
        ...     def body(self):
        ...         return ["plot = window.addPlot(title='empty')"]
        >>> script = EmptyPlot("demo").render()
    """

    def __init__(self, title: str) -> None:
        self.title = title

    def header(self) -> List[str]:
        width, height = PLOT_CONFIG["window_size"]
        return [
            "#!/usr/bin/env python3",
            f'"""Plot emitted by {APP_INFO["name"]} {APP_INFO["version"]}."""',
            "",
            "import pyqtgraph as pg",
            "from PySide6 import QtCore",
            "",
            "app = pg.mkQApp()",
            "pg.setConfigOptions(antialias=True)",
            f"window = pg.GraphicsLayoutWidget(title={self.title!r})",
            f"window.setBackground({tuple(COLORS['plot_bg'])!r})",
            f"window.resize({int(width)}, {int(height)})",
            "",
        ]

    def footer(self) -> List[str]:
        return [
            "",
            "window.show()",
            "",
            "if __name__ == '__main__':",
            "    pg.exec()",
            "",
        ]

    @abstractmethod
    def body(self) -> List[str]:
        """Return the drawing statements of the concrete plot."""
        raise NotImplementedError("Subclasses must implement body method")

    def render(self) -> str:
        """Return the complete script text."""
        return "\n".join(self.header() + self.body() + self.footer())

    def write(self, path: Union[str, Path]) -> Path:
        """
        Write the script to ``path``.

        Returns:
            The written path
        """
        target = Path(path)
        target.write_text(self.render(), encoding="utf-8")
        logger.info("wrote plot script %s", target)
        return target
