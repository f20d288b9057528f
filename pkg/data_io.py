"""
CSV Ingestion and Result Serialization.

Sample files carry the header ``x,y`` and one observed pair per row (decimal
point, no thousands separators). Curve files carry the header
``k,estimator,replicates,failures,mean,bias,variance,rmse`` with one row per
(k, estimator), k ascending then estimator name ascending; missing moments
(every replicate failed) are written as empty cells.

Line numbers in error messages count the header as line 1.
"""

import math
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

import numpy as np
import pandas as pd

from config import CSV_CONFIG
from errors import DataFormatError, TruncationOrderError
from estimators import ObservedSample
from experiments import CurveCell, CurveResult
from logging_utils import get_logger

logger = get_logger(__name__)

PathLike = Union[str, Path]

_HEADER_LINE = 1


def _read_text_table(path: PathLike) -> pd.DataFrame:
    try:
        return pd.read_csv(path, dtype=str, keep_default_na=False, skip_blank_lines=False)
    except pd.errors.EmptyDataError as e:
        raise DataFormatError(f"{path}: file is empty", line=_HEADER_LINE) from e
    except pd.errors.ParserError as e:
        raise DataFormatError(f"{path}: {' '.join(str(e).split())}") from e


def _check_header(frame: pd.DataFrame, expected: List[str], path: PathLike) -> None:
    found = [str(column).strip() for column in frame.columns]
    if found != expected:
        raise DataFormatError(
            f"{path}: line {_HEADER_LINE}: expected header {','.join(expected)}, got {','.join(found)}",
            line=_HEADER_LINE,
        )


def _cell_text(value: Any) -> str:
    return value.strip() if isinstance(value, str) else ""


def _parse_float(text: str, path: PathLike, line: int, column: str) -> float:
    try:
        value = float(text.strip())
    except ValueError as e:
        raise DataFormatError(f"{path}: line {line}: non-numeric {column} value {text!r}", line=line) from e
    if not math.isfinite(value):
        raise DataFormatError(f"{path}: line {line}: {column} value {text!r} is not finite", line=line)
    return value


def read_sample_csv(path: PathLike) -> ObservedSample:
    """
    Read an observed sample from a CSV file with header ``x,y``.

    Blank lines are skipped.

    Args:
        path: File to read

    Returns:
        The observed sample

    Raises:
        DataFormatError: Bad header or non-numeric cell (with line number)
        TruncationOrderError: A row with x > y (with line number)
        SampleValidationError: Empty sample, nonpositive values or tied x values
    """
    frame = _read_text_table(path)
    _check_header(frame, CSV_CONFIG["sample_columns"], path)

    xs: List[float] = []
    ys: List[float] = []
    for index, (raw_x, raw_y) in enumerate(zip(frame.iloc[:, 0], frame.iloc[:, 1])):
        line = index + _HEADER_LINE + 1
        text_x, text_y = _cell_text(raw_x), _cell_text(raw_y)
        if not text_x and not text_y:
            continue
        x = _parse_float(text_x, path, line, "x")
        y = _parse_float(text_y, path, line, "y")
        if x > y:
            raise TruncationOrderError(f"{path}: line {line}: x = {x!r} exceeds y = {y!r}", row=line)
        xs.append(x)
        ys.append(y)

    sample = ObservedSample(xs, ys)
    logger.info("read %d observed pairs from %s", sample.n, path)
    return sample


def write_sample_csv(sample: ObservedSample, path: PathLike) -> None:
    """Write an observed sample in draw order with header ``x,y``."""
    frame = pd.DataFrame({"x": sample.x_star, "y": sample.y_star}, columns=CSV_CONFIG["sample_columns"])
    frame.to_csv(path, index=False)


def write_curve_csv(result: CurveResult, path: PathLike) -> None:
    """
    Write a CurveResult; the bytes depend only on the result.

    Args:
        result: Aggregated curves
        path: Destination file
    """
    frame = result.to_frame().sort_values(["k", "estimator"], kind="mergesort")
    frame.to_csv(path, index=False)
    logger.info("wrote %d curve rows to %s", len(frame), path)


def _optional(value: Any) -> Optional[float]:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return None
    return float(value)


def read_curve_csv(path: PathLike) -> CurveResult:
    """
    Read a CurveResult written by write_curve_csv.

    Floats are parsed with round-trip precision, so writing and reading back
    reproduces the identical result.

    Raises:
        DataFormatError: Bad header or malformed row
    """
    columns = CSV_CONFIG["curve_columns"]
    try:
        frame = pd.read_csv(path, float_precision="round_trip", dtype={"estimator": str})
    except pd.errors.EmptyDataError as e:
        raise DataFormatError(f"{path}: file is empty", line=_HEADER_LINE) from e
    except (pd.errors.ParserError, ValueError) as e:
        raise DataFormatError(f"{path}: {' '.join(str(e).split())}") from e
    _check_header(frame, columns, path)

    cells: List[CurveCell] = []
    for index, row in enumerate(frame.itertuples(index=False)):
        line = index + _HEADER_LINE + 1
        record: Dict[str, Any] = dict(zip(columns, row))
        try:
            cells.append(
                CurveCell(
                    k=int(record["k"]),
                    estimator=str(record["estimator"]),
                    replicates=int(record["replicates"]),
                    failures=int(record["failures"]),
                    mean=_optional(record["mean"]),
                    bias=_optional(record["bias"]),
                    variance=_optional(record["variance"]),
                    rmse=_optional(record["rmse"]),
                )
            )
        except (TypeError, ValueError) as e:
            raise DataFormatError(f"{path}: line {line}: malformed curve row ({e})", line=line) from e
    return CurveResult(cells=tuple(cells))


def write_report_csv(report: Mapping[str, Any], path: PathLike) -> None:
    """Write a single-row report (e.g. a CLT check) with the mapping keys as header."""
    row = {key: (np.nan if value is None else value) for key, value in report.items()}
    pd.DataFrame([row], columns=list(report)).to_csv(path, index=False)


def _format_value(value: Any) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def format_constants_report(report: Mapping[str, Any]) -> str:
    """
    Render a labeled ``key = value`` report, one entry per line.

    Example:
        >>> print(format_constants_report({"p": 2 / 3, "alpha": 2 / 3}))
        p = 0.6666666667
        alpha = 0.6666666667
    """
    return "\n".join(f"{key} = {_format_value(value)}" for key, value in report.items())
