"""
Report Writers for holonomy.

CSV for numeric series, JSON for structured reports, DOT for quotient
graphs and SVG for figures. Nothing written carries a timestamp, so two
runs with the same inputs produce identical files.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import TYPE_CHECKING, Any, Mapping

import numpy as np
import pandas as pd

if TYPE_CHECKING:
    from holonomy.core.blowup import SectionTrace
    from holonomy.core.treeglue import TreeQuotient
    from holonomy.io.render import SVG

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"


def _jsonable(value: Any) -> Any:
    """Convert numpy scalars and infinities into plain JSON values."""
    if isinstance(value, Mapping):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if value != value:
            return "nan"
        if value in (float("inf"), float("-inf")):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def _prepare(output_path: str | Path) -> Path:
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    return output_path


def write_frame(frame: pd.DataFrame, output_path: str | Path) -> Path:
    """Write a DataFrame as CSV with a fixed float format.

    Example:
        >>> write_frame(trace.to_frame(), 'out/trace.csv')
    """
    output_path = _prepare(output_path)
    frame.to_csv(output_path, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"Table of {len(frame)} rows written to {output_path}")
    return output_path


def write_trace_csv(trace: SectionTrace, output_path: str | Path) -> Path:
    """Write a section trace with columns t, value, event_flag, orbit_index, factor."""
    return write_frame(trace.to_frame(), output_path)


def write_json_report(report: Mapping[str, Any], output_path: str | Path) -> Path:
    """Write a report mapping as indented JSON with sorted keys."""
    output_path = _prepare(output_path)
    with open(output_path, "w") as f:
        json.dump(_jsonable(report), f, indent=2, sort_keys=True)
        f.write("\n")
    logger.info(f"Report written to {output_path}")
    return output_path


def dumps_report(report: Mapping[str, Any]) -> str:
    """The JSON text :func:`write_json_report` would write."""
    return json.dumps(_jsonable(report), indent=2, sort_keys=True)


def write_dot(quotient: TreeQuotient, output_path: str | Path) -> Path:
    """Write the class graph of a quotient in Graphviz DOT format."""
    output_path = _prepare(output_path)
    output_path.write_text(quotient.to_dot())
    logger.info(f"Class graph of {quotient.num_classes} classes written to {output_path}")
    return output_path


def write_svg(figure: SVG, output_path: str | Path) -> Path:
    """Write a rendered figure."""
    return figure.save(_prepare(output_path))
