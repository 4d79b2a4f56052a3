"""
Input/Output modules for holonomy.
"""

from holonomy.io.readers import (
    load_config,
    load_defaults,
    load_path,
    load_scene,
    load_tolerances,
    path_from_data,
    scene_from_dict,
)
from holonomy.io.render import SVG, Viewport, render_blowup, render_stepmap, render_tree
from holonomy.io.writers import (
    dumps_report,
    write_dot,
    write_frame,
    write_json_report,
    write_svg,
    write_trace_csv,
)

__all__ = [
    "load_config",
    "load_defaults",
    "load_path",
    "load_scene",
    "load_tolerances",
    "path_from_data",
    "scene_from_dict",
    "SVG",
    "Viewport",
    "render_blowup",
    "render_stepmap",
    "render_tree",
    "dumps_report",
    "write_dot",
    "write_frame",
    "write_json_report",
    "write_svg",
    "write_trace_csv",
]
