"""
SVG Figures.

Three figures are drawn into a fixed viewport so output bytes depend only
on the inputs:

    blowup    parallel sections over an eastward ray above a field of
              singularities, with a glyph where a section blows up
    stepmap   a line of negative slope with the fibers where the section
              through ∞ passes ∞ again, annotated with their transported
              intervals
    tree      the class graph of a glued tree quotient, layered by depth
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from holonomy.core.action import SlopedLine, StepInterval
from holonomy.core.blowup import EAST, Ray, SectionTrace, sweep_section
from holonomy.core.surface import Scene, Window, window_points
from holonomy.core.treeglue import TreePoint, TreeQuotient, grid_depth
from holonomy.exceptions import WindowTooLarge

logger = logging.getLogger(__name__)

PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
    "#17becf", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
)

PREAMBLE = """\
<?xml version="1.0" standalone="no"?>
<svg width="{width}" height="{height}" viewBox="0 0 {width} {height}" version="1.1" xmlns="http://www.w3.org/2000/svg">
<rect x="0" y="0" width="{width}" height="{height}" style="fill:#ffffff"/>
"""

POSTAMBLE = "</svg>\n"


def _f(v: float) -> str:
    return f"{v:.3f}"


@dataclass(frozen=True)
class Viewport:
    """World rectangle mapped onto a pixel canvas, north up."""
    x0: float
    x1: float
    y0: float
    y1: float
    width: int = 800
    height: int = 500
    pad: int = 40

    def __post_init__(self) -> None:
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError(f"Empty viewport {self}")

    def to_screen(self, x: float, y: float) -> tuple[float, float]:
        sx = self.pad + (x - self.x0) / (self.x1 - self.x0) * (self.width - 2 * self.pad)
        sy = self.pad + (self.y1 - y) / (self.y1 - self.y0) * (self.height - 2 * self.pad)
        return sx, sy

    def clamp_y(self, y: float) -> float:
        return min(max(y, self.y0), self.y1)


class SVG:
    """Accumulates SVG elements in world coordinates."""

    def __init__(self, viewport: Viewport) -> None:
        self.viewport = viewport
        self.commands: list[str] = []

    def render(self) -> str:
        v = self.viewport
        return PREAMBLE.format(width=v.width, height=v.height) + "\n".join(
            self.commands
        ) + ("\n" if self.commands else "") + POSTAMBLE

    def save(self, filename: str | Path) -> Path:
        path = Path(filename)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.render())
        logger.info(f"Figure written to {path}")
        return path

    def circle(self, x: float, y: float, radius: float, fill: str = "#000000") -> None:
        sx, sy = self.viewport.to_screen(x, y)
        self.commands.append(
            f'<circle cx="{_f(sx)}" cy="{_f(sy)}" r="{_f(radius)}" style="fill:{fill};stroke:none"/>'
        )

    def line(self, points: Sequence[tuple[float, float]], color: str = "#000000", width: float = 1.0,
             dash: str | None = None) -> None:
        if len(points) < 2:
            return
        screen = " ".join(
            f"{_f(sx)},{_f(sy)}" for sx, sy in (self.viewport.to_screen(x, y) for x, y in points)
        )
        style = f"fill:none;stroke:{color};stroke-width:{_f(width)}"
        if dash:
            style += f";stroke-dasharray:{dash}"
        self.commands.append(f'<polyline points="{screen}" style="{style}"/>')

    def cross(self, x: float, y: float, size: float = 5.0, color: str = "#000000") -> None:
        sx, sy = self.viewport.to_screen(x, y)
        for dx in (-size, size):
            self.commands.append(
                f'<line x1="{_f(sx - dx)}" y1="{_f(sy - size)}" x2="{_f(sx + dx)}" '
                f'y2="{_f(sy + size)}" style="stroke:{color};stroke-width:1.5"/>'
            )

    def text(self, x: float, y: float, text: str, color: str = "#444444", size: int = 11) -> None:
        sx, sy = self.viewport.to_screen(x, y)
        self.commands.append(
            f'<text x="{_f(sx)}" y="{_f(sy)}" fill="{color}" font-size="{size}" '
            f'font-family="monospace">{text}</text>'
        )

    def axes(self, label_x: str = "east", label_y: str = "north") -> None:
        v = self.viewport
        self.line([(v.x0, v.y0), (v.x1, v.y0)], "#000000", 1.0)
        self.line([(v.x0, v.y0), (v.x0, v.y1)], "#000000", 1.0)
        self.text(v.x1, v.y0, label_x)
        self.text(v.x0, v.y1, label_y)


def _singularity_field(svg: SVG, scene: Scene, time: float = 0.0) -> int:
    v = svg.viewport
    try:
        pos, idx = window_points(scene, Window(v.x0, v.x1, v.y0, v.y1), time)
    except WindowTooLarge as exc:
        logger.warning(f"Singularities not drawn: {exc}")
        return 0
    magnifying = scene.orbit_magnifying
    for (e, n), i in zip(pos, idx):
        svg.circle(float(e), float(n), 2.5, "#000000" if magnifying[i] else "#999999")
    return len(pos)


def _section_polyline(trace: SectionTrace, viewport: Viewport) -> list[tuple[float, float]]:
    b_e, b_n = trace.ray.base
    value = trace.start_value
    points = [(b_e, viewport.clamp_y(b_n + value))]
    for event in trace.events:
        x = b_e + event.time
        points.append((x, viewport.clamp_y(b_n + value)))
        value = event.value_after
        points.append((x, viewport.clamp_y(b_n + value)))
    end = b_e + (trace.t_max if trace.blown_up else trace.status.time)
    points.append((min(end, viewport.x1), viewport.clamp_y(b_n + value)))
    return points


def render_blowup(
    scene: Scene,
    ray: Ray,
    starts: Sequence[float],
    horizon: float = 50.0,
    height: float | None = None,
) -> SVG:
    """Sections from several start values over one ray.

    Sections that blow up end with a cross at the top or bottom edge.
    """
    tallest = max((abs(x) for x in starts), default=1.0)
    height = 2.0 * tallest if height is None else height
    b_e, b_n = ray.base
    svg = SVG(Viewport(b_e, b_e + horizon, b_n - height, b_n + height))
    svg.axes()
    count = _singularity_field(svg, scene, ray.time)

    for i, x in enumerate(starts):
        color = PALETTE[i % len(PALETTE)]
        trace = sweep_section(scene, ray, x, horizon, EAST)
        points = _section_polyline(trace, svg.viewport)
        svg.line(points, color, 1.5)
        if trace.blown_up:
            svg.cross(*points[-1], color=color)
        svg.text(b_e, svg.viewport.clamp_y(b_n + x), f"x={x:g}", color)
    logger.info(f"Blowup figure: {len(starts)} sections over {count} singularities")
    return svg


def render_stepmap(
    scene: Scene,
    line: SlopedLine,
    intervals: Sequence[StepInterval],
    margin: float = 1.0,
) -> SVG:
    """Line of negative slope with the fibers of a step decomposition."""
    b_e, b_n = line.base
    reach = max((iv.arc_length for iv in intervals), default=0.0) + margin
    bottom = b_n + line.slope * reach
    svg = SVG(Viewport(b_e - margin, b_e + reach, bottom - margin, b_n + margin))
    svg.axes()
    _singularity_field(svg, scene, line.time)
    svg.line([(b_e, b_n), (b_e + reach, bottom)], "#000000", 1.0, dash="4,3")

    v = svg.viewport
    for iv in intervals:
        e, n = iv.position
        svg.line([(e, v.y0), (e, v.y1)], "#d62728", 1.0)
        lo, hi = iv.hull
        svg.text(e, n, f"[{lo:.3f}, {hi:.3f})", "#d62728", 10)
    return svg


def render_tree(quotient: TreeQuotient, max_classes: int = 400) -> SVG:
    """Class graph of a quotient, one row per representative depth."""
    n = quotient.n
    depth_of = {
        c: grid_depth(quotient.representative(c), n) for c in range(quotient.num_classes)
    }
    shown = sorted(depth_of, key=lambda c: (depth_of[c], c))[:max_classes]
    rows: dict[int, list[int]] = {}
    for c in shown:
        rows.setdefault(depth_of[c], []).append(c)

    deepest = max(rows, default=0)
    widest = max((len(r) for r in rows.values()), default=1)
    svg = SVG(Viewport(-1.0, float(widest), -float(deepest) - 1.0, 1.0))
    place: dict[int, tuple[float, float]] = {}
    for d, members in rows.items():
        offset = (widest - len(members)) / 2.0
        for i, c in enumerate(members):
            place[c] = (offset + i, -float(d))

    for c in shown:
        for kid in sorted(quotient.children[c]):
            if kid in place:
                svg.line([place[c], place[kid]], "#999999", 0.8)
    for c in shown:
        x, y = place[c]
        svg.circle(x, y, 3.0, "#1f77b4")
        if len(shown) <= 80:
            label = TreePoint.from_grid(quotient.representative(c), quotient.resolution)
            svg.text(x, y, str(label), size=9)
    if len(shown) < quotient.num_classes:
        logger.warning(f"Tree figure shows {len(shown)} of {quotient.num_classes} classes")
    return svg


def blowup_starts() -> list[float]:
    """Start values of the blowup figure: three negative, three positive."""
    return [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0]


def default_ray() -> Ray:
    """A deterministic ray base off every singularity."""
    base = (math.sqrt(2) - 1.0, (math.sqrt(5) - 2.0) / 3.0)
    return Ray(base, 0.0)
