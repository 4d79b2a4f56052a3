"""
Parallel Transport Along Polygonal Paths.

Paths are built from four generator moves in developing coordinates:

    East(dx)       along a stable leaf; the fiber value is carried across
                   unstable prongs by the section engine
    North(dy)      along an unstable leaf; the θ-image is fixed, so x ↦ x − dy
    Flow(dt)       along the suspension flow; x ↦ λ^{dt} x and the picture
                   rescales by diag(λ^{-dt}, λ^{dt})
    ProngCross     across the prong the base sits on

A prong crossing moving left to right past a singularity at height h > 0
stretches the part of the fiber beyond h by α; at h < 0 the part beyond h is
contracted by 1/α. Right to left is the exact inverse. Points of the fiber
at the singularity's own height map to themselves.

Transverse time travels with the path state, not with the fiber point.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Sequence, Union

import numpy as np

from holonomy.core.blowup import (
    EAST,
    WEST,
    Ray,
    full_section_east,
    full_section_west,
    sweep_section,
)
from holonomy.core.fiber import FiberPoint, Side, as_fiber_point
from holonomy.core.surface import (
    Scene,
    SingularityHit,
    Window,
    flow_scaled_lattice,
    singularities_in_window,
    singularities_on_vertical,
)
from holonomy.exceptions import (
    BlowupError,
    NotClosed,
    NotOnProng,
    PathThroughSingularity,
    RectangleNotClear,
)
from holonomy.utils.extended import INF, format_extended, lift

logger = logging.getLogger(__name__)

Point = tuple[float, float]


class Crossing(Enum):
    """Direction of a prong crossing."""
    LEFT_TO_RIGHT = "LR"
    RIGHT_TO_LEFT = "RL"

    def inverse(self) -> Crossing:
        if self is Crossing.LEFT_TO_RIGHT:
            return Crossing.RIGHT_TO_LEFT
        return Crossing.LEFT_TO_RIGHT


@dataclass(frozen=True)
class East:
    dx: float

    def inverse(self) -> East:
        return East(-self.dx)


@dataclass(frozen=True)
class North:
    dy: float

    def inverse(self) -> North:
        return North(-self.dy)


@dataclass(frozen=True)
class Flow:
    dt: float

    def inverse(self) -> Flow:
        return Flow(-self.dt)


@dataclass(frozen=True)
class ProngCross:
    direction: Crossing

    def inverse(self) -> ProngCross:
        return ProngCross(self.direction.inverse())


Move = Union[East, North, Flow, ProngCross]


def move_to_dict(move: Move) -> dict[str, Any]:
    if isinstance(move, East):
        return {"east": move.dx}
    if isinstance(move, North):
        return {"north": move.dy}
    if isinstance(move, Flow):
        return {"flow": move.dt}
    return {"cross": move.direction.value}


def _advance(base: Point, time: float, move: Move, lam: float) -> tuple[Point, float]:
    e, n = base
    if isinstance(move, East):
        return (e + move.dx, n), time
    if isinstance(move, North):
        return (e, n + move.dy), time
    if isinstance(move, Flow):
        scale = lam ** move.dt
        return (e / scale, n * scale), time + move.dt
    return base, time


@dataclass(frozen=True)
class PathSpec:
    """Polygonal path: base point, starting transverse time and moves.

    Attributes:
        base: Starting point (east, north) in developing coordinates
        time: Suspension-flow time of the starting picture
        moves: Generator moves applied in order
    """
    base: Point
    time: float = 0.0
    moves: tuple[Move, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "base", (float(self.base[0]), float(self.base[1])))
        object.__setattr__(self, "moves", tuple(self.moves))

    def __len__(self) -> int:
        return len(self.moves)

    def endpoint(self, lam: float) -> tuple[Point, float]:
        """Base point and transverse time after all moves."""
        base, time = self.base, self.time
        for move in self.moves:
            base, time = _advance(base, time, move, lam)
        return base, time

    def waypoints(self, lam: float) -> list[tuple[Point, float]]:
        points = [(self.base, self.time)]
        for move in self.moves:
            points.append(_advance(*points[-1], move, lam))
        return points

    def then(self, moves: Iterable[Move]) -> PathSpec:
        return PathSpec(self.base, self.time, self.moves + tuple(moves))

    def inverse(self, lam: float) -> PathSpec:
        base, time = self.endpoint(lam)
        return PathSpec(base, time, tuple(m.inverse() for m in reversed(self.moves)))

    def flowed(self, dt: float, lam: float) -> PathSpec:
        """Image of the path under the flow for time ``dt``."""
        scale = lam ** dt
        moves: list[Move] = []
        for move in self.moves:
            if isinstance(move, East):
                moves.append(East(move.dx / scale))
            elif isinstance(move, North):
                moves.append(North(move.dy * scale))
            else:
                moves.append(move)
        return PathSpec((self.base[0] / scale, self.base[1] * scale), self.time + dt, tuple(moves))

    def to_dict(self) -> dict[str, Any]:
        return {
            "base": list(self.base),
            "time": self.time,
            "moves": [move_to_dict(m) for m in self.moves],
        }


def invert_path(scene: Scene, path: PathSpec) -> PathSpec:
    """Reverse path: starts at the end of ``path`` and retraces it."""
    return path.inverse(scene.lam)


# ---------------------------------------------------------------------------
# Generator transports
# ---------------------------------------------------------------------------

def transport_flow(scene: Scene, dt: float, x: FiberPoint | float) -> FiberPoint:
    """Flow arcs dilate the fiber by λ^{dt}; ∞ is fixed."""
    point = as_fiber_point(x)
    if point.is_inf:
        return point
    return point.with_value(scene.lam ** dt * point.value)


def transport_north(
    scene: Scene,
    dy: float,
    x: FiberPoint | float,
    base: Point | None = None,
    time: float = 0.0,
) -> FiberPoint:
    """Move the base north by ``dy`` keeping the θ-image fixed.

    Raises:
        PathThroughSingularity: If ``base`` is given and the segment meets
            a singularity
    """
    point = as_fiber_point(x)
    if base is not None:
        _check_vertical(scene, base, dy, time)
    if point.is_inf:
        return point
    return point.with_value(point.value - dy)


def transport_east_clear(
    scene: Scene,
    dx: float,
    x: FiberPoint | float,
    base: Point = (0.0, 0.0),
    time: float = 0.0,
) -> FiberPoint:
    """Isometric transport across a rectangle free of singularities.

    Raises:
        RectangleNotClear: If a singularity lies strictly between the two
            fibers at a height strictly between 0 and x
    """
    point = as_fiber_point(x)
    if dx == 0 or point.is_inf or point.value == 0:
        return point
    tol = scene.tolerances.event_tol
    e0, e1 = sorted((base[0], base[0] + dx))
    n0, n1 = sorted((base[1], base[1] + point.value))
    for hit in singularities_in_window(scene, Window(e0, e1, n0, n1), time):
        inside_e = e0 + tol < hit.east < e1 - tol
        inside_n = n0 + tol < hit.north < n1 - tol
        if inside_e and inside_n:
            raise RectangleNotClear(
                f"Singularity at ({hit.east:.6g}, {hit.north:.6g}) inside transport rectangle"
            )
    return point


def transport_prong_cross(
    scene: Scene,
    orbit_index: int,
    height: float,
    direction: Crossing,
    x: FiberPoint | float,
) -> FiberPoint:
    """Carry a fiber point across the prong of a singularity at ``height``.

    Args:
        scene: Scene holding the dilation factor of the orbit
        orbit_index: Orbit of the singularity
        height: Signed height of the singularity above the base, nonzero
        direction: LEFT_TO_RIGHT or RIGHT_TO_LEFT
        x: Fiber point; its side tag, if any, must match the direction

    Returns:
        Transported point with the side tag flipped

    Raises:
        NotOnProng: If height is 0 or the side tag is on the far side already

    Example:
        >>> transport_prong_cross(scene, 0, 1.0, Crossing.LEFT_TO_RIGHT, 2.0).value
        2.2123...
    """
    point = as_fiber_point(x)
    if height == 0:
        raise NotOnProng("Prong crossing needs a singularity at nonzero height")
    expected = Side.LEFT if direction is Crossing.LEFT_TO_RIGHT else Side.RIGHT
    if point.side is not None and point.side is not expected:
        raise NotOnProng(f"Cannot cross {direction.value} from side {point.side.value}")
    side = expected.flipped()
    if point.is_inf:
        return FiberPoint(INF, side)

    alpha = scene.alpha(orbit_index)
    factor = alpha if direction is Crossing.LEFT_TO_RIGHT else 1.0 / alpha
    value = point.value
    if height > 0 and value > height:
        value = height + factor * (value - height)
    elif height < 0 and value < height:
        value = height + (value - height) / factor
    return FiberPoint(value, side)


# ---------------------------------------------------------------------------
# Path walking
# ---------------------------------------------------------------------------

def _check_horizontal(scene: Scene, base: Point, dx: float, time: float) -> None:
    tol = scene.tolerances.event_tol
    e0, e1 = sorted((base[0], base[0] + dx))
    window = Window(e0 - tol, e1 + tol, base[1] - tol, base[1] + tol)
    hits = singularities_in_window(scene, window, time)
    if hits:
        raise PathThroughSingularity(
            f"East move {dx:.6g} from ({base[0]:.6g}, {base[1]:.6g}) meets a singularity",
            hits[0].position,
        )


def _check_vertical(scene: Scene, base: Point, dy: float, time: float) -> None:
    tol = scene.tolerances.event_tol
    n0, n1 = sorted((base[1], base[1] + dy))
    window = Window(base[0] - tol, base[0] + tol, n0 - tol, n1 + tol)
    hits = singularities_in_window(scene, window, time)
    if hits:
        raise PathThroughSingularity(
            f"North move {dy:.6g} from ({base[0]:.6g}, {base[1]:.6g}) meets a singularity",
            hits[0].position,
        )


def prong_at(scene: Scene, base: Point, time: float) -> SingularityHit | None:
    """Nearest singularity on the vertical through ``base``, if any."""
    height = scene.tolerances.prong_height
    hits = singularities_on_vertical(scene, base[0], base[1] - height, base[1] + height, time)
    if not hits:
        return None
    return min(hits, key=lambda hit: abs(hit.north - base[1]))


@dataclass(frozen=True)
class PathOutcome:
    """End state of a walk: transported point, wrap count, base and time.

    ``crossings`` lists (move index, distance along the move) for every place
    the section passed through ∞ after leaving a finite value.
    """
    point: FiberPoint
    wraps: int
    base: Point
    time: float
    crossings: tuple[tuple[int, float], ...] = ()

    @property
    def lifted(self) -> float:
        return lift(self.point.value, self.wraps)


def _move_east(
    scene: Scene,
    base: Point,
    time: float,
    dx: float,
    point: FiberPoint,
    full: bool,
) -> tuple[FiberPoint, int, float | None]:
    direction = EAST if dx > 0 else WEST
    _check_horizontal(scene, base, dx, time)
    ray = Ray(base, time)
    include_start = (point.side is Side.LEFT and direction == EAST) or (
        point.side is Side.RIGHT and direction == WEST
    )
    wraps = 0
    crossing = None
    if full:
        section = full_section_east if direction == EAST else full_section_west
        result = section(scene, ray, point, abs(dx), include_start)
        value, wraps = result.point.value, result.wraps
        if not point.is_inf and result.branch != "section":
            crossing = result.t_max
    elif point.is_inf:
        value = INF
    else:
        trace = sweep_section(scene, ray, point.value, abs(dx), direction, include_start)
        if trace.blown_up:
            raise BlowupError(
                trace.t_max, ray.point_at(trace.t_max, direction), trace.final_value
            )
        value = trace.final_value

    landing = (base[0] + dx, base[1])
    side = None
    if prong_at(scene, landing, time) is not None:
        side = Side.LEFT if direction == EAST else Side.RIGHT
    return FiberPoint(value, side), wraps, crossing


def _walk(
    scene: Scene, path: PathSpec, x: FiberPoint | float, full: bool, wraps: int = 0
) -> PathOutcome:
    point = as_fiber_point(x)
    base, time = path.base, path.time
    crossings: list[tuple[int, float]] = []
    for index, move in enumerate(path.moves):
        if isinstance(move, East):
            if move.dx != 0:
                point, dw, hit_inf = _move_east(scene, base, time, move.dx, point, full)
                wraps += dw
                if hit_inf is not None:
                    crossings.append((index, hit_inf))
        elif isinstance(move, North):
            point = transport_north(scene, move.dy, point, base, time)
        elif isinstance(move, Flow):
            point = transport_flow(scene, move.dt, point)
        else:
            hit = prong_at(scene, base, time)
            if hit is None:
                raise NotOnProng(
                    f"No prong through ({base[0]:.6g}, {base[1]:.6g}) at τ={time:g}"
                )
            point = transport_prong_cross(
                scene, hit.orbit_index, hit.north - base[1], move.direction, point
            )
        base, time = _advance(base, time, move, scene.lam)
    return PathOutcome(point, wraps, base, time, tuple(crossings))


def transport_path(scene: Scene, path: PathSpec, x: FiberPoint | float) -> FiberPoint:
    """Transport x along ``path`` with the partial connection.

    Raises:
        BlowupError: If the section escapes to infinity during an East move
        PathThroughSingularity: If a move meets a singularity
        NotOnProng: If a ProngCross is requested away from a prong
    """
    return _walk(scene, path, x, full=False).point


def transport_path_full(
    scene: Scene, path: PathSpec, x: FiberPoint | float, wraps: int = 0
) -> PathOutcome:
    """Transport x along ``path`` with the completed connection, counting wraps."""
    return _walk(scene, path, x, full=True, wraps=wraps)


# ---------------------------------------------------------------------------
# Loops
# ---------------------------------------------------------------------------

def closure_offset(scene: Scene, path: PathSpec) -> tuple[np.ndarray, int]:
    """Lattice translation and period shift closing a loop.

    Raises:
        NotClosed: If the end point differs from the start by anything other
            than a lattice vector of the starting picture and an integer time
    """
    tol = 1e-8
    end, end_time = path.endpoint(scene.lam)
    shift = end_time - path.time
    periods = round(shift)
    if abs(shift - periods) > tol:
        raise NotClosed(f"Loop changes transverse time by {shift:.6g}", offset=(None, shift))
    diff = np.array(end) - np.array(path.base)
    lattice = np.linalg.solve(flow_scaled_lattice(scene, path.time), diff)
    rounded = np.round(lattice)
    if np.abs(lattice - rounded).max() > tol:
        raise NotClosed(
            f"Loop ends at offset ({diff[0]:.6g}, {diff[1]:.6g}), not a lattice vector",
            offset=(diff, shift),
        )
    return rounded.astype(int), int(periods)


@dataclass
class LoopReport:
    """Samples transported around a closed loop."""
    pairs: list[tuple[FiberPoint, FiberPoint]]
    wraps: list[int]
    max_deviation: float
    inf_fixed: bool
    name: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "loop": self.name,
            "samples": [
                [format_extended(a.value), format_extended(b.value)] for a, b in self.pairs
            ],
            "maxDeviation": format_extended(self.max_deviation),
            "wraparound": max((abs(w) for w in self.wraps), default=0),
            "infFixed": self.inf_fixed,
        }


def loop_monodromy(
    scene: Scene,
    loop: PathSpec,
    samples: Sequence[FiberPoint | float],
    full: bool = False,
    name: str = "",
) -> LoopReport:
    """Transport samples around a closed loop and measure the deviation.

    Args:
        scene: Scene
        loop: Path closing up modulo the lattice and whole flow periods
        samples: Fiber points to transport
        full: Use the completed connection instead of the partial one
        name: Label carried into the report

    Returns:
        LoopReport with max |out − in| over finite samples

    Raises:
        NotClosed: If the loop does not close
    """
    closure_offset(scene, loop)
    pairs: list[tuple[FiberPoint, FiberPoint]] = []
    wraps: list[int] = []
    deviation = 0.0
    inf_fixed = True
    for sample in samples:
        start = as_fiber_point(sample)
        if full:
            outcome = transport_path_full(scene, loop, start)
            end, w = outcome.point, outcome.wraps
        else:
            end, w = transport_path(scene, loop, start), 0
        pairs.append((start, end))
        wraps.append(w)
        if start.is_inf:
            inf_fixed = inf_fixed and end.is_inf
        elif end.is_inf or w != 0:
            deviation = INF
        else:
            deviation = max(deviation, abs(end.value - start.value))
    logger.debug(f"Loop {name or '<unnamed>'}: deviation {deviation:.3g}, ∞ fixed {inf_fixed}")
    return LoopReport(pairs, wraps, deviation, inf_fixed, name)


def rectangle_loop(base: Point, width: float, height: float, time: float = 0.0) -> PathSpec:
    """Counterclockwise rectangle East·North·West·South from ``base``."""
    return PathSpec(base, time, (East(width), North(height), East(-width), North(-height)))


def default_samples(count: int = 20, radius: float = 10.0, with_inf: bool = True) -> list[FiberPoint]:
    """Evenly spaced samples on [−radius, radius], plus ∞."""
    values = np.linspace(-radius, radius, count)
    points = [FiberPoint(float(v)) for v in values]
    if with_inf:
        points.append(FiberPoint(INF))
    return points
