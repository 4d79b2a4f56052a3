"""
Sampled Action of Loops on the Fiber.

Monodromies of the completed connection are homeomorphisms of the fiber
circle, unrolled to the line by counting passes through ∞. They are
represented by their values on a sorted sample, which is enough for every
check made here:

- the meridian of a filled orbit acts trivially and its parallel sections
  never wrap around ∞,
- the loop on the boundary torus of degeneracy slope acts as a dilation,
  so the action is nontrivial,
- relation words of the filled manifold act trivially,
- a line of negative slope splits the basepoint fiber into consecutive
  half-open intervals, one per pass of a parallel section through ∞.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Sequence

import numpy as np

from holonomy.core.fiber import FiberPoint, as_fiber_point
from holonomy.core.surface import Scene, Window, flow_scaled_lattice, singularities_in_window
from holonomy.core.transport import (
    Crossing,
    East,
    Flow,
    Move,
    North,
    PathSpec,
    ProngCross,
    closure_offset,
    transport_path_full,
)
from holonomy.exceptions import (
    BisectionFailure,
    NoMagnifyingOrbit,
    NotClosed,
    PathThroughSingularity,
    RadiusTooLarge,
)
from holonomy.utils.extended import (
    INF,
    circular_distance,
    format_extended,
    lift,
    respects_circular_order,
)
from holonomy.utils.tolerances import DEFAULT_SEED

logger = logging.getLogger(__name__)


class LoopKind(Enum):
    """Where a loop lives in the punctured manifold."""
    FILLING = "filling"
    WALL = "wall"
    COMMUTATOR = "commutator"
    FREE = "free"


@dataclass(frozen=True)
class LoopWord:
    """A named closed path.

    Attributes:
        name: Label used in reports
        path: Path closing up modulo the lattice and whole flow periods
        kind: Classification of the loop
        orbit_index: Orbit a filling or wall loop belongs to
    """
    name: str
    path: PathSpec
    kind: LoopKind = LoopKind.FREE
    orbit_index: int | None = None

    def __post_init__(self) -> None:
        if self.kind in (LoopKind.FILLING, LoopKind.WALL) and self.orbit_index is None:
            raise ValueError(f"{self.kind.value} loop {self.name!r} needs an orbit index")

    def check_closed(self, scene: Scene) -> None:
        """Raise NotClosed unless the path closes up."""
        closure_offset(scene, self.path)


@dataclass
class SampledHomeo:
    """A monodromy homeomorphism evaluated on a sample.

    Attributes:
        sample_in: Samples in circular order (∞ first, then increasing)
        sample_out: Transported values
        wraps: Net passes through ∞ per sample
        max_deviation: Largest |out − in| over finite samples; inf when a
            finite sample wraps or lands on ∞
        inf_fixed: ∞ maps to ∞ without wrapping
        name: Loop label
    """
    sample_in: list[float]
    sample_out: list[float]
    wraps: list[int]
    max_deviation: float
    inf_fixed: bool
    name: str = ""

    def __repr__(self) -> str:
        return (
            f"SampledHomeo(\n"
            f"  loop={self.name!r},\n"
            f"  samples={len(self.sample_in)},\n"
            f"  max_deviation={self.max_deviation:.3e},\n"
            f"  wraparound={self.wraparound},\n"
            f"  inf_fixed={self.inf_fixed}\n"
            f")"
        )

    @property
    def lifted_out(self) -> list[float]:
        return [lift(v, w) for v, w in zip(self.sample_out, self.wraps)]

    @property
    def wraparound(self) -> int:
        return max((abs(w) for w in self.wraps), default=0)

    @property
    def respects_order(self) -> bool:
        """Lifted images of the sorted sample are increasing within one turn."""
        return respects_circular_order(self.lifted_out)

    @property
    def circular_deviation(self) -> float:
        return max(
            (circular_distance(a, b) for a, b in zip(self.sample_in, self.sample_out)),
            default=0.0,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "loop": self.name,
            "samples": [
                [format_extended(a), format_extended(b)]
                for a, b in zip(self.sample_in, self.sample_out)
            ],
            "maxDeviation": format_extended(self.max_deviation),
            "wraparound": self.wraparound,
        }

    def summary(self) -> str:
        lines = [
            "=" * 60,
            f"MONODROMY {self.name}".rstrip(),
            "=" * 60,
            f"Samples:          {len(self.sample_in)}",
            f"Max deviation:    {self.max_deviation:.3e}",
            f"Wraparound:       {self.wraparound}",
            f"∞ fixed:          {self.inf_fixed}",
            f"Order preserved:  {self.respects_order}",
            "=" * 60,
        ]
        return "\n".join(lines)


@dataclass
class FillingMonodromy(SampledHomeo):
    """Meridian monodromy of a filled orbit with its algebraic prediction."""
    orbit_index: int = 0
    radius: float = 0.0
    algebraic_product: float = 1.0

    def to_dict(self) -> dict[str, Any]:
        data = super().to_dict()
        data.update(
            orbit=self.orbit_index,
            radius=self.radius,
            algebraicProduct=self.algebraic_product,
        )
        return data


def circular_sort(samples: Sequence[FiberPoint | float]) -> list[FiberPoint]:
    """Sort samples by their lift, which puts ∞ first."""
    points = [as_fiber_point(s) for s in samples]
    return sorted(points, key=lambda p: lift(p.value, 0))


def default_fiber_samples(count: int = 20, radius: float = 10.0) -> list[float]:
    """``count`` evenly spaced values on [−radius, radius], then ∞."""
    return [float(v) for v in np.linspace(-radius, radius, count)] + [INF]


def sample_monodromy(
    scene: Scene, path: PathSpec, samples: Sequence[FiberPoint | float], name: str = ""
) -> SampledHomeo:
    """Evaluate the completed-connection monodromy of a closed path.

    Raises:
        NotClosed: If the path does not close up
    """
    closure_offset(scene, path)
    ordered = circular_sort(samples)
    sample_in, sample_out, wraps = [], [], []
    deviation = 0.0
    inf_fixed = True
    snap = scene.tolerances.monodromy_tol
    for start in ordered:
        outcome = transport_path_full(scene, path, start)
        value, w = outcome.point.value, outcome.wraps
        if start.is_inf and not outcome.point.is_inf:
            # The image of ∞ comes back through a bisection; snap it when it
            # lands within tolerance of an integer lift.
            lifted = lift(value, w)
            if abs(lifted - round(lifted)) < snap:
                value, w = INF, int(round(lifted))
        sample_in.append(start.value)
        sample_out.append(value)
        wraps.append(w)
        if start.is_inf:
            inf_fixed = inf_fixed and math.isinf(value) and w == 0
        elif math.isinf(value) or w != 0:
            deviation = INF
        else:
            deviation = max(deviation, abs(value - start.value))
    return SampledHomeo(sample_in, sample_out, wraps, deviation, inf_fixed, name)


# ---------------------------------------------------------------------------
# Filling meridians
# ---------------------------------------------------------------------------

def _check_radius(scene: Scene, orbit_index: int, radius: float, flow_time: float) -> None:
    sigma = scene.singularity_position(orbit_index)
    tol = scene.tolerances.event_tol
    depth = scene.lam ** flow_time * radius
    window = Window(
        sigma[0] - radius - tol,
        sigma[0] + radius + tol,
        sigma[1] - depth - radius - tol,
        sigma[1] + radius + tol,
    )
    for hit in singularities_in_window(scene, window):
        if math.hypot(hit.east - sigma[0], hit.north - sigma[1]) > tol:
            raise RadiusTooLarge(
                f"Radius {radius:g} around orbit {orbit_index} reaches the singularity "
                f"at ({hit.east:.6g}, {hit.north:.6g})"
            )


def meridian_loop(scene: Scene, orbit_index: int, radius: float) -> LoopWord:
    """Filling curve of an orbit as a closed path hugging its first point.

    The path makes p clockwise turns around the singularity, each crossing
    the prong above it right to left and the prong below it left to right,
    then follows the flow for mq periods and slides back to the start
    along a stable and an unstable segment.

    Raises:
        ValueError: If radius is not positive
        RadiusTooLarge: If the turns or the closing segments reach another
            singularity
    """
    if radius <= 0:
        raise ValueError(f"Hug radius must be positive, got {radius}")
    orbit = scene.orbit(orbit_index)
    slope = scene.slope(orbit_index)
    periods = orbit.period * slope.q
    _check_radius(scene, orbit_index, radius, periods)

    r = radius
    turn: tuple[Move, ...] = (
        East(-r),
        ProngCross(Crossing.RIGHT_TO_LEFT),
        East(-r),
        North(2 * r),
        East(r),
        ProngCross(Crossing.LEFT_TO_RIGHT),
        East(r),
        North(-2 * r),
    )
    scale = scene.lam ** periods
    closing: tuple[Move, ...] = (Flow(periods), North(scale * r - r), East(r - r / scale))

    sigma = scene.singularity_position(orbit_index)
    base = (sigma[0] + r, sigma[1] - r)
    path = PathSpec(base, 0.0, turn * slope.p + closing)
    return LoopWord(f"meridian[{orbit_index}]", path, LoopKind.FILLING, orbit_index)


def filling_monodromy(
    scene: Scene,
    orbit_index: int,
    hug_radius: float = 0.05,
    samples: Sequence[FiberPoint | float] | None = None,
) -> FillingMonodromy:
    """Monodromy of the completed connection around a filling curve.

    Args:
        scene: Scene
        orbit_index: Filled orbit
        hug_radius: Distance of the meridian from the singularity
        samples: Fiber samples at the basepoint, 20 values on [−10, 10]
            plus ∞ by default

    Returns:
        FillingMonodromy with the sampled action, the wraparound count of
        the parallel sections and the product λ^{mq}·α^{−p}

    Raises:
        RadiusTooLarge: If the meridian would reach another singularity

    Example:
        >>> result = filling_monodromy(scene, 0, hug_radius=0.05)
        >>> result.max_deviation < 1e-6
        True
    """
    loop = meridian_loop(scene, orbit_index, hug_radius)
    samples = default_fiber_samples() if samples is None else samples
    homeo = sample_monodromy(scene, loop.path, samples, loop.name)

    slope = scene.slope(orbit_index)
    periods = scene.orbit(orbit_index).period * slope.q
    product = scene.lam ** periods * slope.alpha ** (-slope.p)

    result = FillingMonodromy(
        sample_in=homeo.sample_in,
        sample_out=homeo.sample_out,
        wraps=homeo.wraps,
        max_deviation=homeo.max_deviation,
        inf_fixed=homeo.inf_fixed,
        name=homeo.name,
        orbit_index=orbit_index,
        radius=hug_radius,
        algebraic_product=product,
    )
    logger.info(
        f"Filling monodromy of orbit {orbit_index} at radius {hug_radius:g}: "
        f"deviation {result.max_deviation:.3e}, wraparound {result.wraparound}"
    )
    return result


# ---------------------------------------------------------------------------
# Nontriviality
# ---------------------------------------------------------------------------

@dataclass
class WitnessReport:
    """Dilation along the degeneracy-slope loop of a magnifying orbit."""
    nontrivial: bool
    witness: LoopWord
    dilation_factor: float
    expected_factor: float
    homeo: SampledHomeo

    def to_dict(self) -> dict[str, Any]:
        return {
            "nontrivial": self.nontrivial,
            "witnessLoop": self.witness.path.to_dict(),
            "orbit": self.witness.orbit_index,
            "dilationFactor": self.dilation_factor,
            "expectedFactor": self.expected_factor,
        }


def order_witness(
    scene: Scene, samples: Sequence[FiberPoint | float] | None = None
) -> WitnessReport:
    """Show the action is nontrivial using the first magnifying orbit.

    The loop of degeneracy slope (0; k/gcd(ω, k)) crosses no prongs, so it
    is the flow line through the singularity closed up after m·q_deg
    periods and acts as the dilation x ↦ λ^{m·q_deg} x.

    Raises:
        NoMagnifyingOrbit: If every orbit has q = 0
    """
    candidates = [i for i in range(len(scene.orbits)) if scene.slope(i).magnifying]
    if not candidates:
        raise NoMagnifyingOrbit("Every orbit is fibered; the degeneracy loop is not a witness")
    index = candidates[0]
    orbit = scene.orbit(index)
    q_deg = orbit.prongs // math.gcd(orbit.omega % orbit.prongs, orbit.prongs)
    periods = orbit.period * q_deg

    path = PathSpec(scene.singularity_position(index), 0.0, (Flow(periods),))
    witness = LoopWord(f"degeneracy[{index}]", path, LoopKind.WALL, index)
    samples = default_fiber_samples() if samples is None else samples
    homeo = sample_monodromy(scene, path, samples, witness.name)

    measured = transport_path_full(scene, path, 1.0).point.value
    expected = scene.lam ** periods
    nontrivial = abs(measured - 1.0) > scene.tolerances.monodromy_tol
    logger.info(
        f"Degeneracy loop of orbit {index}: dilation {measured:.10g} "
        f"(λ^{periods} = {expected:.10g})"
    )
    return WitnessReport(nontrivial, witness, measured, expected, homeo)


# ---------------------------------------------------------------------------
# Relations
# ---------------------------------------------------------------------------

def staircase(vector: Sequence[float], steps: int = 4) -> tuple[Move, ...]:
    """Alternating East/North moves adding up to ``vector``."""
    de, dn = vector[0] / steps, vector[1] / steps
    moves: list[Move] = []
    for _ in range(steps):
        moves.extend((East(de), North(dn)))
    return tuple(moves)


def torus_relation(
    scene: Scene, generator: int, base: tuple[float, float], steps: int = 4
) -> list[LoopWord]:
    """The mapping-torus relation t·a·t⁻¹·φ⁻¹(a)⁻¹ for a lattice generator.

    ``a`` is a staircase from ``base`` to base + D·e_generator. The first
    word conjugates it by one flow period, using a stable and an unstable
    segment to get from the flowed base back to ``base``; the second word
    is the flow image of that conjugated staircase, reversed.
    """
    lam = scene.lam
    vector = scene.eigen.dev_matrix[:, generator]
    b_e, b_n = base
    connect = (North(b_n - lam * b_n), East(b_e - b_e / lam))
    conjugated = connect + staircase(vector, steps) + tuple(
        m.inverse() for m in reversed(connect)
    )

    first = PathSpec(base, 0.0, (Flow(1.0),) + conjugated + (Flow(-1.0),))
    image = PathSpec((b_e / lam, b_n * lam), 1.0, conjugated).flowed(-1.0, lam)
    first_end, _ = first.endpoint(lam)
    second = PathSpec(first_end, 0.0, image.inverse(lam).moves)
    return [
        LoopWord(f"t·e{generator}·t⁻¹", first, LoopKind.FREE),
        LoopWord(f"φ⁻¹(e{generator})⁻¹", second, LoopKind.FREE),
    ]


def builtin_relations(
    scene: Scene,
    seed: int = DEFAULT_SEED,
    attempts: int = 25,
    hug_radius: float = 0.05,
) -> dict[str, list[LoopWord]]:
    """Relation words that must act trivially.

    One mapping-torus relation per lattice generator, based at a random
    point chosen so that no move meets a singularity, and the meridian of
    every orbit, shrinking the radius until it fits.

    Raises:
        PathThroughSingularity: If no legal base is found in ``attempts`` tries
    """
    rng = np.random.default_rng(seed)
    relations: dict[str, list[LoopWord]] = {}
    for generator in (0, 1):
        for attempt in range(attempts):
            base = tuple(float(v) for v in scene.eigen.dev_matrix @ rng.random(2))
            words = torus_relation(scene, generator, base)
            try:
                for word in words:
                    transport_path_full(scene, word.path, 0.0)
                break
            except (PathThroughSingularity, BisectionFailure) as exc:
                logger.debug(f"Relation base {base} rejected on attempt {attempt}: {exc}")
        else:
            raise PathThroughSingularity(
                f"No legal base for the e{generator} relation in {attempts} attempts"
            )
        relations[f"torus_e{generator}"] = words

    for index in range(len(scene.orbits)):
        radius = hug_radius
        for _ in range(12):
            try:
                relations[f"filling_{index}"] = [meridian_loop(scene, index, radius)]
                break
            except RadiusTooLarge:
                radius /= 2
        else:
            logger.warning(f"No meridian radius fits around orbit {index}")
    logger.info(f"Built {len(relations)} relation words")
    return relations


def concatenate(scene: Scene, relation: Sequence[LoopWord]) -> PathSpec:
    """Compose words into one path, translating each onto the previous end.

    Raises:
        NotClosed: If a word does not start where the previous one ends,
            up to a lattice translation at the same transverse time
    """
    first = relation[0].path
    moves: list[Move] = list(first.moves)
    end, time = first.endpoint(scene.lam)
    for word in relation[1:]:
        start = word.path
        if abs(start.time - time) > 1e-10:
            raise NotClosed(
                f"Word {word.name!r} starts at time {start.time:g}, previous ends at {time:g}",
                offset=(None, start.time - time),
            )
        diff = np.array(start.base) - np.array(end)
        coords = np.linalg.solve(flow_scaled_lattice(scene, time), diff)
        if np.abs(coords - np.round(coords)).max() > 1e-8:
            raise NotClosed(
                f"Word {word.name!r} does not start at the end of the previous word",
                offset=(diff, 0.0),
            )
        moves.extend(start.moves)
        end, time = PathSpec(end, time, start.moves).endpoint(scene.lam)
    return PathSpec(first.base, first.time, tuple(moves))


def relation_residual(
    scene: Scene,
    relation: Sequence[LoopWord],
    samples: Sequence[FiberPoint | float] | None = None,
) -> float:
    """Largest circular distance moved by the composite of ``relation``.

    Raises:
        NotClosed: If the composite does not close up
    """
    if not relation:
        return 0.0
    path = concatenate(scene, relation)
    samples = default_fiber_samples() if samples is None else samples
    homeo = sample_monodromy(scene, path, samples, "·".join(w.name for w in relation))
    residual = homeo.circular_deviation
    logger.debug(f"Relation {homeo.name}: residual {residual:.3e}")
    return residual


# ---------------------------------------------------------------------------
# Step decomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SlopedLine:
    """Line of negative slope through ``base``, walked east as a staircase."""
    base: tuple[float, float]
    slope: float = -1.0
    time: float = 0.0
    step: float = 0.02

    def __post_init__(self) -> None:
        if not self.slope < 0:
            raise ValueError(f"Line slope must be negative, got {self.slope}")
        if self.step <= 0:
            raise ValueError(f"Staircase step must be positive, got {self.step}")


@dataclass
class StepInterval:
    """Fiber over a pass of the ∞-section, transported to the basepoint.

    Attributes:
        index: j, counting passes through ∞ from the basepoint
        position: Point of the line where the fiber sits
        arc_length: East distance from the basepoint
        lifted: Lifted images over the basepoint of the fiber samples
        lower: Lift of the fiber's ∞ at the basepoint (exactly −j)
    """
    index: int
    position: tuple[float, float]
    arc_length: float
    lifted: list[float] = field(default_factory=list)
    lower: float = 0.0

    @property
    def hull(self) -> tuple[float, float]:
        values = [self.lower] + self.lifted
        return min(values), max(values)

    @property
    def expected(self) -> tuple[float, float]:
        return -float(self.index), 1.0 - self.index


def intervals_disjoint(intervals: Sequence[StepInterval], tol: float = 1e-6) -> bool:
    """Consecutive hulls [lo, hi] are in decreasing order and do not overlap."""
    for upper, lower in zip(intervals, intervals[1:]):
        if lower.hull[1] >= upper.hull[0] + tol:
            return False
    return True


def _fiber_values(count: int) -> list[float]:
    return [math.tan(math.pi * (u - 0.5)) for u in np.linspace(0.03, 0.97, count)]


def _line_step(line: SlopedLine) -> tuple[tuple[Move, ...], tuple[Move, ...]]:
    drop = line.slope * line.step
    return (East(line.step), North(drop)), (North(drop), East(line.step))


def step_decomposition(
    scene: Scene,
    line: SlopedLine,
    count: int,
    fiber_samples: int = 15,
    max_length: float = 500.0,
) -> list[StepInterval]:
    """Decompose the basepoint fiber along a line of negative slope.

    The parallel section through ∞ at the basepoint passes through ∞ again
    at points ℓ_1, ℓ_2, ... of the line. The fiber over ℓ_j, lifted to the
    half-open interval containing the zero-section, is transported back to
    the basepoint, where it lands on [−j, −j + 1).

    Args:
        scene: Scene with at least one magnifying orbit when count > 1
        line: Line to walk
        count: Number of fibers, the basepoint's own included
        fiber_samples: Finite samples per fiber
        max_length: Longest east distance walked looking for passes

    Returns:
        Intervals in order of j

    Raises:
        NoMagnifyingOrbit: If count > 1 and no orbit magnifies
        PathThroughSingularity: If the line meets a singularity both ways
            round a step
    """
    if count < 0:
        raise ValueError(f"Count must be non-negative, got {count}")
    if count == 0:
        return []
    if count > 1 and not scene.has_magnifying:
        raise NoMagnifyingOrbit("Sections over a fibered scene never pass through ∞")

    lam = scene.lam
    values = _fiber_values(fiber_samples)
    base_interval = StepInterval(
        0, line.base, 0.0, [lift(v, 0) for v in values], 0.0
    )
    intervals = [base_interval]

    moves: list[Move] = []
    point = FiberPoint(INF)
    wraps = 0
    here, time = line.base, line.time
    walked = 0.0
    while len(intervals) < count and walked < max_length:
        outcome = None
        for ordering in _line_step(line):
            try:
                outcome = transport_path_full(
                    scene, PathSpec(here, time, ordering), point, wraps
                )
                break
            except PathThroughSingularity:
                continue
        if outcome is None:
            raise PathThroughSingularity(
                f"Line meets a singularity near ({here[0]:.6g}, {here[1]:.6g})", here
            )

        for move_index, distance in outcome.crossings:
            prefix = tuple(moves) + ordering[:move_index] + (East(distance),)
            forward = PathSpec(line.base, line.time, prefix)
            position, _ = forward.endpoint(lam)
            back = forward.inverse(lam)
            j = len(intervals)
            lifted = [transport_path_full(scene, back, v).lifted for v in values]
            intervals.append(
                StepInterval(j, position, position[0] - line.base[0], lifted, -float(j))
            )
            logger.debug(f"Pass {j} through ∞ at ({position[0]:.6g}, {position[1]:.6g})")
            if len(intervals) == count:
                break

        moves.extend(ordering)
        point, wraps = outcome.point, outcome.wraps
        here, time = outcome.base, outcome.time
        walked += line.step

    if len(intervals) < count:
        logger.warning(
            f"Line of length {walked:g} passed through ∞ only {len(intervals) - 1} times"
        )
    if not intervals_disjoint(intervals):
        logger.warning("Transported step intervals overlap")
    return intervals
