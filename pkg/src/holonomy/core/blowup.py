"""
Blowup Engine for Parallel Sections.

A parallel section over an eastward ray starts at fiber value x and stays
constant until the ray passes a magnifying singularity whose height q lies
strictly between 0 and the current value. There the value is pushed to the
other side of the singularity:

    s ↦ q + α (s − q)       (s > 0, moving east)
    s ↦ q + (s − q) / α     (s < 0, moving east)

Westward sweeps are the mirror image: negative values are magnified and
positive ones contracted. Between events the section is constant, so the
sweep is event driven.

Renormalized Frame:

    The sweep runs in a frame F_{-(k+τ)} chosen so that the frame value
    stays in [1/λ, λ]. Singularity positions in the frame are reduced modulo
    the lattice after every renormalization, so coordinates stay O(1) even
    when the section value is near S_big. Frame east distances convert back
    to ray time through the factor λ^{-(k+τ)}.

Completed Connection:

    Past its blowup time a positive section continues from -∞ as the unique
    negative section whose westward blowup happens exactly at the elapsed
    overshoot. That section is located by root finding on its starting value.
"""

from __future__ import annotations

import logging
import math
import weakref
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence, Union

import numpy as np
import pandas as pd
from scipy.optimize import bisect, brentq
from tqdm import tqdm

from holonomy.core.fiber import FiberPoint, as_fiber_point
from holonomy.core.surface import (
    Scene,
    SingularityHit,
    Window,
    nearest_lattice_vector,
    reference_points,
    singularities_in_window,
    window_points,
)
from holonomy.exceptions import BaseOnSingularity, BisectionFailure, NoMagnifyingOrbit
from holonomy.utils.extended import INF
from holonomy.utils.tolerances import DEFAULT_SEED

logger = logging.getLogger(__name__)

EAST = 1
WEST = -1

# Offset below which a frame singularity counts as the one just crossed
_FRAME_EPS = 1e-12

# Range of log|y| searched for the wrapped section
_LOG_VALUE_MIN = -60.0
_LOG_VALUE_MAX = 34.0

_QUICK_SAMPLES = 256
_QUICK_SAFETY = 1.5

# Largest accepted |count/A − κ| of a single ragged rectangle, by area A
DENSITY_LIMITS: dict[float, float] = {10.0: 0.3, 100.0: 0.1, 1000.0: 0.05}
DENSITY_COLUMNS = ["area", "mean_count", "ratio", "deviation", "max_deviation"]


@dataclass(frozen=True)
class Ray:
    """Horizontal ray in developing coordinates at suspension time ``time``."""
    base: tuple[float, float]
    time: float = 0.0

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (*self.base, self.time)):
            raise ValueError(f"Ray must have finite base and time, got {self.base}, {self.time}")

    def point_at(self, distance: float, direction: int = EAST) -> tuple[float, float]:
        return (self.base[0] + direction * distance, self.base[1])

    def shifted(self, distance: float, direction: int = EAST) -> Ray:
        return Ray(self.point_at(distance, direction), self.time)


@dataclass(frozen=True)
class SectionEvent:
    """One push of the section past a singularity.

    Attributes:
        time: Distance along the ray at which the singularity is passed
        hit: The singularity, position in original coordinates
        height: Singularity height relative to the ray
        value_before: Section value just before the push
        value_after: height + factor · (value_before − height)
        factor: α or 1/α
    """
    time: float
    hit: SingularityHit
    height: float
    value_before: float
    value_after: float
    factor: float


@dataclass(frozen=True)
class AliveAt:
    """Section exists up to ``time`` without escaping."""
    time: float


@dataclass(frozen=True)
class BlownUp:
    """Section escapes to ``direction``·∞ at ``t_max`` (± ``error_bound``)."""
    t_max: float
    error_bound: float
    direction: int


SectionStatus = Union[AliveAt, BlownUp]


@dataclass
class SectionTrace:
    """Event log of a parallel section swept along a ray."""
    ray: Ray
    start_value: float
    direction: int
    events: list[SectionEvent]
    status: SectionStatus
    samples: list[tuple[float, float]] = field(default_factory=list)

    def __repr__(self) -> str:
        return (
            f"SectionTrace(\n"
            f"  start_value={self.start_value:.6g},\n"
            f"  direction={'east' if self.direction == EAST else 'west'},\n"
            f"  events={len(self.events)},\n"
            f"  status={self.status}\n"
            f")"
        )

    @property
    def blown_up(self) -> bool:
        return isinstance(self.status, BlownUp)

    @property
    def t_max(self) -> float:
        return self.status.t_max if isinstance(self.status, BlownUp) else INF

    @property
    def final_value(self) -> float:
        return self.events[-1].value_after if self.events else self.start_value

    def value_at(self, t: float, tol: float = 0.0) -> float:
        """Section value after every event strictly before ``t - tol``."""
        value = self.start_value
        for event in self.events:
            if event.time >= t - tol:
                break
            value = event.value_after
        return value

    def to_frame(self) -> pd.DataFrame:
        """Rows for every sample and every event, ordered by time."""
        rows: list[dict[str, Any]] = [
            {"t": t, "value": v, "event_flag": 0, "orbit_index": -1, "factor": 1.0}
            for t, v in self.samples
        ]
        rows += [
            {
                "t": e.time,
                "value": e.value_after,
                "event_flag": 1,
                "orbit_index": e.hit.orbit_index,
                "factor": e.factor,
            }
            for e in self.events
        ]
        df = pd.DataFrame(rows, columns=["t", "value", "event_flag", "orbit_index", "factor"])
        return df.sort_values(["t", "event_flag"], kind="mergesort").reset_index(drop=True)

    def summary(self) -> str:
        lines = [
            "=" * 60,
            "SECTION TRACE",
            "=" * 60,
            f"Ray base:     ({self.ray.base[0]:.6f}, {self.ray.base[1]:.6f}) τ={self.ray.time:g}",
            f"Direction:    {'east' if self.direction == EAST else 'west'}",
            f"Start value:  {self.start_value:.6g}",
            f"Events:       {len(self.events)}",
        ]
        if isinstance(self.status, BlownUp):
            lines.append(
                f"Blown up:     t_max={self.status.t_max:.9f} ± {self.status.error_bound:.1e}"
            )
        else:
            lines.append(f"Alive at:     {self.status.time:g} (value {self.final_value:.6g})")
        lines.append("=" * 60)
        return "\n".join(lines)


@dataclass(frozen=True)
class FullTransport:
    """Result of transporting a fiber point with the completed connection.

    Attributes:
        point: Transported fiber point
        wraps: Net passes through ∞, counted for the line lift
        t_max: Blowup time of the starting section (inf if none)
        branch: "section", "infinity" or "wrapped"
    """
    point: FiberPoint
    wraps: int
    t_max: float
    branch: str


@dataclass(frozen=True)
class ErgodicConstants:
    """Sampled constants for the blowup-rate bounds.

    Attributes:
        kappa: Magnifying singularities per unit area
        a_star: Largest empty ragged rectangle area, times the safety factor
        a_kappa: Area above which sampled counts stay below 2κA, times the
            safety factor
        a_epsilon: Area above which sampled densities stay within ε of κ
        C: Fast blowup constant, t_max(x) < C/S for x > S
        c: Slow blowup constant, t_max(x) ≥ c/S for x < S
        sample_count: Samples drawn per estimate
        seed: RNG seed
    """
    kappa: float
    a_star: float
    a_kappa: float
    a_epsilon: float
    C: float
    c: float
    sample_count: int
    seed: int
    epsilon: float = 0.1

    def summary(self) -> str:
        lines = [
            "=" * 60,
            "ERGODIC CONSTANTS",
            "=" * 60,
            f"kappa:        {self.kappa:g}",
            f"A*:           {self.a_star:.6f}",
            f"A_kappa:      {self.a_kappa:.6f}",
            f"A_epsilon:    {self.a_epsilon:.6f} (ε={self.epsilon:g})",
            f"C:            {self.C:.6f}",
            f"c:            {self.c:.6g}",
            f"Samples:      {self.sample_count} (seed {self.seed})",
            "=" * 60,
        ]
        return "\n".join(lines)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kappa": self.kappa,
            "a_star": self.a_star,
            "a_kappa": self.a_kappa,
            "a_epsilon": self.a_epsilon,
            "epsilon": self.epsilon,
            "C": self.C,
            "c": self.c,
            "sample_count": self.sample_count,
            "seed": self.seed,
        }


@dataclass
class BoundReport:
    """Outcome of checking t_max against C/S and c/S."""
    checks: pd.DataFrame
    violations: int

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "violations": self.violations,
            "checks": int(len(self.checks)),
            "by_s": {
                str(s): int((~group["ok"]).sum())
                for s, group in self.checks.groupby("S", sort=True)
            }
            if len(self.checks)
            else {},
        }


# ---------------------------------------------------------------------------
# Event engine
# ---------------------------------------------------------------------------

_BOUND_CACHE: weakref.WeakKeyDictionary[Scene, float] = weakref.WeakKeyDictionary()


def _blowup_constant(scene: Scene) -> float:
    """Quick estimate of C used for the error bound of blown-up traces."""
    if scene not in _BOUND_CACHE:
        rng = np.random.default_rng(DEFAULT_SEED)
        a_star = max(_empty_rectangle_area(scene, rng) for _ in range(_QUICK_SAMPLES))
        a_star *= _QUICK_SAFETY
        _BOUND_CACHE[scene] = _fast_constant(scene, a_star)
    return _BOUND_CACHE[scene]


def _fast_constant(scene: Scene, a_star: float) -> float:
    if scene.alpha_min is None:
        raise NoMagnifyingOrbit("Scene is fibered: no orbit has q > 0")
    return 2.0 * a_star / (1.0 - 2.0 / (1.0 + scene.alpha_min))


def sweep_section(
    scene: Scene,
    ray: Ray,
    x: float,
    horizon: float,
    direction: int,
    include_start: bool = False,
) -> SectionTrace:
    """Push a finite section along ``ray`` for distance ``horizon``.

    Singularities at the start (within event tolerance) are crossed only when
    ``include_start`` is set; singularities at the far end are never crossed.
    The ray base is not checked against the singular set.
    """
    tol = scene.tolerances
    samples = [(0.0, x)]
    events: list[SectionEvent] = []
    if x == 0.0 or not scene.has_magnifying or horizon <= 0.0:
        samples.append((max(horizon, 0.0), x))
        return SectionTrace(ray, x, direction, events, AliveAt(horizon), samples)

    lam = scene.lam
    alphas = scene.orbit_alphas
    b_e, b_n = ray.base
    magnify = direction * x > 0

    k = math.floor(math.log(abs(x)) / scene.log_lam - ray.time + 0.5)
    scale = lam ** (k + ray.time)
    frame = np.array([b_e * scale, b_n / scale])
    frame -= nearest_lattice_vector(scene, frame)
    s = x / scale
    t = 0.0
    slack = -tol.event_tol * scale if include_start else tol.event_tol * scale
    status: SectionStatus | None = None

    while status is None:
        moved = False
        while abs(s) > lam:
            k += 1
            frame[0] *= lam
            frame[1] /= lam
            s /= lam
            moved = True
        while abs(s) < 1.0 / lam:
            k -= 1
            frame[0] /= lam
            frame[1] *= lam
            s *= lam
            moved = True
        if moved:
            frame -= nearest_lattice_vector(scene, frame)
            scale = lam ** (k + ray.time)

        remaining = (horizon - t) * scale
        if remaining <= 0.0:
            status = AliveAt(horizon)
            break
        width = min(4.0 / abs(s), 1.0, remaining)
        final = width >= remaining

        reach = min(slack, 0.0)
        if direction == EAST:
            e_lo, e_hi = frame[0] + reach, frame[0] + width
        else:
            e_lo, e_hi = frame[0] - width, frame[0] - reach
        n_lo, n_hi = sorted((frame[1], frame[1] + s))
        pos, idx = reference_points(scene, e_lo, e_hi, n_lo, n_hi, magnifying_only=True)

        offsets = (pos[:, 0] - frame[0]) * direction
        heights = pos[:, 1] - frame[1]
        keep = (offsets > slack) & (heights * s > 0) & (np.abs(heights) < abs(s))
        if final:
            keep &= offsets < remaining - tol.event_tol * scale
        else:
            keep &= offsets <= width
        slack = _FRAME_EPS

        if not keep.any():
            frame[0] += direction * width
            t += width / scale
            if final:
                status = AliveAt(horizon)
            continue

        cand = np.flatnonzero(keep)
        j = cand[np.lexsort((np.abs(heights[cand]), offsets[cand]))[0]]
        h = float(heights[j])
        orbit = int(idx[j])
        factor = float(alphas[orbit]) if magnify else 1.0 / float(alphas[orbit])
        s_new = h + factor * (s - h)

        t += float(offsets[j]) / scale
        frame[0] = pos[j, 0]
        hit = SingularityHit((b_e + direction * t, b_n + h * scale), orbit, True)
        value_after = s_new * scale
        events.append(SectionEvent(t, hit, h * scale, s * scale, value_after, factor))
        s = s_new

        if abs(value_after) > tol.s_big:
            bound = _blowup_constant(scene) / tol.s_big
            if bound >= tol.epsilon_time:
                logger.warning(f"Blowup error bound {bound:.3g} exceeds ε_time")
            status = BlownUp(t, bound, 1 if value_after > 0 else -1)

    end = status.t_max if isinstance(status, BlownUp) else horizon
    if not samples or samples[-1][0] != end:
        samples.append((end, events[-1].value_after if events else x))
    logger.debug(
        f"Sweep from {x:.6g} over {horizon:g}: {len(events)} events, status {status}"
    )
    return SectionTrace(ray, x, direction, events, status, samples)


def _check_base(scene: Scene, ray: Ray) -> None:
    tol = scene.tolerances.event_tol
    e, n = ray.base
    if singularities_in_window(scene, Window.around(e, n, tol), ray.time):
        raise BaseOnSingularity(f"Ray base ({e:.6g}, {n:.6g}) is a singularity")


def _finite_start(x: FiberPoint | float) -> float:
    value = as_fiber_point(x).value
    if math.isinf(value):
        raise ValueError("Sections over a ray need a finite starting value")
    return value


def advance_section(
    scene: Scene,
    ray: Ray,
    x: FiberPoint | float,
    horizon: float,
    include_start: bool = False,
) -> SectionTrace:
    """Sweep the parallel section through (ray base, x) eastward.

    Args:
        scene: Scene to sweep in
        ray: Eastward ray
        x: Finite starting value
        horizon: Distance to sweep
        include_start: Cross a prong through the ray base, if any

    Returns:
        SectionTrace ending AliveAt(horizon) or BlownUp(t_max)

    Raises:
        BaseOnSingularity: If the ray base is a singularity

    Example:
        >>> trace = advance_section(scene, Ray((0.3, 0.1)), 1.0, horizon=50.0)
        >>> trace.blown_up
        True
    """
    _check_base(scene, ray)
    return sweep_section(scene, ray, _finite_start(x), horizon, EAST, include_start)


def advance_section_west(
    scene: Scene,
    ray: Ray,
    x: FiberPoint | float,
    horizon: float,
    include_start: bool = False,
) -> SectionTrace:
    """Westward mirror of :func:`advance_section`."""
    _check_base(scene, ray)
    return sweep_section(scene, ray, _finite_start(x), horizon, WEST, include_start)


def _t_max(
    scene: Scene, ray: Ray, x: FiberPoint | float, horizon: float | None, direction: int
) -> float:
    value = as_fiber_point(x).value
    if math.isinf(value):
        return 0.0
    if value * direction <= 0 or not scene.has_magnifying:
        return INF
    horizon = scene.tolerances.horizon if horizon is None else horizon
    return sweep_section(scene, ray, value, horizon, direction).t_max


def t_max_east(
    scene: Scene, ray: Ray, x: FiberPoint | float, horizon: float | None = None
) -> float:
    """Blowup time of the eastward section through x.

    Non-positive values never blow up (inf); ∞ blows up immediately (0).
    Sections that survive the horizon also report inf.
    """
    _check_base(scene, ray)
    return _t_max(scene, ray, x, horizon, EAST)


def t_max_west(
    scene: Scene, ray: Ray, x: FiberPoint | float, horizon: float | None = None
) -> float:
    """Blowup time of the westward section through x (negative values blow up)."""
    _check_base(scene, ray)
    return _t_max(scene, ray, x, horizon, WEST)


# ---------------------------------------------------------------------------
# Completed connection
# ---------------------------------------------------------------------------

def _wrapped_value(scene: Scene, ray: Ray, overshoot: float, direction: int) -> float:
    """Value whose back-sweep from ``ray`` blows up after exactly ``overshoot``."""
    tol = scene.tolerances
    sign = -direction
    back = -direction
    cap = 2.0 * overshoot

    def gap(u: float) -> float:
        trace = sweep_section(scene, ray, sign * math.exp(u), cap, back)
        return (trace.t_max if trace.blown_up else cap) - overshoot

    lo = hi = 0.0
    g_lo = g_hi = gap(0.0)
    step = 2.0
    while g_hi > 0 and hi < _LOG_VALUE_MAX:
        lo, g_lo = hi, g_hi
        hi = min(hi + step, _LOG_VALUE_MAX)
        g_hi = gap(hi)
        step *= 2.0
    step = 2.0
    while g_lo < 0 and lo > _LOG_VALUE_MIN:
        hi, g_hi = lo, g_lo
        lo = max(lo - step, _LOG_VALUE_MIN)
        g_lo = gap(lo)
        step *= 2.0

    if g_lo == 0.0:
        return sign * math.exp(lo)
    if g_hi == 0.0:
        return sign * math.exp(hi)
    if g_lo * g_hi > 0:
        raise BisectionFailure(
            f"No wrapped section with back blowup at {overshoot:.6g}",
            (sign * math.exp(lo), sign * math.exp(hi)),
        )
    xtol = min(tol.bisection_tol, tol.bisection_tol * math.exp(-hi))
    u = brentq(gap, lo, hi, xtol=xtol, maxiter=200)
    return sign * math.exp(u)


def _full_section(
    scene: Scene,
    ray: Ray,
    x: FiberPoint | float,
    t: float,
    direction: int,
    include_start: bool,
) -> FullTransport:
    if t < 0:
        raise ValueError(f"Transport distance must be non-negative, got {t}")
    tol = scene.tolerances
    point = as_fiber_point(x)
    value = point.value
    if t == 0.0:
        return FullTransport(point, 0, INF if not point.is_inf else 0.0, "section")

    if point.is_inf:
        t_max = 0.0
    elif value * direction <= 0 or not scene.has_magnifying:
        trace = sweep_section(scene, ray, value, t, direction, include_start)
        return FullTransport(FiberPoint(trace.final_value), 0, INF, "section")
    else:
        trace = sweep_section(scene, ray, value, t + tol.epsilon_time, direction, include_start)
        if not trace.blown_up:
            return FullTransport(
                FiberPoint(trace.value_at(t, tol.event_tol)), 0, INF, "section"
            )
        t_max = trace.t_max

    if abs(t - t_max) <= tol.epsilon_time:
        if point.is_inf:
            return FullTransport(point, 0, t_max, "infinity")
        return FullTransport(FiberPoint(INF), 1 if direction == EAST else 0, t_max, "infinity")

    wrapped = _wrapped_value(scene, ray.shifted(t, direction), t - t_max, direction)
    if direction == EAST:
        wraps = 0 if point.is_inf else 1
    else:
        wraps = -1
    return FullTransport(FiberPoint(wrapped), wraps, t_max, "wrapped")


def full_section_east(
    scene: Scene,
    ray: Ray,
    x: FiberPoint | float,
    t: float,
    include_start: bool = False,
) -> FullTransport:
    """Completed-connection transport east by ``t`` with wrap bookkeeping.

    Before t_max the ordinary section is followed; within ε_time of t_max
    the result is ∞; after it the value is the negative section whose
    westward blowup from the end point happens after t − t_max.

    Raises:
        BisectionFailure: If the wrapped section cannot be bracketed
    """
    return _full_section(scene, ray, x, t, EAST, include_start)


def full_section_west(
    scene: Scene,
    ray: Ray,
    x: FiberPoint | float,
    t: float,
    include_start: bool = False,
) -> FullTransport:
    """Westward mirror of :func:`full_section_east`."""
    return _full_section(scene, ray, x, t, WEST, include_start)


def full_transport_east(
    scene: Scene, ray: Ray, x: FiberPoint | float, t: float
) -> FiberPoint:
    """Transport x east by ``t`` with the completed connection J."""
    _check_base(scene, ray)
    return full_section_east(scene, ray, x, t).point


def full_transport_west(
    scene: Scene, ray: Ray, x: FiberPoint | float, t: float
) -> FiberPoint:
    """Transport x west by ``t`` with the completed connection J."""
    _check_base(scene, ray)
    return full_section_west(scene, ray, x, t).point


# ---------------------------------------------------------------------------
# Counting and constants
# ---------------------------------------------------------------------------

def ragged_count(
    scene: Scene,
    east0: float,
    east1: float,
    y0: float,
    height: float,
    time: float = 0.0,
) -> tuple[int, float]:
    """Magnifying singularities swept by [east0, east1) flowing north by ``height``.

    Returns:
        (count, area) for the window [east0, east1) × (y0, y0 + height]

    Raises:
        ValueError: If height is negative
        WindowTooLarge: If the window exceeds the enumeration cap
    """
    if height < 0:
        raise ValueError(f"Height must be non-negative, got {height}")
    length = max(east1 - east0, 0.0)
    if height == 0 or length == 0:
        return 0, 0.0
    pos, _ = window_points(scene, Window(east0, east1, y0, y0 + height), time, True)
    return int(len(pos)), length * height


def density_ratios(
    scene: Scene,
    areas: Sequence[float],
    placements: int = 100,
    seed: int = DEFAULT_SEED,
) -> pd.DataFrame:
    """Magnifying count per unit area of randomly placed ragged rectangles.

    Each placement draws a base uniformly in a fundamental domain and a
    width log-uniformly in [1, λ). The ratio count/(κ·area) tends to 1 as
    the area grows, and so does every single placement: ``max_deviation``
    is the worst |count/area − κ| over the placements of one area.

    Returns:
        One row per area with columns area, mean_count, ratio, deviation,
        max_deviation

    Raises:
        NoMagnifyingOrbit: If every slope has q = 0
    """
    if not scene.has_magnifying:
        raise NoMagnifyingOrbit("Scene is fibered: no orbit has q > 0")
    if placements <= 0:
        raise ValueError(f"placements must be positive, got {placements}")
    rng = np.random.default_rng(seed)
    rows = []
    for area in areas:
        counts = np.empty(placements)
        for i in range(placements):
            width = scene.lam ** rng.random()
            e, n = _random_base(scene, rng)
            counts[i] = ragged_count(scene, e, e + width, n, area / width)[0]
        mean = float(counts.mean())
        ratio = mean / (scene.kappa * area)
        worst = float(np.abs(counts / area - scene.kappa).max())
        rows.append(
            {"area": float(area), "mean_count": mean, "ratio": ratio,
             "deviation": abs(ratio - 1.0), "max_deviation": worst}
        )
        logger.debug(
            f"Area {area:g}: mean count {mean:.4f}, ratio {ratio:.4f}, worst {worst:.4f}"
        )
    return pd.DataFrame(rows, columns=DENSITY_COLUMNS)


def density_violations(
    frame: pd.DataFrame, limits: Mapping[float, float] = DENSITY_LIMITS
) -> list[float]:
    """Areas of ``frame`` whose worst placement exceeds its limit.

    Areas without a limit are not checked.
    """
    return [
        float(row.area)
        for row in frame.itertuples()
        if row.area in limits and row.max_deviation > limits[row.area]
    ]


def _random_base(scene: Scene, rng: np.random.Generator) -> tuple[float, float]:
    e, n = scene.eigen.dev_matrix @ rng.random(2)
    return float(e), float(n)


def _empty_rectangle_area(scene: Scene, rng: np.random.Generator) -> float:
    """Area of the tallest empty rectangle over a random log-uniform width."""
    width = scene.lam ** rng.random()
    e, n = _random_base(scene, rng)
    chunk = 4.0 / (width * max(scene.kappa, 1.0))
    floor = n
    while True:
        pos, _ = window_points(scene, Window(e, e + width, floor, floor + chunk), 0.0, True)
        if len(pos):
            return width * (float(pos[:, 1].min()) - n)
        floor += chunk


def estimate_constants(
    scene: Scene,
    sample_count: int = 10_000,
    epsilon: float = 0.1,
    seed: int = DEFAULT_SEED,
    safety_factor: float = 1.5,
    progress: bool = False,
) -> ErgodicConstants:
    """Estimate A*, A_κ and the blowup constants C, c by sampling.

    Widths are drawn log-uniformly in [1, λ); every ragged rectangle can be
    brought to such a width by a power of φ without changing its area.

    Args:
        scene: Scene with at least one magnifying orbit
        sample_count: Rectangles drawn for each estimate
        epsilon: Relative density tolerance for A_ε
        seed: RNG seed
        safety_factor: Multiplier applied to sampled areas
        progress: Show a progress bar

    Returns:
        ErgodicConstants

    Raises:
        NoMagnifyingOrbit: If every slope has q = 0
    """
    if not scene.has_magnifying:
        raise NoMagnifyingOrbit("Scene is fibered: no orbit has q > 0")
    if sample_count <= 0:
        raise ValueError(f"sample_count must be positive, got {sample_count}")

    rng = np.random.default_rng(seed)
    kappa = scene.kappa

    a_star_raw = 0.0
    for _ in tqdm(range(sample_count), desc="empty rectangles", disable=not progress):
        a_star_raw = max(a_star_raw, _empty_rectangle_area(scene, rng))

    worst_kappa = 0.0
    worst_eps = 0.0
    smallest = INF
    for _ in tqdm(range(sample_count), desc="density", disable=not progress):
        area = 10.0 ** rng.uniform(-1.0, 2.0)
        width = scene.lam ** rng.random()
        e, n = _random_base(scene, rng)
        count, _ = ragged_count(scene, e, e + width, n, area / width)
        smallest = min(smallest, area)
        if count >= 2.0 * kappa * area:
            worst_kappa = max(worst_kappa, area)
        if abs(count / area - kappa) > epsilon * kappa:
            worst_eps = max(worst_eps, area)

    a_star = a_star_raw * safety_factor
    a_kappa = (worst_kappa or smallest) * safety_factor
    a_epsilon = (worst_eps or smallest) * safety_factor
    big_c = _fast_constant(scene, a_star)
    small_c = a_kappa / scene.alpha_max ** (2.0 * kappa * a_kappa)

    constants = ErgodicConstants(
        kappa=kappa,
        a_star=a_star,
        a_kappa=a_kappa,
        a_epsilon=a_epsilon,
        C=big_c,
        c=small_c,
        sample_count=sample_count,
        seed=seed,
        epsilon=epsilon,
    )
    logger.info(
        f"Estimated constants: A*={a_star:.4f}, A_κ={a_kappa:.4f}, "
        f"C={big_c:.4f}, c={small_c:.4g}"
    )
    return constants


def sample_rays(
    scene: Scene,
    count: int,
    rng: np.random.Generator,
    time: float = 0.0,
    clearance: float = 1e-8,
) -> list[Ray]:
    """Random ray bases in a fundamental domain, clear of nearby prongs.

    Bases within ``clearance`` of the east coordinate of a singularity no
    more than ``prong_height`` away vertically are rejected and redrawn.
    """
    height = scene.tolerances.prong_height
    rays: list[Ray] = []
    while len(rays) < count:
        lattice = rng.random(2)
        e, n = (scene.eigen.dev_matrix @ lattice) * np.array(
            [scene.lam ** -time, scene.lam ** time]
        )
        window = Window(e - clearance, e + clearance, n - height, n + height)
        if singularities_in_window(scene, window, time):
            continue
        rays.append(Ray((float(e), float(n)), time))
    return rays


def check_bounds(
    scene: Scene,
    constants: ErgodicConstants,
    s_grid: Sequence[float],
    rays_per_s: int,
    seed: int = DEFAULT_SEED,
    samples_per_ray: int = 2,
    progress: bool = False,
) -> BoundReport:
    """Check t_max(x) < C/S for x in (S, 2S] and t_max(x) ≥ c/S for x in [0, S).

    x = S itself is never sampled since both inequalities are strict there.
    """
    rng = np.random.default_rng(seed)
    rows: list[dict[str, Any]] = []
    for s_value in tqdm(list(s_grid), desc="bounds", disable=not progress):
        upper = constants.C / s_value
        lower = constants.c / s_value
        for ray_index, ray in enumerate(sample_rays(scene, rays_per_s, rng)):
            for _ in range(samples_per_ray):
                above = s_value + s_value * (1.0 - rng.random())
                t_above = sweep_section(scene, ray, above, upper, EAST).t_max
                rows.append(
                    {"S": s_value, "ray": ray_index, "x": above, "kind": "fast",
                     "t_max": t_above, "bound": upper, "ok": t_above < upper}
                )
                below = s_value * rng.random()
                t_below = sweep_section(scene, ray, below, lower, EAST).t_max
                rows.append(
                    {"S": s_value, "ray": ray_index, "x": below, "kind": "slow",
                     "t_max": t_below, "bound": lower, "ok": t_below >= lower}
                )

    checks = pd.DataFrame(rows, columns=["S", "ray", "x", "kind", "t_max", "bound", "ok"])
    violations = int((~checks["ok"].astype(bool)).sum()) if len(checks) else 0
    if violations:
        logger.warning(f"{violations} bound violations; constants may be underestimated")
    return BoundReport(checks=checks, violations=violations)


def invert_t_max(
    scene: Scene,
    ray: Ray,
    target: float,
    log_bounds: tuple[float, float] = (-20.0, 28.0),
) -> tuple[float, float]:
    """Find x > 0 with t_max_east(x) ≈ target by bisection on log x.

    Returns:
        (x, t_max(x))

    Raises:
        BisectionFailure: If the target is outside the bracketed range
    """
    if target <= 0:
        raise ValueError(f"Target time must be positive, got {target}")
    cap = 2.0 * target

    def gap(u: float) -> float:
        t = sweep_section(scene, ray, math.exp(u), cap, EAST).t_max
        return min(t, cap) - target

    lo, hi = log_bounds
    g_lo, g_hi = gap(lo), gap(hi)
    if g_lo < 0 or g_hi > 0:
        raise BisectionFailure(
            f"t_max does not cross {target:g} on this ray", (math.exp(lo), math.exp(hi))
        )
    u = bisect(gap, lo, hi, xtol=1e-12, maxiter=200)
    x = math.exp(u)
    return x, sweep_section(scene, ray, x, cap, EAST).t_max


def replay_events(trace: SectionTrace) -> float:
    """Recompute the final value of a trace from its affine event log."""
    value = trace.start_value
    for event in trace.events:
        value = event.height + event.factor * (value - event.height)
    return value


# ---------------------------------------------------------------------------
# Fine-step reference simulator
# ---------------------------------------------------------------------------

def _column_scan(
    scene: Scene, e0: float, e1: float, n0: float, n1: float
) -> tuple[np.ndarray, np.ndarray]:
    """Magnifying points with e0 < east ≤ e1 and n0 < north ≤ n1, at τ = 0.

    Loops over the first lattice index and solves the second from the east
    constraint, without any rescaling of the window.
    """
    dev = scene.eigen.dev_matrix
    corners = np.array([[e0, n0], [e0, n1], [e1, n0], [e1, n1]])
    pre = corners @ scene.eigen.dev_inverse.T
    lo, hi = pre.min(axis=0), pre.max(axis=0)

    keep = scene.orbit_magnifying[scene.lattice_point_orbit]
    positions, owners = [], []
    for p, owner in zip(scene.lattice_points[keep], scene.lattice_point_orbit[keep]):
        a = np.arange(math.floor(lo[0] - p[0]), math.ceil(hi[0] - p[0]) + 1) + p[0]
        b_lo = (e0 - dev[0, 0] * a) / dev[0, 1]
        b_hi = (e1 - dev[0, 0] * a) / dev[0, 1]
        b_min, b_max = np.minimum(b_lo, b_hi), np.maximum(b_lo, b_hi)
        first = np.floor(b_min - p[1]).astype(np.int64)
        last = np.ceil(b_max - p[1]).astype(np.int64)
        counts = np.maximum(last - first + 1, 0)
        total = int(counts.sum())
        if total == 0:
            continue
        cols = np.repeat(a, counts)
        starts = np.repeat(first, counts)
        within = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
        b = starts + within + p[1]
        east = dev[0, 0] * cols + dev[0, 1] * b
        north = dev[1, 0] * cols + dev[1, 1] * b
        mask = (east > e0) & (east <= e1) & (north > n0) & (north <= n1)
        positions.append(np.column_stack([east[mask], north[mask]]))
        owners.append(np.full(int(mask.sum()), owner, dtype=int))

    if not positions:
        return np.empty((0, 2)), np.empty(0, dtype=int)
    return np.vstack(positions), np.concatenate(owners)


def fine_step_t_max(
    scene: Scene,
    ray: Ray,
    x: float,
    dt: float | None = None,
    stop: float | None = None,
    horizon: float | None = None,
) -> float:
    """Blowup time from a fixed-step simulation on the unrescaled lattice.

    The section value is checked once per step of length ``dt``; the run
    stops when the value exceeds ``stop`` and reports the step time. Only
    eastward sweeps of rays at τ = 0 are supported.
    """
    if ray.time != 0.0:
        raise ValueError("Fine-step simulation runs on τ = 0 rays only")
    tol = scene.tolerances
    dt = tol.fine_step if dt is None else dt
    stop = tol.fine_stop if stop is None else stop
    horizon = tol.horizon if horizon is None else horizon
    if math.isinf(x):
        return 0.0
    if x <= 0 or not scene.has_magnifying:
        return INF

    alphas = scene.orbit_alphas
    b_e, b_n = ray.base
    value = x
    cursor = 0.0
    # east coordinate of the last singularity applied; a rescan after a
    # cap break starts at that singularity and must not apply it again
    applied = -INF
    while cursor < horizon:
        cap = 4.0 * max(abs(value), 1.0)
        length = max(math.ceil(50.0 / (cap * dt)), 1) * dt
        end = min(cursor + length, horizon)
        pos, idx = _column_scan(scene, b_e + cursor, b_e + end, b_n, b_n + cap)
        order = np.argsort(pos[:, 0], kind="mergesort")
        next_cursor = end
        for j in order:
            if pos[j, 0] <= applied:
                continue
            offset = pos[j, 0] - b_e
            height = pos[j, 1] - b_n
            if 0.0 < height < value:
                value = height + alphas[idx[j]] * (value - height)
                applied = pos[j, 0]
                if value > stop:
                    return math.ceil(offset / dt) * dt
                if value > cap:
                    next_cursor = offset
                    break
        cursor = next_cursor
    return INF
