"""
Punctured Anosov Torus Geometry.

This module models the punctured torus carried by a hyperbolic monodromy
φ ∈ SL(2, Z), its eigen-coordinates, and the developed picture of the
punctures in the (east, north) plane.

Developing Coordinates:

    Let u be the unit unstable eigenvector of φ and s the stable eigenvector
    scaled so that det[s u] = 1. The developing matrix is

        D = [s u]⁻¹,        D φ D⁻¹ = diag(λ⁻¹, λ),

    so east is the contracting direction and north the expanding one. At
    suspension-flow time τ the developed picture is rescaled by
    F_τ = diag(λ^{-τ}, λ^{τ}); the developed singularity set

        Σ_τ = F_τ D (Z² + orbit points)

    satisfies Σ_{τ+1} = Σ_τ because the orbit set is φ-invariant.

Enumeration:

    Windows are pulled back to the τ = 0 picture, recentred by a lattice
    vector, and rescaled by an integer power of F so that the box is close to
    square before the integer preimage is enumerated with numpy. Tall thin
    windows therefore cost about as much as square ones of the same area.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, NamedTuple, Sequence

import numpy as np

from holonomy.exceptions import (
    MixedSigns,
    NonHyperbolic,
    NotPeriodic,
    WindowTooLarge,
    ZeroSlope,
)
from holonomy.utils.tolerances import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)

RationalPoint = tuple[Fraction, Fraction]


@dataclass(frozen=True)
class MonodromyMatrix:
    """Integer 2×2 monodromy [[a, b], [c, d]] acting on column vectors."""
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self) -> None:
        """Validate that the matrix is hyperbolic with positive eigenvalues."""
        for name in ("a", "b", "c", "d"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise NonHyperbolic(f"Matrix entry {name} must be an integer, got {value!r}")
        if self.determinant != 1:
            raise NonHyperbolic(f"Determinant must be 1, got {self.determinant}")
        if self.trace < 3:
            raise NonHyperbolic(f"Trace must be at least 3, got {self.trace}")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> MonodromyMatrix:
        if len(rows) != 2 or any(len(r) != 2 for r in rows):
            raise NonHyperbolic(f"Monodromy must be 2×2, got {rows!r}")
        (a, b), (c, d) = rows
        return cls(a, b, c, d)

    @property
    def trace(self) -> int:
        return self.a + self.d

    @property
    def determinant(self) -> int:
        return self.a * self.d - self.b * self.c

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=float)

    def rows(self) -> list[list[int]]:
        return [[self.a, self.b], [self.c, self.d]]

    def apply_mod1(self, point: RationalPoint) -> RationalPoint:
        """Apply φ to a rational torus point, reducing mod 1."""
        x, y = point
        return ((self.a * x + self.b * y) % 1, (self.c * x + self.d * y) % 1)


@dataclass(frozen=True, eq=False)
class EigenStructure:
    """Stretch factor and developing matrix of a hyperbolic monodromy.

    Attributes:
        lam: Stretch factor λ > 1
        unstable_dir: Unit eigenvector for λ
        stable_dir: Unit eigenvector for 1/λ
        dev_matrix: D, mapping lattice coordinates to (east, north)
        dev_inverse: D⁻¹
    """
    lam: float
    unstable_dir: np.ndarray = field(repr=False)
    stable_dir: np.ndarray = field(repr=False)
    dev_matrix: np.ndarray = field(repr=False)
    dev_inverse: np.ndarray = field(repr=False)

    @classmethod
    def from_matrix(cls, matrix: MonodromyMatrix) -> EigenStructure:
        tr = matrix.trace
        lam = (tr + math.sqrt(tr * tr - 4)) / 2.0
        inv_lam = 1.0 / lam

        u = _eigenvector(matrix, lam)
        u = u / np.linalg.norm(u)
        if u[0] < 0 or (u[0] == 0 and u[1] < 0):
            u = -u

        s = _eigenvector(matrix, inv_lam)
        # det[s u] = s0*u1 - s1*u0 = 1
        s = s / (s[0] * u[1] - s[1] * u[0])

        basis = np.column_stack([s, u])
        dev = np.linalg.inv(basis)
        return cls(
            lam=lam,
            unstable_dir=u,
            stable_dir=s / np.linalg.norm(s),
            dev_matrix=dev,
            dev_inverse=basis,
        )

    def conjugation_residual(self, matrix: MonodromyMatrix) -> float:
        """‖D φ D⁻¹ − diag(λ⁻¹, λ)‖∞."""
        conj = self.dev_matrix @ matrix.as_array() @ self.dev_inverse
        target = np.diag([1.0 / self.lam, self.lam])
        return float(np.abs(conj - target).max())


def _eigenvector(matrix: MonodromyMatrix, eigenvalue: float) -> np.ndarray:
    # Row (a - μ, b) of φ - μI is orthogonal to the eigenvector.
    if matrix.b != 0:
        return np.array([float(matrix.b), eigenvalue - matrix.a])
    return np.array([eigenvalue - matrix.d, float(matrix.c)])


@dataclass(frozen=True)
class OrbitSpec:
    """A punctured periodic orbit.

    Attributes:
        points: The φ-orbit, starting from the supplied representative
        period: m, the orbit length
        prongs: k, always 2 for torus punctures
        omega: Rotation ω mod k, supplied by the user
    """
    points: tuple[RationalPoint, ...]
    period: int
    prongs: int = 2
    omega: int = 0

    def __post_init__(self) -> None:
        if len(self.points) != self.period:
            raise ValueError(
                f"Orbit has {len(self.points)} points but period {self.period}"
            )
        if self.prongs <= 0 or self.prongs % 2:
            raise ValueError(f"Prong count must be even and positive, got {self.prongs}")

    @property
    def representative(self) -> RationalPoint:
        return self.points[0]


@dataclass(frozen=True)
class SlopeSpec:
    """Surgery slope (p; q) with its dilation factor α = λ^{mq/|p|}."""
    p: int
    q: int
    alpha: float = 1.0

    def __post_init__(self) -> None:
        if self.p == 0:
            raise ZeroSlope("Surgery slope must have p ≠ 0")
        if self.q < 0:
            raise ValueError(f"Surgery slope must have q ≥ 0, got {self.q}")

    @classmethod
    def for_orbit(cls, p: int, q: int, lam: float, period: int) -> SlopeSpec:
        if p == 0:
            raise ZeroSlope("Surgery slope must have p ≠ 0")
        alpha = 1.0 if q == 0 else lam ** (period * q / abs(p))
        return cls(p=p, q=q, alpha=alpha)

    @property
    def magnifying(self) -> bool:
        return self.q > 0


class SingularityHit(NamedTuple):
    """A developed puncture: position in (east, north) and its orbit."""
    position: tuple[float, float]
    orbit_index: int
    magnifying: bool

    @property
    def east(self) -> float:
        return self.position[0]

    @property
    def north(self) -> float:
        return self.position[1]


class Window(NamedTuple):
    """Axis-aligned window [x0, x1) × (y0, y1] in developing coordinates."""
    x0: float
    x1: float
    y0: float
    y1: float

    @property
    def area(self) -> float:
        return max(self.x1 - self.x0, 0.0) * max(self.y1 - self.y0, 0.0)

    @classmethod
    def around(cls, east: float, north: float, radius: float) -> Window:
        return cls(east - radius, east + radius, north - radius, north + radius)


@dataclass(frozen=True)
class SlopeReport:
    """Advisory validation of one surgery slope."""
    orbit_index: int
    p: int
    q: int
    parity_ok: bool
    degeneracy_slope: tuple[int, int]
    fiber_slope: bool
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "orbit": self.orbit_index,
            "slope": [self.p, self.q],
            "parity_ok": self.parity_ok,
            "degeneracy_slope": list(self.degeneracy_slope),
            "fiber_slope": self.fiber_slope,
            "warnings": list(self.warnings),
        }


@dataclass(frozen=True, eq=False)
class Scene:
    """Hyperbolic torus monodromy with punctured orbits and surgery slopes.

    Attributes:
        matrix: The monodromy φ
        eigen: Stretch factor and developing matrix
        orbits: (OrbitSpec, SlopeSpec) pairs, slopes normalized to p > 0
        alpha_max: Largest dilation factor
        alpha_min: Smallest factor over magnifying orbits, None if fibered
        kappa: Magnifying singularities per unit area
        reflected: True when all slopes were negative and got reflected
        tolerances: Numerical tolerances used by every query on this scene
    """
    matrix: MonodromyMatrix
    eigen: EigenStructure
    orbits: tuple[tuple[OrbitSpec, SlopeSpec], ...]
    alpha_max: float
    alpha_min: float | None
    kappa: float
    reflected: bool = False
    tolerances: Tolerances = DEFAULT_TOLERANCES
    name: str = ""

    def __repr__(self) -> str:
        return (
            f"Scene(\n"
            f"  matrix={self.matrix.rows()},\n"
            f"  lambda={self.lam:.10f},\n"
            f"  orbits={len(self.orbits)},\n"
            f"  kappa={self.kappa:g},\n"
            f"  alpha_max={self.alpha_max:.6f}\n"
            f")"
        )

    @property
    def lam(self) -> float:
        return self.eigen.lam

    @property
    def log_lam(self) -> float:
        return math.log(self.eigen.lam)

    @property
    def has_magnifying(self) -> bool:
        return self.alpha_min is not None

    @property
    def total_density(self) -> int:
        """Singularities of every orbit per unit area."""
        return sum(orbit.period for orbit, _ in self.orbits)

    def slope(self, orbit_index: int) -> SlopeSpec:
        return self.orbits[orbit_index][1]

    def orbit(self, orbit_index: int) -> OrbitSpec:
        return self.orbits[orbit_index][0]

    def alpha(self, orbit_index: int) -> float:
        return self.orbits[orbit_index][1].alpha

    @cached_property
    def orbit_alphas(self) -> np.ndarray:
        return np.array([slope.alpha for _, slope in self.orbits])

    @cached_property
    def orbit_magnifying(self) -> np.ndarray:
        return np.array([slope.magnifying for _, slope in self.orbits], dtype=bool)

    @cached_property
    def lattice_points(self) -> np.ndarray:
        """All orbit points as floats in [0, 1)², shape (M, 2)."""
        pts = [
            (float(x), float(y)) for orbit, _ in self.orbits for (x, y) in orbit.points
        ]
        return np.array(pts, dtype=float).reshape(-1, 2)

    @cached_property
    def lattice_point_orbit(self) -> np.ndarray:
        return np.array(
            [i for i, (orbit, _) in enumerate(self.orbits) for _ in orbit.points],
            dtype=int,
        )

    def singularity_position(
        self, orbit_index: int, member: int = 0, time: float = 0.0
    ) -> tuple[float, float]:
        """Developed position of an orbit point in the fundamental domain."""
        x, y = self.orbit(orbit_index).points[member]
        pos = flow_scaled_lattice(self, time) @ np.array([float(x), float(y)])
        return float(pos[0]), float(pos[1])

    def summary(self) -> str:
        """Generate a text summary of the scene."""
        lines = [
            "=" * 60,
            f"SCENE {self.name}".rstrip(),
            "=" * 60,
            f"Monodromy:        {self.matrix.rows()}",
            f"Stretch factor:   {self.lam:.10f}",
            f"Reflected slopes: {self.reflected}",
            f"kappa:            {self.kappa:g}",
            f"alpha_max:        {self.alpha_max:.6f}",
            f"alpha_min:        "
            + ("n/a (fibered)" if self.alpha_min is None else f"{self.alpha_min:.6f}"),
            "",
            "ORBITS",
            "-" * 40,
        ]
        for i, (orbit, slope) in enumerate(self.orbits):
            x, y = orbit.representative
            lines.append(
                f"  [{i}] ({x}, {y})  m={orbit.period}  k={orbit.prongs}  "
                f"ω={orbit.omega}  ({slope.p};{slope.q})  α={slope.alpha:.6f}"
            )
        lines.append("=" * 60)
        return "\n".join(lines)


def _as_fraction(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float) and not math.isfinite(value):
        raise NotPeriodic(f"Puncture coordinate {value!r} is not a rational number")
    try:
        return Fraction(value)
    except (TypeError, ValueError) as exc:
        raise NotPeriodic(f"Puncture coordinate {value!r} is not a rational number") from exc


def compute_orbit(
    matrix: MonodromyMatrix,
    point: Sequence[Any],
    period_cap: int = DEFAULT_TOLERANCES.period_cap,
) -> tuple[RationalPoint, ...]:
    """Exact φ-orbit of a rational torus point.

    Args:
        matrix: Monodromy φ
        point: Two coordinates, as Fractions, ints or "num/den" strings
        period_cap: Longest orbit accepted

    Returns:
        The orbit as a tuple of reduced rational points, starting at ``point``

    Raises:
        NotPeriodic: If the coordinates are not rational or the orbit is
            longer than ``period_cap``.

    Example:
        >>> compute_orbit(MonodromyMatrix(2, 1, 1, 1), ("1/2", "1/2"))
        ((Fraction(1, 2), Fraction(1, 2)), (Fraction(1, 2), Fraction(0, 1)), ...)
    """
    x, y = (_as_fraction(v) % 1 for v in point)
    start = (x, y)
    orbit = [start]
    current = matrix.apply_mod1(start)
    while current != start:
        orbit.append(current)
        if len(orbit) > period_cap:
            raise NotPeriodic(
                f"Point {start} has no orbit of length ≤ {period_cap} under φ"
            )
        current = matrix.apply_mod1(current)
    return tuple(orbit)


def build_scene(
    matrix: Sequence[Sequence[int]] | MonodromyMatrix,
    orbits: Sequence[tuple[Sequence[Any], int, tuple[int, int]]],
    tolerances: Tolerances | None = None,
    name: str = "",
) -> Scene:
    """Build a scene from a monodromy and punctured orbits with slopes.

    Args:
        matrix: 2×2 integer monodromy
        orbits: (rational point, ω, (p, q)) per punctured orbit
        tolerances: Numerical tolerances, package defaults if omitted
        name: Label used in reports

    Returns:
        Scene with eigen-structure, full orbits and dilation factors

    Raises:
        NonHyperbolic: Trace below 3 or determinant not 1
        NotPeriodic: Non-rational puncture input
        MixedSigns: Slopes with p of both signs
        ZeroSlope: A slope with p = 0

    Example:
        >>> scene = build_scene([[2, 1], [1, 1]], [(("0", "0"), 1, (5, 1))])
        >>> round(scene.lam, 10)
        2.6180339887
    """
    tolerances = tolerances or DEFAULT_TOLERANCES
    mono = matrix if isinstance(matrix, MonodromyMatrix) else MonodromyMatrix.from_rows(matrix)
    eigen = EigenStructure.from_matrix(mono)

    residual = eigen.conjugation_residual(mono)
    if residual > 1e-9:
        logger.warning(f"Developing matrix conjugation residual {residual:.3g}")

    if not orbits:
        raise ValueError("Scene needs at least one punctured orbit")

    ps = [int(slope[0]) for _, _, slope in orbits]
    if any(p == 0 for p in ps):
        raise ZeroSlope("Surgery slope must have p ≠ 0")
    if any(p > 0 for p in ps) and any(p < 0 for p in ps):
        raise MixedSigns(f"Slopes must share the sign of p, got p = {ps}")
    reflected = all(p < 0 for p in ps)

    seen: set[RationalPoint] = set()
    built: list[tuple[OrbitSpec, SlopeSpec]] = []
    for point, omega, (p, q) in orbits:
        points = compute_orbit(mono, point, tolerances.period_cap)
        if seen.intersection(points):
            raise ValueError(f"Orbit of {points[0]} repeats an earlier orbit")
        seen.update(points)
        orbit = OrbitSpec(points=points, period=len(points), prongs=2, omega=int(omega) % 2)
        slope = SlopeSpec.for_orbit(abs(int(p)), int(q), eigen.lam, orbit.period)
        built.append((orbit, slope))

    alphas = [slope.alpha for _, slope in built]
    magnifying = [slope.alpha for _, slope in built if slope.magnifying]
    kappa = float(sum(orbit.period for orbit, slope in built if slope.magnifying))

    scene = Scene(
        matrix=mono,
        eigen=eigen,
        orbits=tuple(built),
        alpha_max=max(alphas),
        alpha_min=min(magnifying) if magnifying else None,
        kappa=kappa,
        reflected=reflected,
        tolerances=tolerances,
        name=name,
    )
    logger.info(
        f"Built scene {name or '<unnamed>'}: λ={eigen.lam:.10f}, "
        f"{len(built)} orbits, κ={kappa:g}, reflected={reflected}"
    )
    return scene


def validate_slope(
    orbit: OrbitSpec, slope: SlopeSpec, orbit_index: int = 0
) -> SlopeReport:
    """Check the closed-curve parity rule p ≡ ωq (mod k) for one orbit.

    Failure is advisory: it is logged as a warning and reported, never
    raised. The report also carries the degeneracy slope (0; k/gcd(ω, k))
    and flags q = 0 as the fiber slope ∞.
    """
    k = orbit.prongs
    omega = orbit.omega % k
    parity_ok = (slope.p - omega * slope.q) % k == 0
    degeneracy = (0, k // math.gcd(omega, k))
    fiber = slope.q == 0

    warnings: list[str] = []
    if not parity_ok:
        msg = (
            f"Orbit {orbit_index}: slope ({slope.p};{slope.q}) fails "
            f"p ≡ ωq mod {k} with ω={omega}"
        )
        warnings.append(msg)
        logger.warning(msg)
    if fiber:
        logger.info(f"Orbit {orbit_index}: q = 0 is the ∞ slope (α = 1)")

    return SlopeReport(
        orbit_index=orbit_index,
        p=slope.p,
        q=slope.q,
        parity_ok=parity_ok,
        degeneracy_slope=degeneracy,
        fiber_slope=fiber,
        warnings=tuple(warnings),
    )


def flow_scaled_lattice(scene: Scene, time: float) -> np.ndarray:
    """Developing transform diag(λ^{-τ}, λ^{τ}) · D at flow time τ."""
    scale = scene.lam ** time
    return np.diag([1.0 / scale, scale]) @ scene.eigen.dev_matrix


def flow_scale(scene: Scene, time: float) -> tuple[float, float]:
    """East and north scale factors of F_τ."""
    scale = scene.lam ** time
    return 1.0 / scale, scale


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

def reference_points(
    scene: Scene,
    e0: float,
    e1: float,
    n0: float,
    n1: float,
    magnifying_only: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Singularities of the τ = 0 picture in the closed box [e0,e1]×[n0,n1].

    No recentring or rescaling is applied, so the box should be close to
    the origin and close to square. Returns positions (K, 2) and orbit
    indices (K,), unsorted.
    """
    dev = scene.eigen.dev_matrix
    corners = np.array([[e0, n0], [e0, n1], [e1, n0], [e1, n1]])
    pre = corners @ scene.eigen.dev_inverse.T
    lo = pre.min(axis=0)
    hi = pre.max(axis=0)

    pts = scene.lattice_points
    owners = scene.lattice_point_orbit
    if magnifying_only:
        keep = scene.orbit_magnifying[owners]
        pts, owners = pts[keep], owners[keep]

    positions = []
    indices = []
    for p, owner in zip(pts, owners):
        r0 = np.arange(math.floor(lo[0] - p[0]), math.ceil(hi[0] - p[0]) + 1)
        r1 = np.arange(math.floor(lo[1] - p[1]), math.ceil(hi[1] - p[1]) + 1)
        if r0.size == 0 or r1.size == 0:
            continue
        g0, g1 = np.meshgrid(r0 + p[0], r1 + p[1], indexing="ij")
        east = dev[0, 0] * g0 + dev[0, 1] * g1
        north = dev[1, 0] * g0 + dev[1, 1] * g1
        mask = (east >= e0) & (east <= e1) & (north >= n0) & (north <= n1)
        if mask.any():
            positions.append(np.column_stack([east[mask], north[mask]]))
            indices.append(np.full(int(mask.sum()), owner, dtype=int))

    if not positions:
        return np.empty((0, 2)), np.empty(0, dtype=int)
    return np.vstack(positions), np.concatenate(indices)


def nearest_lattice_vector(scene: Scene, point: np.ndarray) -> np.ndarray:
    n = np.round(scene.eigen.dev_inverse @ point)
    return scene.eigen.dev_matrix @ n


def window_points(
    scene: Scene,
    window: Window | Sequence[float],
    time: float = 0.0,
    magnifying_only: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Array form of :func:`singularities_in_window`, sorted east then north."""
    x0, x1, y0, y1 = (float(v) for v in window)
    if not (x1 > x0 and y1 > y0):
        return np.empty((0, 2)), np.empty(0, dtype=int)

    density = scene.kappa if magnifying_only else scene.total_density
    predicted = (x1 - x0) * (y1 - y0) * density
    if predicted > scene.tolerances.window_cap:
        raise WindowTooLarge(predicted, scene.tolerances.window_cap)

    lam = scene.lam
    # Pull back to τ = 0
    s_e = lam ** time
    a0, a1, b0, b1 = x0 * s_e, x1 * s_e, y0 / s_e, y1 / s_e
    v1 = nearest_lattice_vector(scene, np.array([(a0 + a1) / 2, (b0 + b1) / 2]))
    a0, a1, b0, b1 = a0 - v1[0], a1 - v1[0], b0 - v1[1], b1 - v1[1]

    # Rescale by an integer power of F until the box is near square
    width, height = a1 - a0, b1 - b0
    k = int(round(math.log(height / width) / (2.0 * math.log(lam))))
    s_k = lam ** k
    a0, a1, b0, b1 = a0 * s_k, a1 * s_k, b0 / s_k, b1 / s_k
    v2 = nearest_lattice_vector(scene, np.array([(a0 + a1) / 2, (b0 + b1) / 2]))
    a0, a1, b0, b1 = a0 - v2[0], a1 - v2[0], b0 - v2[1], b1 - v2[1]

    margin_e = 1e-9 * max(a1 - a0, 1.0)
    margin_n = 1e-9 * max(b1 - b0, 1.0)
    pos, idx = reference_points(
        scene, a0 - margin_e, a1 + margin_e, b0 - margin_n, b1 + margin_n, magnifying_only
    )
    if len(pos) == 0:
        return pos, idx

    # Map back to the requested picture and apply the half-open test there
    east = ((pos[:, 0] + v2[0]) / s_k + v1[0]) / s_e
    north = ((pos[:, 1] + v2[1]) * s_k + v1[1]) * s_e
    mask = (east >= x0) & (east < x1) & (north > y0) & (north <= y1)
    east, north, idx = east[mask], north[mask], idx[mask]

    order = np.lexsort((north, east))
    return np.column_stack([east[order], north[order]]), idx[order]


def singularities_in_window(
    scene: Scene,
    window: Window | Sequence[float],
    time: float = 0.0,
    magnifying_only: bool = False,
) -> list[SingularityHit]:
    """Developed punctures inside the half-open window [x0,x1) × (y0,y1].

    Args:
        scene: Scene to query
        window: (x0, x1, y0, y1) in developing coordinates at flow time ``time``
        time: Suspension-flow time τ of the picture
        magnifying_only: Keep only orbits with q > 0

    Returns:
        Hits sorted by east coordinate, then north

    Raises:
        WindowTooLarge: If area × density exceeds the configured cap
    """
    pos, idx = window_points(scene, window, time, magnifying_only)
    magnifying = scene.orbit_magnifying
    return [
        SingularityHit((float(e), float(n)), int(i), bool(magnifying[i]))
        for (e, n), i in zip(pos, idx)
    ]


def singularities_on_vertical(
    scene: Scene,
    east: float,
    north_lo: float,
    north_hi: float,
    time: float = 0.0,
    tol: float | None = None,
) -> list[SingularityHit]:
    """Singularities within ``tol`` of a vertical segment, heights in [lo, hi]."""
    tol = scene.tolerances.event_tol if tol is None else tol
    lo, hi = min(north_lo, north_hi), max(north_lo, north_hi)
    return singularities_in_window(
        scene, Window(east - tol, east + tol, lo - tol, hi + tol), time
    )


def singularities_on_horizontal(
    scene: Scene,
    north: float,
    east_lo: float,
    east_hi: float,
    time: float = 0.0,
    tol: float | None = None,
) -> list[SingularityHit]:
    """Singularities within ``tol`` of a horizontal segment, east in [lo, hi]."""
    tol = scene.tolerances.event_tol if tol is None else tol
    lo, hi = min(east_lo, east_hi), max(east_lo, east_hi)
    return singularities_in_window(
        scene, Window(lo - tol, hi + tol, north - tol, north + tol), time
    )
