"""
Exception hierarchy for holonomy.

Every error raised on purpose by the library derives from HolonomyError.
Errors that signal bad user input also derive from ValueError so callers
that only know about the builtin hierarchy still catch them.
"""

from __future__ import annotations

from typing import Any


class HolonomyError(Exception):
    """Base class for all holonomy errors."""


# ---------------------------------------------------------------------------
# Scene construction
# ---------------------------------------------------------------------------

class NonHyperbolic(HolonomyError, ValueError):
    """Monodromy matrix is not in SL(2,Z) with trace at least 3."""


class NotPeriodic(HolonomyError, ValueError):
    """Puncture point has no finite orbit within the configured period cap."""


class MixedSigns(HolonomyError, ValueError):
    """Surgery slopes have p of both signs."""


class ZeroSlope(HolonomyError, ValueError):
    """Surgery slope has p = 0."""


class WindowTooLarge(HolonomyError):
    """Predicted singularity count for a window exceeds the enumeration cap."""

    def __init__(self, predicted: float, cap: float) -> None:
        self.predicted = predicted
        self.cap = cap
        super().__init__(
            f"Window would contain ~{predicted:.3g} singularities (cap {cap:.3g})"
        )


# ---------------------------------------------------------------------------
# Transport
# ---------------------------------------------------------------------------

class PathThroughSingularity(HolonomyError):
    """A move passes through (or ends on) a developed singularity."""

    def __init__(self, message: str, position: tuple[float, float] | None = None) -> None:
        self.position = position
        super().__init__(message)


class RectangleNotClear(HolonomyError):
    """A Type 2 rectangle contains a singularity."""


class NotOnProng(HolonomyError):
    """Prong crossing requested away from an unstable prong."""


class BlowupError(HolonomyError):
    """A partial-connection section escaped to infinity mid-path."""

    def __init__(self, time: float, position: tuple[float, float], value: float) -> None:
        self.time = time
        self.position = position
        self.value = value
        super().__init__(
            f"Section blew up after east distance {time:.6g} "
            f"at ({position[0]:.6g}, {position[1]:.6g})"
        )


# ---------------------------------------------------------------------------
# Blowup engine
# ---------------------------------------------------------------------------

class BaseOnSingularity(HolonomyError):
    """Ray base coincides with a singularity."""


class BisectionFailure(HolonomyError):
    """Bisection for a wrapped section could not bracket a root."""

    def __init__(self, message: str, bracket: tuple[float, float]) -> None:
        self.bracket = bracket
        super().__init__(f"{message} (bracket {bracket[0]:.6g}, {bracket[1]:.6g})")


class NoMagnifyingOrbit(HolonomyError):
    """Scene has no orbit with q > 0."""


# ---------------------------------------------------------------------------
# Action
# ---------------------------------------------------------------------------

class RadiusTooLarge(HolonomyError):
    """Hug radius lets the meridian touch another singularity."""


class NotClosed(HolonomyError):
    """Loop does not close up modulo lattice translations."""

    def __init__(self, message: str, offset: Any = None) -> None:
        self.offset = offset
        super().__init__(message)


# ---------------------------------------------------------------------------
# Tree gluings
# ---------------------------------------------------------------------------

class ResolutionMismatch(HolonomyError, ValueError):
    """Tree point does not lie on the dyadic grid of the quotient."""

    def __init__(self, message: str, resolution: int) -> None:
        self.resolution = resolution
        super().__init__(message)


class TruncationBoundary(HolonomyError):
    """Answer depends on points beyond the truncation depth."""

    def __init__(self, message: str, point: Any = None) -> None:
        self.point = point
        super().__init__(message)
