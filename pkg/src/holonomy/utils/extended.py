"""
Helpers for the extended line R ∪ {∞} and its lift to R.

A fiber of the completed bundle is a circle: the real line plus one point
at infinity. Sections that pass through infinity are tracked with an
integer wrap count ``w``; the pair (value, w) lifts to the real number

    L = w + atan(value)/π + 1/2        for finite value,
    L = w                              for value = ∞.

With this convention ``∞`` sits at the integer *after* a positive-to-negative
crossing, so an eastward section that blows up to +∞ increments ``w``.
"""

from __future__ import annotations

import math
from typing import Sequence

INF = math.inf


def is_inf(value: float) -> bool:
    return math.isinf(value)


def lift(value: float, wraps: int = 0) -> float:
    """Lift a circle point with wrap count to the real line."""
    if math.isinf(value):
        return float(wraps)
    return wraps + math.atan(value) / math.pi + 0.5


def unlift(coordinate: float) -> tuple[float, int]:
    """Inverse of :func:`lift`."""
    wraps = math.floor(coordinate)
    frac = coordinate - wraps
    if frac == 0.0:
        return INF, int(wraps)
    return math.tan(math.pi * (frac - 0.5)), int(wraps)


def circular_distance(a: float, b: float) -> float:
    """Distance between two points of R ∪ {∞} on the circle of length 1."""
    d = abs(lift(a) - lift(b)) % 1.0
    return min(d, 1.0 - d)


def respects_circular_order(lifted_out: Sequence[float], tol: float = 0.0) -> bool:
    """Check that lifted images of circularly sorted samples form a degree-one map.

    The images must increase strictly and span less than one full turn.
    """
    if len(lifted_out) < 2:
        return True
    for lo, hi in zip(lifted_out, lifted_out[1:]):
        if not hi > lo - tol:
            return False
    return lifted_out[-1] - lifted_out[0] <= 1.0 + tol


def format_extended(value: float) -> str | float:
    """JSON-friendly rendering: ∞ becomes the string ``"inf"``."""
    return "inf" if math.isinf(value) else value
