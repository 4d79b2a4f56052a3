"""
Fiber points of the circle bundle over the punctured surface.

A fiber point is the signed north-south offset from the base point to the
image of the zero-section, or ∞. On an unstable prong each point is doubled;
the side tag records which copy a fiber point lives on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from holonomy.utils.extended import INF


class Side(Enum):
    """Copy of a doubled prong point."""
    LEFT = "L"
    RIGHT = "R"

    def flipped(self) -> Side:
        return Side.RIGHT if self is Side.LEFT else Side.LEFT


@dataclass(frozen=True)
class FiberPoint:
    """Value in R ∪ {∞} with an optional prong side tag.

    Attributes:
        value: Signed offset, positive is north; ±inf both mean ∞
        side: Copy of the doubled prong point, None off prongs
    """
    value: float
    side: Side | None = None

    def __post_init__(self) -> None:
        if math.isnan(self.value):
            raise ValueError("Fiber value cannot be NaN")
        if math.isinf(self.value) and self.value < 0:
            object.__setattr__(self, "value", INF)

    @property
    def is_inf(self) -> bool:
        return math.isinf(self.value)

    def with_value(self, value: float) -> FiberPoint:
        return FiberPoint(value, self.side)

    def with_side(self, side: Side | None) -> FiberPoint:
        return FiberPoint(self.value, side)

    def __float__(self) -> float:
        return self.value


def as_fiber_point(x: FiberPoint | float) -> FiberPoint:
    return x if isinstance(x, FiberPoint) else FiberPoint(float(x))
