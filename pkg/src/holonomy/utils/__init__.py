"""
Utility modules for holonomy.
"""

from holonomy.utils.disjoint_set import DisjointSet
from holonomy.utils.extended import (
    INF,
    circular_distance,
    format_extended,
    is_inf,
    lift,
    respects_circular_order,
    unlift,
)
from holonomy.utils.tolerances import DEFAULT_SEED, DEFAULT_TOLERANCES, Tolerances

__all__ = [
    "DisjointSet",
    "INF",
    "circular_distance",
    "format_extended",
    "is_inf",
    "lift",
    "respects_circular_order",
    "unlift",
    "DEFAULT_SEED",
    "DEFAULT_TOLERANCES",
    "Tolerances",
]
