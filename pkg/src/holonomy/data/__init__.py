"""
Canonical scenes for holonomy.
"""

from holonomy.data.scenes import (
    SCENE_DATA,
    fibered_scene,
    figure_eight_scene,
    mixed_sign_data,
    period_three_scene,
    scene_data,
)

__all__ = [
    "SCENE_DATA",
    "fibered_scene",
    "figure_eight_scene",
    "mixed_sign_data",
    "period_three_scene",
    "scene_data",
]
