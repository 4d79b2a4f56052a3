"""
Canonical Scenes

Every scene uses the cat map φ = [[2, 1], [1, 1]], whose stretch factor is
λ = (3 + √5)/2. The scene data are kept in the scene-file format so the
same dictionaries can be written out, loaded back or fed to the CLI.

    figure_eight     fixed point (0, 0) with slope (5; 1), ω = 1
    fibered          fixed point (0, 0) with the fiber slope (1; 0)
    period_three     orbit of (1/2, 0), period 3, slope (3; 1)
    mixed_sign       two orbits with slopes of opposite sign (rejected)
"""

from __future__ import annotations

import copy
from typing import Any

from holonomy.core.surface import Scene
from holonomy.io.readers import scene_from_dict
from holonomy.utils.tolerances import Tolerances

CAT_MAP = [[2, 1], [1, 1]]

SCENE_DATA: dict[str, dict[str, Any]] = {
    "figure_eight": {
        "name": "fig8_5_1",
        "matrix": CAT_MAP,
        "orbits": [{"point": ["0", "0"], "omega": 1, "slope": [5, 1]}],
    },
    "fibered": {
        "name": "fig8_fibered",
        "matrix": CAT_MAP,
        # q = 0 never satisfies the parity rule with p = 1, so checking
        # this scene always produces one advisory warning
        "orbits": [{"point": ["0", "0"], "omega": 1, "slope": [1, 0]}],
    },
    "period_three": {
        "name": "cat_period3",
        "matrix": CAT_MAP,
        "orbits": [{"point": ["1/2", "0"], "omega": 1, "slope": [3, 1]}],
    },
    "mixed_sign": {
        "name": "cat_mixed",
        "matrix": CAT_MAP,
        "orbits": [
            {"point": ["0", "0"], "omega": 1, "slope": [5, 1]},
            {"point": ["1/2", "0"], "omega": 1, "slope": [-3, 1]},
        ],
    },
}


def scene_data(key: str) -> dict[str, Any]:
    """A deep copy of one canonical scene in scene-file form.

    Raises:
        KeyError: If ``key`` is not a canonical scene
    """
    if key not in SCENE_DATA:
        raise KeyError(f"Unknown scene {key!r}; choose from {sorted(SCENE_DATA)}")
    return copy.deepcopy(SCENE_DATA[key])


def figure_eight_scene(tolerances: Tolerances | None = None) -> Scene:
    """Figure-eight bundle punctured at the fixed point, slope (5; 1).

    Example:
        >>> scene = figure_eight_scene()
        >>> scene.slope(0).magnifying
        True
    """
    return scene_from_dict(scene_data("figure_eight"), tolerances)


def fibered_scene(tolerances: Tolerances | None = None) -> Scene:
    """Figure-eight bundle with the fiber slope; no orbit magnifies."""
    return scene_from_dict(scene_data("fibered"), tolerances)


def period_three_scene(tolerances: Tolerances | None = None) -> Scene:
    return scene_from_dict(scene_data("period_three"), tolerances)


def mixed_sign_data() -> dict[str, Any]:
    """Scene-file data that building must reject with MixedSigns."""
    return scene_data("mixed_sign")
