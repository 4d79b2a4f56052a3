"""
holonomy: flat connections on punctured Anosov torus bundles

A Python library for the parallel transport of sections of a flat
connection on the unit tangent bundle of the leaves of a punctured
Anosov mapping torus. It computes blowup times of parallel sections,
monodromies of loops through filled orbits and relation words, and the
order structure of glued binary trees.

Example:
    >>> from holonomy import figure_eight_scene, filling_monodromy
    >>> scene = figure_eight_scene()
    >>> result = filling_monodromy(scene, 0, hug_radius=0.05)
    >>> print(f"Deviation: {result.max_deviation:.2e}")
"""

__version__ = "0.1.0"
__license__ = "MIT"

from holonomy.core.surface import Scene, build_scene, singularities_in_window
from holonomy.core.transport import PathSpec, loop_monodromy, transport_path
from holonomy.core.blowup import Ray, advance_section, estimate_constants, t_max_east
from holonomy.core.action import builtin_relations, filling_monodromy, order_witness
from holonomy.core.treeglue import build_quotient
from holonomy.data.scenes import figure_eight_scene
from holonomy.exceptions import HolonomyError
from holonomy.io.readers import load_scene

__all__ = [
    "Scene",
    "build_scene",
    "singularities_in_window",
    "PathSpec",
    "loop_monodromy",
    "transport_path",
    "Ray",
    "advance_section",
    "estimate_constants",
    "t_max_east",
    "builtin_relations",
    "filling_monodromy",
    "order_witness",
    "build_quotient",
    "figure_eight_scene",
    "HolonomyError",
    "load_scene",
    "__version__",
]
