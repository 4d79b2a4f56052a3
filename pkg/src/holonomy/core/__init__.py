"""
Core modules for holonomy: geometry, transport, blowup engine, action and tree gluings.
"""

from holonomy.core.fiber import FiberPoint, Side
from holonomy.core.surface import (
    EigenStructure,
    MonodromyMatrix,
    OrbitSpec,
    Scene,
    SingularityHit,
    SlopeReport,
    SlopeSpec,
    Window,
    build_scene,
    compute_orbit,
    flow_scaled_lattice,
    singularities_in_window,
    validate_slope,
)
from holonomy.core.transport import (
    Crossing,
    East,
    Flow,
    LoopReport,
    North,
    PathOutcome,
    PathSpec,
    ProngCross,
    closure_offset,
    invert_path,
    loop_monodromy,
    transport_east_clear,
    transport_flow,
    transport_north,
    transport_path,
    transport_path_full,
    transport_prong_cross,
)
from holonomy.core.blowup import (
    AliveAt,
    BlownUp,
    ErgodicConstants,
    Ray,
    SectionEvent,
    SectionTrace,
    advance_section,
    advance_section_west,
    check_bounds,
    estimate_constants,
    fine_step_t_max,
    full_section_east,
    full_section_west,
    full_transport_east,
    full_transport_west,
    invert_t_max,
    ragged_count,
    replay_events,
    sample_rays,
    t_max_east,
    t_max_west,
)
from holonomy.core.action import (
    FillingMonodromy,
    LoopKind,
    LoopWord,
    SampledHomeo,
    SlopedLine,
    StepInterval,
    builtin_relations,
    filling_monodromy,
    order_witness,
    relation_residual,
    step_decomposition,
)
from holonomy.core.treeglue import (
    Gluing,
    TreePoint,
    TreeQuotient,
    build_quotient,
    canonical_rep,
    check_ancestor_claim,
    check_shift_equivariance,
)

__all__ = [
    "FiberPoint",
    "Side",
    "EigenStructure",
    "MonodromyMatrix",
    "OrbitSpec",
    "Scene",
    "SingularityHit",
    "SlopeReport",
    "SlopeSpec",
    "Window",
    "build_scene",
    "compute_orbit",
    "flow_scaled_lattice",
    "singularities_in_window",
    "validate_slope",
    "Crossing",
    "East",
    "Flow",
    "LoopReport",
    "North",
    "PathOutcome",
    "PathSpec",
    "ProngCross",
    "closure_offset",
    "invert_path",
    "loop_monodromy",
    "transport_east_clear",
    "transport_flow",
    "transport_north",
    "transport_path",
    "transport_path_full",
    "transport_prong_cross",
    "AliveAt",
    "BlownUp",
    "ErgodicConstants",
    "Ray",
    "SectionEvent",
    "SectionTrace",
    "advance_section",
    "advance_section_west",
    "check_bounds",
    "estimate_constants",
    "fine_step_t_max",
    "full_section_east",
    "full_section_west",
    "full_transport_east",
    "full_transport_west",
    "invert_t_max",
    "ragged_count",
    "replay_events",
    "sample_rays",
    "t_max_east",
    "t_max_west",
    "FillingMonodromy",
    "LoopKind",
    "LoopWord",
    "SampledHomeo",
    "SlopedLine",
    "StepInterval",
    "builtin_relations",
    "filling_monodromy",
    "order_witness",
    "relation_residual",
    "step_decomposition",
    "Gluing",
    "TreePoint",
    "TreeQuotient",
    "build_quotient",
    "canonical_rep",
    "check_ancestor_claim",
    "check_shift_equivariance",
]
