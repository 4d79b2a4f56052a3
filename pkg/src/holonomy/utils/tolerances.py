"""
Numerical tolerances shared by every holonomy module.

Defaults live in ``config/defaults.yaml`` inside the package; the constants
below mirror them so library code works without reading any file.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Mapping

logger = logging.getLogger(__name__)

DEFAULTS_PATH = Path(__file__).resolve().parent.parent / "config" / "defaults.yaml"

DEFAULT_SEED = 61320

# Keys in the defaults file that are run parameters rather than tolerances
RUN_KEYS = frozenset({"seed", "estimate_samples", "safety_factor"})


@dataclass(frozen=True)
class Tolerances:
    """Tolerances and thresholds for geometry, engine and oracle.

    Attributes:
        event_tol: Absolute tolerance for coincidences in developing coordinates
        monodromy_tol: Deviation below which a monodromy counts as trivial
        oracle_tol: Relative agreement required against the fine-step oracle
        s_big: Value magnitude at which a section is declared blown up
        epsilon_time: Window around t_max that maps to the point at infinity
        bisection_tol: Tolerance on y for the wrapped-section bisection
        window_cap: Maximum predicted singularity count per window
        fine_step: Step of the fine-step oracle
        fine_stop: Value at which the fine-step oracle stops
        horizon: Longest sweep attempted when computing t_max
        prong_height: Height searched when resolving which prong a base is on
        period_cap: Longest orbit accepted by exact orbit detection
    """
    event_tol: float = 1e-10
    monodromy_tol: float = 1e-6
    oracle_tol: float = 1e-3
    s_big: float = 1e12
    epsilon_time: float = 1e-8
    bisection_tol: float = 1e-9
    window_cap: float = 1e7
    fine_step: float = 1e-4
    fine_stop: float = 1e6
    horizon: float = 1e3
    prong_height: float = 10.0
    period_cap: int = 100_000

    def __post_init__(self) -> None:
        """Validate tolerance values."""
        for f in fields(self):
            value = getattr(self, f.name)
            if value <= 0:
                raise ValueError(f"Tolerance {f.name} must be positive, got {value}")
        if self.s_big <= 1:
            raise ValueError(f"s_big must exceed 1, got {self.s_big}")

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> Tolerances:
        """Build tolerances from a config mapping, ignoring run parameters.

        Raises:
            ValueError: If the mapping has keys that are neither tolerances
                nor known run parameters.
        """
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known - RUN_KEYS
        if unknown:
            raise ValueError(f"Unknown tolerance keys: {sorted(unknown)}")
        kwargs = {
            k: int(v) if k == "period_cap" else float(v)
            for k, v in data.items()
            if k in known
        }
        return cls(**kwargs)

    def override(self, **changes: Any) -> Tolerances:
        """Return a copy with some fields replaced."""
        return replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


DEFAULT_TOLERANCES = Tolerances()
