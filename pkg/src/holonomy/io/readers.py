"""
Input Readers for holonomy.

This module loads scenes, paths and configuration from JSON and YAML
files. Rational coordinates in scene files are strings "num/den".
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Mapping, Sequence

import yaml

from holonomy.core.surface import Scene, build_scene
from holonomy.core.transport import (
    Crossing,
    East,
    Flow,
    Move,
    North,
    PathSpec,
    ProngCross,
)
from holonomy.utils.tolerances import DEFAULTS_PATH, Tolerances

logger = logging.getLogger(__name__)


def _read_json(filepath: Path) -> Any:
    text = filepath.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(
            f"{filepath}: line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc


def scene_from_dict(
    data: Mapping[str, Any],
    tolerances: Tolerances | None = None,
    name: str = "",
) -> Scene:
    """Build a scene from the parsed scene-file object.

    Raises:
        ValueError: If a required key is missing or malformed
    """
    if not isinstance(data, Mapping):
        raise ValueError("Scene file must contain a JSON object")
    missing = {"matrix", "orbits"} - set(data)
    if missing:
        raise ValueError(f"Scene file missing keys: {sorted(missing)}")

    orbits = []
    for i, entry in enumerate(data["orbits"]):
        try:
            point = entry["point"]
            slope = entry["slope"]
            omega = int(entry.get("omega", 0))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"Orbit {i}: expected keys point, omega, slope") from exc
        if len(point) != 2 or len(slope) != 2:
            raise ValueError(f"Orbit {i}: point and slope must have two entries")
        orbits.append((tuple(point), omega, (int(slope[0]), int(slope[1]))))

    return build_scene(
        data["matrix"], orbits, tolerances=tolerances, name=str(data.get("name", name))
    )


def load_scene(filepath: str | Path, tolerances: Tolerances | None = None) -> Scene:
    """Load a scene file.

    Args:
        filepath: JSON file {"matrix": [[a, b], [c, d]], "orbits": [...]}
        tolerances: Tolerances attached to the scene

    Returns:
        Scene named after the file stem unless the file sets "name"

    Raises:
        FileNotFoundError: If the file does not exist
        ValueError: On unsupported suffix or malformed JSON (with line and column)

    Example:
        >>> scene = load_scene('scenes/fig8_5_1.json')
        >>> scene.orbits[0][1].p
        5
    """
    filepath = Path(filepath)

    if not filepath.exists():
        raise FileNotFoundError(f"Scene file not found: {filepath}")
    if filepath.suffix.lower() != ".json":
        raise ValueError(f"Unsupported scene format: {filepath.suffix}")

    scene = scene_from_dict(_read_json(filepath), tolerances, name=filepath.stem)
    logger.info(f"Loaded scene {scene.name} from {filepath}")
    return scene


def move_from_dict(entry: Mapping[str, Any]) -> Move:
    """One path move from {"east": dx}, {"north": dy}, {"flow": dt} or {"cross": "LR"}."""
    if not isinstance(entry, Mapping) or len(entry) != 1:
        raise ValueError(f"Each move must be a one-key object, got {entry!r}")
    (key, value), = entry.items()
    if key == "east":
        return East(float(value))
    if key == "north":
        return North(float(value))
    if key == "flow":
        return Flow(float(value))
    if key == "cross":
        return ProngCross(Crossing(value))
    raise ValueError(f"Unknown move {key!r}")


def path_from_data(
    data: Any, base: Sequence[float] = (0.0, 0.0), time: float = 0.0
) -> PathSpec:
    """Path from a move list, or from {"base": [e, n], "time": t, "moves": [...]}."""
    if isinstance(data, Mapping):
        base = data.get("base", base)
        time = float(data.get("time", time))
        data = data.get("moves", [])
    if not isinstance(data, list):
        raise ValueError("Path file must contain a list of moves")
    return PathSpec((float(base[0]), float(base[1])), time, tuple(move_from_dict(m) for m in data))


def load_path(
    filepath: str | Path, base: Sequence[float] = (0.0, 0.0), time: float = 0.0
) -> PathSpec:
    """Load a path file; ``base`` and ``time`` apply to bare move lists.

    Raises:
        FileNotFoundError: If the file does not exist
        ValueError: On malformed JSON or unknown moves
    """
    filepath = Path(filepath)
    if not filepath.exists():
        raise FileNotFoundError(f"Path file not found: {filepath}")
    path = path_from_data(_read_json(filepath), base, time)
    logger.info(f"Loaded path of {len(path)} moves from {filepath}")
    return path


def load_config(filepath: str | Path) -> dict[str, Any]:
    """Load configuration from YAML or JSON file.

    Args:
        filepath: Path to config file

    Returns:
        Configuration dictionary

    Example:
        >>> config = load_config('config/defaults.yaml')
        >>> config['event_tol']
        1e-10
    """
    filepath = Path(filepath)

    if not filepath.exists():
        raise FileNotFoundError(f"Config file not found: {filepath}")

    suffix = filepath.suffix.lower()

    if suffix in (".yaml", ".yml"):
        with open(filepath, "r") as f:
            config = yaml.safe_load(f) or {}
    elif suffix == ".json":
        config = _read_json(filepath)
    else:
        raise ValueError(f"Unsupported config format: {suffix}")

    if not isinstance(config, dict):
        raise ValueError(f"Config file {filepath} must contain a mapping")

    logger.info(f"Loaded configuration from {filepath}")

    return config


def load_defaults() -> dict[str, Any]:
    """The packaged defaults file."""
    return load_config(DEFAULTS_PATH)


def load_tolerances(
    filepath: str | Path | None = None, overrides: Mapping[str, Any] | None = None
) -> Tolerances:
    """Tolerances from the packaged defaults, a config file and overrides, in that order."""
    merged = load_defaults()
    if filepath is not None:
        merged.update(load_config(filepath))
    if overrides:
        merged.update(overrides)
    return Tolerances.from_mapping(merged)
