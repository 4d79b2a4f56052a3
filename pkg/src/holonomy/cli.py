"""
Command-line interface for holonomy.

Usage:
    holonomy check  scenes/fig8_5_1.json
    holonomy trace  scenes/fig8_5_1.json --x 1.0 --horizon 50
    holonomy tmax   scenes/fig8_5_1.json --x 0.5 1 2 --rays 20
    holonomy monodromy scenes/fig8_5_1.json --orbit 0 --radius 0.05
    holonomy relations scenes/fig8_5_1.json
    holonomy ergodic scenes/fig8_5_1.json --samples 1000
    holonomy bounds scenes/fig8_5_1.json --s 1 10 100 --rays 20
    holonomy tree --gluing A --depth 8 --resolution 2
    holonomy render scenes/fig8_5_1.json --figure blowup --out fig.svg

Reports go to stdout unless --out is given. Exit status is 0 when every
check passes, 2 when only advisory warnings were raised and 1 on errors.
"""

from __future__ import annotations

import argparse
import inspect
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np
import pandas as pd
from dotenv import load_dotenv
from loguru import logger as log_sink

from holonomy.core.action import (
    SlopedLine,
    builtin_relations,
    filling_monodromy,
    intervals_disjoint,
    order_witness,
    relation_residual,
    step_decomposition,
)
from holonomy.core.blowup import (
    DENSITY_LIMITS,
    Ray,
    advance_section,
    advance_section_west,
    check_bounds,
    density_ratios,
    density_violations,
    estimate_constants,
    sample_rays,
    t_max_east,
)
from holonomy.core.surface import Scene, validate_slope
from holonomy.core.treeglue import (
    CLAIM_MARGIN,
    Gluing,
    build_quotient,
    check_ancestor_claim,
    check_shift_equivariance,
    sample_pairs,
)
from holonomy.exceptions import HolonomyError
from holonomy.io.readers import load_defaults, load_scene, load_tolerances
from holonomy.io.render import blowup_starts, default_ray, render_blowup, render_stepmap, render_tree
from holonomy.io.writers import dumps_report, write_dot, write_frame, write_json_report, write_svg
from holonomy.utils.tolerances import DEFAULT_SEED, Tolerances

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_WARNING = 2

COMMANDS = (
    "check", "trace", "tmax", "monodromy", "relations",
    "ergodic", "bounds", "tree", "render",
)
SCENELESS = frozenset({"tree"})
FIGURES = ("blowup", "stepmap", "tree")


class UsageError(ValueError):
    """Raised by the argument parser instead of exiting."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.prog}: {message}")


class InterceptHandler(logging.Handler):
    """Route stdlib logging records into the loguru sink."""

    def emit(self, record: logging.LogRecord) -> None:
        try:
            level: str | int = log_sink.level(record.levelname).name
        except ValueError:
            level = record.levelno

        frame, depth = inspect.currentframe(), 0
        while frame and (depth == 0 or frame.f_code.co_filename == logging.__file__):
            frame = frame.f_back
            depth += 1

        log_sink.opt(depth=depth, exception=record.exc_info).log(level, record.getMessage())


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = "DEBUG" if verbose else "WARNING" if quiet else "INFO"
    log_sink.remove()
    log_sink.add(sys.stderr, level=level, format="{level: <8} | {name} | {message}")
    logging.basicConfig(handlers=[InterceptHandler()], level=0, force=True)


@dataclass
class RunConfig:
    """Everything one CLI invocation needs.

    Attributes:
        command: Subcommand name
        scene_path: Scene file, None for scene-free commands
        seed: Seed of every randomized step
        out_path: Output file, None for stdout
        overrides: Tolerance overrides from --tol key=value
        config_path: Optional YAML or JSON tolerance file
        options: Command-specific flags
    """
    command: str
    scene_path: Path | None = None
    seed: int = DEFAULT_SEED
    out_path: Path | None = None
    overrides: dict[str, float] = field(default_factory=dict)
    config_path: Path | None = None
    options: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ValueError(f"Unknown command {self.command!r}")
        scene_free = self.command in SCENELESS or self.options.get("figure") == "tree"
        if not scene_free and self.scene_path is None:
            raise ValueError(f"Command {self.command!r} needs a scene file")
        if self.seed < 0:
            raise ValueError(f"Seed must be non-negative, got {self.seed}")

    @property
    def tolerances(self) -> Tolerances:
        return load_tolerances(self.config_path, self.overrides)

    def load_scene(self) -> Scene:
        assert self.scene_path is not None
        return load_scene(self.scene_path, self.tolerances)

    def option(self, name: str, default: Any = None) -> Any:
        value = self.options.get(name)
        return default if value is None else value


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------

def _emit_report(config: RunConfig, report: dict[str, Any]) -> None:
    if config.out_path is None:
        sys.stdout.write(dumps_report(report) + "\n")
    else:
        write_json_report(report, config.out_path)


def _emit_frame(config: RunConfig, frame: pd.DataFrame) -> None:
    if config.out_path is None:
        frame.to_csv(sys.stdout, index=False, float_format="%.12g", lineterminator="\n")
    else:
        write_frame(frame, config.out_path)


def _emit_text(config: RunConfig, lines: list[str]) -> None:
    text = "\n".join(lines) + "\n"
    if config.out_path is None:
        sys.stdout.write(text)
    else:
        config.out_path.parent.mkdir(parents=True, exist_ok=True)
        config.out_path.write_text(text)
        logger.info(f"Report written to {config.out_path}")


def _ray_from(config: RunConfig) -> Ray:
    base = config.option("base")
    if base is None:
        return Ray(default_ray().base, config.option("time", 0.0))
    return Ray((float(base[0]), float(base[1])), config.option("time", 0.0))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_check(config: RunConfig) -> int:
    """Build the scene and check the parity rule of every orbit."""
    scene = config.load_scene()
    orbits = []
    warnings = 0
    for i, (orbit, slope) in enumerate(scene.orbits):
        report = validate_slope(orbit, slope, i).to_dict()
        report.update(period=orbit.period, omega=orbit.omega, alpha=slope.alpha)
        warnings += len(report.get("warnings", []))
        orbits.append(report)
    _emit_report(
        config,
        {
            "scene": scene.name,
            "lambda": scene.lam,
            "reflected": scene.reflected,
            "kappa": scene.kappa,
            "orbits": orbits,
            "warnings": warnings,
        },
    )
    return EXIT_WARNING if warnings else EXIT_OK


def cmd_trace(config: RunConfig) -> int:
    """Event log of one parallel section as CSV."""
    scene = config.load_scene()
    ray = _ray_from(config)
    x = float(config.option("x", 1.0))
    horizon = float(config.option("horizon", 50.0))
    advance = advance_section_west if config.option("west", False) else advance_section
    trace = advance(scene, ray, x, horizon)
    logger.info(f"Section from x={x:g}: {trace.status}")
    _emit_frame(config, trace.to_frame())
    return EXIT_OK


def cmd_tmax(config: RunConfig) -> int:
    """Blowup times over random rays; fails if some ray is not monotone in x."""
    scene = config.load_scene()
    xs = sorted(float(x) for x in config.option("x", [1.0]))
    rays = sample_rays(scene, int(config.option("rays", 20)), np.random.default_rng(config.seed))
    horizon = config.option("horizon")

    rows = []
    violations = 0
    for index, ray in enumerate(rays):
        previous = None
        for x in xs:
            t = t_max_east(scene, ray, x, horizon)
            rows.append(
                {"ray": index, "base_east": ray.base[0], "base_north": ray.base[1],
                 "x": x, "t_max": t}
            )
            if previous is not None and np.isfinite(previous) and not t < previous:
                violations += 1
                logger.warning(f"Ray {index}: t_max not decreasing at x={x:g}")
            previous = t
    _emit_frame(config, pd.DataFrame(rows, columns=["ray", "base_east", "base_north", "x", "t_max"]))
    return EXIT_ERROR if violations else EXIT_OK


def cmd_monodromy(config: RunConfig) -> int:
    """Meridian monodromy of one filled orbit."""
    scene = config.load_scene()
    result = filling_monodromy(
        scene, int(config.option("orbit", 0)), float(config.option("radius", 0.05))
    )
    _emit_report(config, result.to_dict())
    tol = scene.tolerances.monodromy_tol
    return EXIT_OK if result.max_deviation < tol and result.wraparound == 0 else EXIT_ERROR


def cmd_relations(config: RunConfig) -> int:
    """Residuals of the built-in relation words and the order witness."""
    scene = config.load_scene()
    relations = builtin_relations(scene, seed=config.seed)
    residuals = {name: relation_residual(scene, words) for name, words in sorted(relations.items())}
    report: dict[str, Any] = {"residuals": residuals}
    failed = any(r >= scene.tolerances.monodromy_tol for r in residuals.values())
    if scene.has_magnifying:
        witness = order_witness(scene)
        report["witness"] = witness.to_dict()
        failed = failed or not witness.nontrivial
    _emit_report(config, report)
    return EXIT_ERROR if failed else EXIT_OK


def cmd_ergodic(config: RunConfig) -> int:
    """Estimated constants and density ratios of ragged rectangles."""
    scene = config.load_scene()
    defaults = load_defaults()
    constants = estimate_constants(
        scene,
        sample_count=int(config.option("samples", defaults["estimate_samples"])),
        seed=config.seed,
        safety_factor=float(config.option("safety", defaults["safety_factor"])),
        progress=bool(config.option("progress", False)),
    )
    ratios = density_ratios(
        scene,
        config.option("areas", [10.0, 100.0, 1000.0]),
        int(config.option("placements", 100)),
        config.seed,
    )
    violations = density_violations(ratios)
    for area in violations:
        logger.warning(f"Area {area:g}: a placement deviates beyond {DENSITY_LIMITS[area]:g}")
    _emit_report(
        config,
        {
            "constants": constants.to_dict(),
            "density": ratios.to_dict(orient="records"),
            "densityViolations": violations,
        },
    )
    return EXIT_ERROR if violations else EXIT_OK


def cmd_bounds(config: RunConfig) -> int:
    """Check the fast and slow blowup bounds, re-estimating once on violations."""
    scene = config.load_scene()
    defaults = load_defaults()
    samples = int(config.option("samples", defaults["estimate_samples"]))
    safety = float(config.option("safety", defaults["safety_factor"]))
    s_grid = config.option("s", [1.0, 10.0, 100.0])
    rays = int(config.option("rays", 20))

    constants = estimate_constants(scene, samples, seed=config.seed, safety_factor=safety)
    report = check_bounds(scene, constants, s_grid, rays, seed=config.seed)
    status = EXIT_OK
    if not report.passed:
        logger.warning(f"{report.violations} violations; re-estimating with safety {2 * safety:g}")
        constants = estimate_constants(scene, samples, seed=config.seed, safety_factor=2 * safety)
        report = check_bounds(scene, constants, s_grid, rays, seed=config.seed)
        status = EXIT_WARNING if report.passed else EXIT_ERROR

    if config.option("csv", False):
        _emit_frame(config, report.checks)
    else:
        _emit_report(config, {"constants": constants.to_dict(), **report.to_dict()})
    return status


def cmd_tree(config: RunConfig) -> int:
    """Build a glued tree quotient and check its order."""
    gluing = Gluing(config.option("gluing", "A"))
    quotient = build_quotient(
        gluing, int(config.option("depth", 8)), int(config.option("resolution", 2))
    )
    total = quotient.is_total_order()
    equivariant, _ = check_shift_equivariance(quotient)
    lines = [
        f"classes: {quotient.num_classes}",
        f"total order: {'true' if total else 'false'}",
        f"shift equivariant: {'true' if equivariant else 'false'}",
    ]

    status = EXIT_OK if equivariant else EXIT_ERROR
    pairs = int(config.option("pairs", 0))
    if pairs and gluing is Gluing.B:
        points = quotient.canonical_points((quotient.depth - CLAIM_MARGIN) * quotient.n)
        checks = [
            check_ancestor_claim(quotient, a, b)
            for a, b in sample_pairs(points, pairs, np.random.default_rng(config.seed))
        ]
        disagreements = sum(not c.agree for c in checks)
        lines.append(f"claim checks: {len(checks)}, disagreements: {disagreements}")
        if disagreements:
            status = EXIT_ERROR

    _emit_text(config, lines)
    dot = config.option("dot")
    if dot:
        write_dot(quotient, dot)
    return status


def cmd_render(config: RunConfig) -> int:
    """Write one SVG figure."""
    figure = config.option("figure", "blowup")
    out = config.out_path or Path(f"{figure}.svg")
    if figure == "tree":
        quotient = build_quotient(
            config.option("gluing", "A"),
            int(config.option("depth", 4)),
            int(config.option("resolution", 1)),
        )
        write_svg(render_tree(quotient), out)
        return EXIT_OK

    scene = config.load_scene()
    ray = _ray_from(config)
    if figure == "blowup":
        svg = render_blowup(scene, ray, blowup_starts(), float(config.option("horizon", 50.0)))
        write_svg(svg, out)
        return EXIT_OK

    line = SlopedLine(ray.base, float(config.option("slope", -1.0)), ray.time)
    intervals = step_decomposition(scene, line, int(config.option("count", 4)))
    write_svg(render_stepmap(scene, line, intervals), out)
    return EXIT_OK if intervals_disjoint(intervals) else EXIT_WARNING


HANDLERS: dict[str, Callable[[RunConfig], int]] = {
    "check": cmd_check,
    "trace": cmd_trace,
    "tmax": cmd_tmax,
    "monodromy": cmd_monodromy,
    "relations": cmd_relations,
    "ergodic": cmd_ergodic,
    "bounds": cmd_bounds,
    "tree": cmd_tree,
    "render": cmd_render,
}


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _tolerance_override(text: str) -> tuple[str, float]:
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        return key.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {value!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="RNG seed (env HOLONOMY_SEED wins)")
    common.add_argument("--out", type=Path, help="Output file; stdout if omitted")
    common.add_argument("--config", type=Path, help="YAML or JSON tolerance file")
    common.add_argument("--tol", type=_tolerance_override, action="append", default=[],
                        metavar="KEY=VALUE", help="Override one tolerance")
    common.add_argument("-v", "--verbose", action="store_true")
    common.add_argument("-q", "--quiet", action="store_true")

    parser = _Parser(prog="holonomy", description="Flat connections on punctured torus bundles")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, help_text: str, scene: bool = True) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help_text)
        if scene:
            p.add_argument("scene", type=Path, help="Scene JSON file")
        return p

    def ray_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--base", type=float, nargs=2, metavar=("EAST", "NORTH"))
        p.add_argument("--time", type=float, default=0.0)

    command("check", "Validate a scene file")

    p = command("trace", "Event log of one parallel section")
    ray_flags(p)
    p.add_argument("--x", type=float, default=1.0)
    p.add_argument("--horizon", type=float, default=50.0)
    p.add_argument("--west", action="store_true")

    p = command("tmax", "Blowup times over random rays")
    p.add_argument("--x", type=float, nargs="+", default=[1.0])
    p.add_argument("--rays", type=int, default=20)
    p.add_argument("--horizon", type=float)

    p = command("monodromy", "Meridian monodromy of a filled orbit")
    p.add_argument("--orbit", type=int, default=0)
    p.add_argument("--radius", type=float, default=0.05)

    command("relations", "Relation residuals and the order witness")

    p = command("ergodic", "Estimate ergodic constants")
    p.add_argument("--samples", type=int)
    p.add_argument("--safety", type=float)
    p.add_argument("--areas", type=float, nargs="+")
    p.add_argument("--placements", type=int, default=100)
    p.add_argument("--progress", action="store_true")

    p = command("bounds", "Check the blowup bounds")
    p.add_argument("--samples", type=int)
    p.add_argument("--safety", type=float)
    p.add_argument("--s", type=float, nargs="+")
    p.add_argument("--rays", type=int, default=20)
    p.add_argument("--csv", action="store_true", help="Emit every check as CSV")

    p = command("tree", "Glued tree quotient", scene=False)
    p.add_argument("--gluing", choices=[g.value for g in Gluing], default="A")
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--resolution", type=int, default=2)
    p.add_argument("--pairs", type=int, default=0)
    p.add_argument("--dot", type=Path)

    p = sub.add_parser("render", parents=[common], help="SVG figure")
    p.add_argument("scene", type=Path, nargs="?")
    p.add_argument("--figure", choices=FIGURES, default="blowup")
    ray_flags(p)
    p.add_argument("--horizon", type=float, default=50.0)
    p.add_argument("--slope", type=float, default=-1.0)
    p.add_argument("--count", type=int, default=4)
    p.add_argument("--gluing", choices=[g.value for g in Gluing], default="A")
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--resolution", type=int, default=1)
    return parser


_GLOBAL_KEYS = {"command", "scene", "seed", "out", "config", "tol", "verbose", "quiet"}


def config_from_args(args: argparse.Namespace) -> RunConfig:
    seed = args.seed
    env_seed = os.environ.get("HOLONOMY_SEED")
    if env_seed:
        seed = int(env_seed)
    options = {k: v for k, v in vars(args).items() if k not in _GLOBAL_KEYS}
    return RunConfig(
        command=args.command,
        scene_path=getattr(args, "scene", None),
        seed=seed,
        out_path=args.out,
        overrides=dict(args.tol),
        config_path=args.config,
        options=options,
    )


def main(argv: Sequence[str] | None = None) -> int:
    """Run the CLI and return its exit status."""
    load_dotenv()
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_ERROR

    configure_logging(args.verbose, args.quiet)
    try:
        config = config_from_args(args)
        return HANDLERS[args.command](config)
    except (HolonomyError, ValueError, FileNotFoundError, KeyError) as exc:
        log_sink.error(f"{type(exc).__name__}: {exc}")
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
