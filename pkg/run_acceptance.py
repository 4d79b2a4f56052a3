#!/usr/bin/env python3
"""
Holonomy Acceptance Runner

Checks the library against its acceptance properties on the canonical
figure-eight scene (monodromy [[2, 1], [1, 1]], one fixed orbit, slope 5;1)
and on the two glued tree quotients.

Usage:
    python run_acceptance.py            # full sample counts
    python run_acceptance.py --quick    # reduced sample counts

Requirements:
    - Python 3.11+
    - numpy, pandas, scipy, pyyaml, loguru

The script will:
    1. Check the filling meridian acts as the identity
    2. Reproduce the blowup figure behaviour
    3. Compare the event engine with the fine-step simulator
    4. Check t_max is strictly decreasing and hits target times
    5. Check the blowup-rate bounds with estimated constants
    6. Check singularity density in ragged rectangles
    7. Check flatness and dilation equivariance
    8. Check the order witness and the relation words
    9. Check the tree quotients
   10. Check CLI output is deterministic
"""

import argparse
import math
import sys
import tempfile
import time
from pathlib import Path

# Add src to path if running from project root
sys.path.insert(0, str(Path(__file__).parent / "src"))

import numpy as np

SCENE_FILE = Path(__file__).parent / "scenes" / "fig8_5_1.json"
SEED = 61320


def print_header(text: str, char: str = "=") -> None:
    """Print a formatted header."""
    print()
    print(char * 70)
    print(text)
    print(char * 70)


def print_check(label: str, ok: bool, detail: str = "") -> bool:
    """Print a ✓/✗ line and return ``ok``."""
    status = "✓" if ok else "✗"
    print(f"  {status} {label:<48} {detail}")
    return ok


def step_meridian(scene) -> list[bool]:
    from holonomy.core.action import filling_monodromy

    started = time.perf_counter()
    result = filling_monodromy(scene, 0, hug_radius=0.05)
    elapsed = time.perf_counter() - started
    return [
        print_check("algebraic product λ^{mq}·α^{−p} = 1",
                    abs(result.algebraic_product - 1.0) < 1e-12,
                    f"{result.algebraic_product:.15f}"),
        print_check("sampled deviation < 1e-6", result.max_deviation < 1e-6,
                    f"{result.max_deviation:.3e}"),
        print_check("wraparound count 0", result.wraparound == 0, str(result.wraparound)),
        print_check("∞ fixed", result.inf_fixed),
        print_check("runtime < 5 s", elapsed < 5.0, f"{elapsed:.2f} s"),
    ]


def step_blowup_figure(scene) -> list[bool]:
    from holonomy.core.blowup import advance_section
    from holonomy.io.render import default_ray

    ray = default_ray()
    results = []
    for x in (-2.0, -1.0, -0.5):
        trace = advance_section(scene, ray, x, horizon=50.0)
        peak = max([abs(x)] + [abs(e.value_after) for e in trace.events])
        results.append(print_check(
            f"x = {x:g} survives to t = 50 without growing",
            not trace.blown_up and peak <= abs(x), f"{len(trace.events)} events",
        ))
    times = []
    for x in (0.5, 1.0, 2.0):
        trace = advance_section(scene, ray, x, horizon=50.0)
        times.append(trace.t_max)
        results.append(print_check(f"x = {x:g} blows up", trace.blown_up,
                                   f"t_max = {trace.t_max:.6f}"))
    results.append(print_check("t_max strictly decreasing",
                               all(a > b for a, b in zip(times, times[1:]))))
    return results


def step_oracle(scene, instances: int) -> list[bool]:
    from holonomy.core.blowup import fine_step_t_max, sample_rays, t_max_east

    rng = np.random.default_rng(SEED)
    rays = sample_rays(scene, instances, rng)
    worst = 0.0
    compared = 0
    for ray in rays:
        x = float(10.0 ** rng.uniform(0.0, 1.0))
        event = t_max_east(scene, ray, x)
        fine = fine_step_t_max(scene, ray, x, dt=1e-4)
        if math.isinf(event) or math.isinf(fine):
            continue
        worst = max(worst, abs(fine - event) / event)
        compared += 1
    return [
        print_check("instances compared", compared > 0, f"{compared} of {instances}"),
        print_check("relative error < 1e-3", worst < 1e-3, f"{worst:.3e}"),
    ]


def step_monotone(scene, pairs: int) -> list[bool]:
    from holonomy.core.blowup import invert_t_max, sample_rays, t_max_east
    from holonomy.io.render import default_ray

    rng = np.random.default_rng(SEED)
    violations = 0
    for ray in sample_rays(scene, pairs, rng):
        lo, hi = sorted(10.0 ** rng.uniform(-1.0, 1.0, size=2))
        if not t_max_east(scene, ray, lo) > t_max_east(scene, ray, hi):
            violations += 1
    results = [print_check(f"{pairs} sampled pairs strictly decreasing", violations == 0,
                           f"{violations} violations")]
    for target in (0.5, 1.0, 2.0, 4.0):
        x, t = invert_t_max(scene, default_ray(), target)
        results.append(print_check(f"bisection hits t0 = {target:g}",
                                   abs(t - target) <= 0.05, f"x = {x:.6g}, t = {t:.6f}"))
    return results


def step_bounds(scene, samples: int) -> list[bool]:
    from holonomy.core.blowup import check_bounds, estimate_constants

    constants = estimate_constants(scene, sample_count=samples, seed=SEED)
    print(f"  C = {constants.C:.6f}, c = {constants.c:.6g}")
    report = check_bounds(scene, constants, [1.0, 10.0, 100.0], 20, seed=SEED)
    return [print_check("zero bound violations", report.passed,
                        f"{report.violations} of {len(report.checks)}")]


def step_density(scene) -> list[bool]:
    from holonomy.core.blowup import DENSITY_LIMITS, density_ratios

    frame = density_ratios(scene, list(DENSITY_LIMITS), placements=100, seed=SEED)
    return [
        print_check(f"area {row.area:g}: every |count/A − 1| ≤ {DENSITY_LIMITS[row.area]:g}",
                    row.max_deviation <= DENSITY_LIMITS[row.area],
                    f"worst {row.max_deviation:.4f}, mean {row.deviation:.4f}")
        for row in frame.itertuples()
    ]


def step_flatness(scene, loops: int) -> list[bool]:
    from holonomy.core.surface import Window, singularities_in_window
    from holonomy.core.transport import (
        East, Flow, North, PathSpec, default_samples, loop_monodromy, rectangle_loop,
        transport_path,
    )

    rng = np.random.default_rng(SEED)
    samples = default_samples(20, 10.0)
    worst, checked = 0.0, 0
    while checked < loops:
        base = tuple(float(v) for v in scene.eigen.dev_matrix @ rng.random(2))
        # perimeter below 0.1
        width, height = rng.uniform(0.005, 0.024, size=2)
        window = Window(base[0], base[0] + width, base[1], base[1] + height)
        if singularities_in_window(scene, window):
            continue
        report = loop_monodromy(scene, rectangle_loop(base, width, height), samples)
        worst = max(worst, report.max_deviation)
        checked += 1
    results = [print_check(f"{loops} commutator loops deviation < 1e-9", worst < 1e-9,
                           f"{worst:.3e}")]

    worst = 0.0
    for _ in range(20):
        base = tuple(float(v) for v in scene.eigen.dev_matrix @ rng.random(2))
        h, d = float(rng.uniform(-0.05, 0.05)), float(rng.uniform(-0.5, 0.5))
        loop = PathSpec(base, 0.0, (North(h), Flow(d), North(-h * scene.lam ** d), Flow(-d)))
        worst = max(worst, loop_monodromy(scene, loop, samples).max_deviation)
    results.append(print_check("North/Flow commutators deviation < 1e-9", worst < 1e-9,
                               f"{worst:.3e}"))

    path = PathSpec((0.1, 0.1), 0.0, (East(0.8), North(0.3), East(-0.5)))
    for eps in (0.1, 0.5, 1.0):
        scale = scene.lam ** eps
        flowed = path.flowed(eps, scene.lam)
        deviation = 0.0
        for x in np.linspace(-3.0, 1.0, 9):
            before = transport_path(scene, path, x).value
            after = transport_path(scene, flowed, scale * x).value
            deviation = max(deviation, abs(after / scale - before) / max(1.0, abs(before)))
        results.append(print_check(f"dilation equivariance ε = {eps:g}", deviation < 1e-8,
                                   f"{deviation:.3e}"))
    return results


def step_witness(scene) -> list[bool]:
    from holonomy.core.action import builtin_relations, order_witness, relation_residual
    from holonomy.core.fiber import INF

    report = order_witness(scene)
    samples = [float(v) for v in np.linspace(-10.0, 10.0, 20)] + [INF]
    results = [
        print_check("degeneracy dilation = λ^{m·q_deg}",
                    abs(report.dilation_factor - report.expected_factor)
                    < 1e-9 * report.expected_factor,
                    f"{report.dilation_factor:.12g}"),
        print_check("witness nontrivial", report.nontrivial),
    ]
    for name, words in builtin_relations(scene, seed=SEED).items():
        residual = relation_residual(scene, words, samples)
        results.append(print_check(f"relation {name} residual < 1e-6", residual < 1e-6,
                                   f"{residual:.3e}"))
    return results


def step_tree() -> list[bool]:
    from holonomy.core.treeglue import (
        CLAIM_MARGIN, TreePoint, build_quotient, check_ancestor_claim, sample_pairs,
    )

    started = time.perf_counter()
    quotient_a = build_quotient("A", 8, 2)
    quotient_b = build_quotient("B", 8, 2)
    spine = quotient_b.class_of(TreePoint("L"))
    identified = all(
        quotient_b.class_of(TreePoint("R" * n + "L")) == spine for n in range(1, 6)
    )
    points = quotient_b.canonical_points((quotient_b.depth - CLAIM_MARGIN) * quotient_b.n)
    pairs = sample_pairs(points, 200, np.random.default_rng(SEED))
    disagreements = sum(not check_ancestor_claim(quotient_b, a, b).agree for a, b in pairs)
    elapsed = time.perf_counter() - started
    return [
        print_check("gluing A has d·2^g + 1 classes", quotient_a.num_classes == 8 * 4 + 1,
                    str(quotient_a.num_classes)),
        print_check("gluing A totally ordered", quotient_a.is_total_order()),
        print_check("gluing B identifies v0R^nL, n ≤ 5", identified),
        print_check("v0LL and v0RLL incomparable",
                    not quotient_b.comparable(TreePoint("LL"), TreePoint("RLL"))),
        print_check("ancestor rule agrees on 200 pairs", disagreements == 0,
                    f"{disagreements} disagreements"),
        print_check("runtime < 10 s", elapsed < 10.0, f"{elapsed:.2f} s"),
    ]


def step_determinism() -> list[bool]:
    from holonomy.cli import main

    scene = str(SCENE_FILE)
    commands = {
        "check": ["check", scene],
        "trace": ["trace", scene, "--x", "1.0"],
        "tmax": ["tmax", scene, "--x", "0.5", "1", "2", "--rays", "5"],
        "monodromy": ["monodromy", scene],
        "tree": ["tree", "--gluing", "B"],
        "render": ["render", scene, "--figure", "blowup", "--horizon", "10"],
    }
    results = []
    with tempfile.TemporaryDirectory() as tmp:
        for name, argv in commands.items():
            outputs = []
            for run in (1, 2):
                out = Path(tmp) / f"{name}_{run}.out"
                main(argv + ["--out", str(out), "--seed", str(SEED), "-q"])
                outputs.append(out.read_bytes() if out.exists() else None)
            same = outputs[0] is not None and outputs[0] == outputs[1]
            results.append(print_check(f"{name} byte-identical across runs", same))
    return results


def run_acceptance(quick: bool = False) -> int:
    """Run every acceptance step and print the summary."""

    print_header("HOLONOMY ACCEPTANCE")
    print("Figure-eight scene: monodromy [[2, 1], [1, 1]], fixed orbit at 0, slope (5;1)")
    if quick:
        print("Quick mode: reduced sample counts")

    from holonomy.io.readers import load_scene

    scene = load_scene(SCENE_FILE)
    print(f"  λ = {scene.lam:.12f}, α = {scene.slope(0).alpha:.12f}")

    steps = [
        ("STEP 1: Filling Meridian", lambda: step_meridian(scene)),
        ("STEP 2: Blowup Figure", lambda: step_blowup_figure(scene)),
        ("STEP 3: Fine-Step Oracle", lambda: step_oracle(scene, 10 if quick else 100)),
        ("STEP 4: Monotonicity and Bisection", lambda: step_monotone(scene, 50)),
        ("STEP 5: Blowup Bounds", lambda: step_bounds(scene, 1_000 if quick else 10_000)),
        ("STEP 6: Singularity Density", lambda: step_density(scene)),
        ("STEP 7: Flatness", lambda: step_flatness(scene, 40 if quick else 200)),
        ("STEP 8: Order Witness and Relations", lambda: step_witness(scene)),
        ("STEP 9: Tree Quotients", step_tree),
        ("STEP 10: Determinism", step_determinism),
    ]

    outcomes: dict[str, bool] = {}
    for title, step in steps:
        print_header(title, "-")
        try:
            outcomes[title] = all(step())
        except Exception as exc:
            print_check("completed without error", False, f"{type(exc).__name__}: {exc}")
            outcomes[title] = False

    print_header("ACCEPTANCE SUMMARY")
    for title, ok in outcomes.items():
        print(f"  {'✓' if ok else '✗'} {title}")
    passed = sum(outcomes.values())
    print()
    print(f"  {passed} of {len(outcomes)} steps passed")
    return 0 if passed == len(outcomes) else 1


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    parser.add_argument("--quick", action="store_true", help="Reduced sample counts")
    sys.exit(run_acceptance(parser.parse_args().quick))
