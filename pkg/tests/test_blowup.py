"""
Tests for the blowup engine.

Most sweeps run over the default ray of the figure-eight scene, whose base
sits well away from the rotated lattice of singularities.
"""

import math

import numpy as np
import pandas as pd
import pytest

from holonomy.core.blowup import (
    DENSITY_COLUMNS,
    DENSITY_LIMITS,
    EAST,
    WEST,
    AliveAt,
    BlownUp,
    ErgodicConstants,
    Ray,
    _fast_constant,
    advance_section,
    advance_section_west,
    check_bounds,
    density_ratios,
    density_violations,
    estimate_constants,
    fine_step_t_max,
    full_section_east,
    invert_t_max,
    ragged_count,
    replay_events,
    sample_rays,
    sweep_section,
    t_max_east,
    t_max_west,
)
from holonomy.core.fiber import FiberPoint
from holonomy.exceptions import BaseOnSingularity, NoMagnifyingOrbit
from holonomy.utils.extended import INF, lift, respects_circular_order


class TestRay:
    """Tests for the Ray value type."""

    def test_rejects_non_finite_base(self):
        with pytest.raises(ValueError):
            Ray((math.nan, 0.0))

    def test_point_at_and_shift(self):
        ray = Ray((1.0, 2.0), 0.5)
        assert ray.point_at(3.0) == (4.0, 2.0)
        assert ray.point_at(3.0, WEST) == (-2.0, 2.0)
        assert ray.shifted(1.0).base == (2.0, 2.0)
        assert ray.shifted(1.0).time == 0.5


class TestTMax:
    """Blowup times of eastward and westward sections."""

    def test_non_positive_values_never_blow_up(self, fig8, ray):
        assert t_max_east(fig8, ray, 0.0) == INF
        assert t_max_east(fig8, ray, -1.0) == INF

    def test_infinity_blows_up_at_once(self, fig8, ray):
        assert t_max_east(fig8, ray, FiberPoint(INF)) == 0.0

    def test_fibered_scene_never_blows_up(self, fibered, ray):
        assert t_max_east(fibered, ray, 1.0) == INF
        assert t_max_west(fibered, ray, -1.0) == INF

    def test_positive_values_blow_up(self, fig8, ray):
        for x in (0.5, 1.0, 2.0):
            assert math.isfinite(t_max_east(fig8, ray, x))

    def test_monotone_in_start_value(self, fig8, ray):
        times = [t_max_east(fig8, ray, x) for x in (0.5, 1.0, 2.0, 8.0)]
        assert all(a >= b for a, b in zip(times, times[1:]))
        assert times[0] > times[-1]

    def test_west_mirrors_east(self, fig8, ray):
        """Point reflection fixes the lattice and swaps the two directions."""
        mirrored = Ray((-ray.base[0], -ray.base[1]), ray.time)
        for x in (0.5, 2.0):
            east = t_max_east(fig8, ray, x)
            west = t_max_west(fig8, mirrored, -x)
            assert west == pytest.approx(east, rel=1e-9)

    def test_base_on_singularity_raises(self, fig8):
        with pytest.raises(BaseOnSingularity):
            t_max_east(fig8, Ray((0.0, 0.0)), 1.0)


class TestSectionTrace:
    """Event logs produced by sweeps."""

    def test_positive_section_blows_up(self, fig8, ray):
        trace = advance_section(fig8, ray, 1.0, horizon=1000.0)
        assert trace.blown_up
        assert isinstance(trace.status, BlownUp)
        assert trace.status.direction == 1
        assert trace.final_value > fig8.tolerances.s_big
        assert trace.t_max == pytest.approx(t_max_east(fig8, ray, 1.0))

    def test_events_magnify_by_alpha(self, fig8, ray):
        trace = advance_section(fig8, ray, 1.0, horizon=1000.0)
        alpha = fig8.alpha(0)
        assert len(trace.events) > 0
        for event in trace.events:
            assert event.factor == pytest.approx(alpha)
            assert 0.0 < event.height < event.value_before
            assert event.value_after > event.value_before

    def test_event_times_ordered(self, fig8, ray):
        trace = advance_section(fig8, ray, 2.0, horizon=1000.0)
        times = [e.time for e in trace.events]
        assert times == sorted(times)
        assert times[0] > 0.0

    def test_negative_section_contracts(self, fig8, ray):
        for x in (-0.5, -1.0, -2.0):
            trace = advance_section(fig8, ray, x, horizon=50.0)
            assert not trace.blown_up
            assert trace.status == AliveAt(50.0)
            assert x <= trace.final_value < 0.0
            for event in trace.events:
                assert event.factor == pytest.approx(1.0 / fig8.alpha(0))

    def test_replay_matches_final_value(self, fig8, ray):
        for x in (-2.0, 0.5, 3.0):
            trace = advance_section(fig8, ray, x, horizon=50.0)
            assert replay_events(trace) == pytest.approx(trace.final_value, rel=1e-6)

    def test_west_magnifies_negative_values(self, fig8, ray):
        trace = advance_section_west(fig8, ray, -1.0, horizon=1000.0)
        assert trace.direction == WEST
        assert trace.blown_up
        assert trace.status.direction == -1

    def test_value_at(self, fig8, ray):
        trace = advance_section(fig8, ray, 1.0, horizon=1000.0)
        first = trace.events[0]
        assert trace.value_at(first.time / 2) == 1.0
        assert trace.value_at(first.time + 1e-12) == first.value_after

    def test_to_frame(self, fig8, ray):
        trace = advance_section(fig8, ray, 1.0, horizon=1000.0)
        df = trace.to_frame()
        assert list(df.columns) == ["t", "value", "event_flag", "orbit_index", "factor"]
        assert int(df["event_flag"].sum()) == len(trace.events)
        assert df["t"].is_monotonic_increasing
        assert df.iloc[0]["value"] == 1.0

    def test_zero_section_is_constant(self, fig8, ray):
        trace = sweep_section(fig8, ray, 0.0, 10.0, EAST)
        assert trace.events == []
        assert trace.final_value == 0.0

    def test_summary(self, fig8, ray):
        trace = advance_section(fig8, ray, 1.0, horizon=1000.0)
        assert "SECTION TRACE" in trace.summary()
        assert "Blown up" in trace.summary()

    def test_infinite_start_rejected(self, fig8, ray):
        with pytest.raises(ValueError):
            advance_section(fig8, ray, FiberPoint(INF), horizon=1.0)


class TestCompletedConnection:
    """Transport past the blowup time."""

    def test_before_blowup(self, fig8, ray):
        t_max = t_max_east(fig8, ray, 1.0)
        result = full_section_east(fig8, ray, 1.0, t_max / 2)
        assert result.branch == "section"
        assert result.wraps == 0
        assert 1.0 <= result.point.value < INF

    def test_at_blowup(self, fig8, ray):
        t_max = t_max_east(fig8, ray, 1.0)
        result = full_section_east(fig8, ray, 1.0, t_max)
        assert result.branch == "infinity"
        assert result.point.is_inf
        assert result.wraps == 1

    def test_after_blowup_wraps_to_negative(self, fig8, ray):
        t_max = t_max_east(fig8, ray, 1.0)
        result = full_section_east(fig8, ray, 1.0, t_max + 1.0)
        assert result.branch == "wrapped"
        assert result.wraps == 1
        assert result.point.value < 0.0

    def test_negative_distance_rejected(self, fig8, ray):
        with pytest.raises(ValueError):
            full_section_east(fig8, ray, 1.0, -1.0)

    @pytest.mark.slow
    @pytest.mark.validation
    @pytest.mark.parametrize("t", [0.5, 2.0, 5.0])
    def test_monotone_circular_in_start_value(self, fig8, t):
        # Small starts survive, large ones wrap past ∞; the lifted images
        # must still increase and stay within one turn
        xs = [-5.0, -1.0, -0.2, 0.2, 0.5, 1.0, 2.0, 5.0, 20.0]
        for sampled in sample_rays(fig8, 4, np.random.default_rng(7)):
            results = [full_section_east(fig8, sampled, x, t) for x in xs]
            lifted = [lift(r.point.value, r.wraps) for r in results]
            assert respects_circular_order(lifted)
            assert lifted[-1] - lifted[0] < 1.0
            assert results[0].wraps == 0


class TestInversion:
    """Bisection for the start value with a given blowup time."""

    def test_recovers_attained_time(self, fig8, ray):
        target = t_max_east(fig8, ray, 1.0)
        x, t = invert_t_max(fig8, ray, target)
        assert x > 0
        assert t == pytest.approx(target)

    def test_non_positive_target(self, fig8, ray):
        with pytest.raises(ValueError):
            invert_t_max(fig8, ray, 0.0)


class TestRaggedCount:
    """Counting magnifying singularities in ragged rectangles."""

    def test_unit_square_about_origin(self, fig8):
        assert ragged_count(fig8, -0.5, 0.5, -0.5, 1.0) == (1, 1.0)

    def test_empty_dimensions(self, fig8):
        assert ragged_count(fig8, 0.0, 1.0, 0.0, 0.0) == (0, 0.0)
        assert ragged_count(fig8, 1.0, 0.0, 0.0, 1.0) == (0, 0.0)

    def test_negative_height(self, fig8):
        with pytest.raises(ValueError):
            ragged_count(fig8, 0.0, 1.0, 0.0, -1.0)

    def test_fibered_scene_counts_nothing(self, fibered):
        assert ragged_count(fibered, -0.5, 0.5, -0.5, 1.0)[0] == 0

    def test_density_ratio_near_one(self, fig8):
        df = density_ratios(fig8, [20.0, 200.0], placements=100)
        assert list(df.columns) == DENSITY_COLUMNS
        assert len(df) == 2
        assert df.iloc[-1]["deviation"] < 0.1
        assert (df["max_deviation"] >= df["deviation"] * fig8.kappa).all()

    def test_density_placements_positive(self, fig8):
        with pytest.raises(ValueError):
            density_ratios(fig8, [10.0], placements=0)

    @pytest.mark.slow
    @pytest.mark.validation
    def test_every_placement_within_limits(self, fig8):
        df = density_ratios(fig8, list(DENSITY_LIMITS), placements=100)
        for row in df.itertuples():
            assert row.max_deviation <= DENSITY_LIMITS[row.area]
        assert density_violations(df) == []

    def test_density_violations_use_worst_placement(self):
        # Mean within limits, one placement far off
        df = pd.DataFrame(
            [
                {"area": 10.0, "mean_count": 10.1, "ratio": 1.01,
                 "deviation": 0.01, "max_deviation": 0.5},
                {"area": 100.0, "mean_count": 100.0, "ratio": 1.0,
                 "deviation": 0.0, "max_deviation": 0.05},
                {"area": 20.0, "mean_count": 30.0, "ratio": 1.5,
                 "deviation": 0.5, "max_deviation": 0.9},
            ],
            columns=DENSITY_COLUMNS,
        )
        assert density_violations(df) == [10.0]

    def test_density_ratio_deterministic(self, fig8):
        a = density_ratios(fig8, [10.0], placements=20, seed=3)
        b = density_ratios(fig8, [10.0], placements=20, seed=3)
        pd.testing.assert_frame_equal(a, b)

    def test_density_ratio_fibered(self, fibered):
        with pytest.raises(NoMagnifyingOrbit):
            density_ratios(fibered, [10.0])


class TestSampleRays:
    """Random ray bases."""

    def test_count_and_time(self, fig8):
        rays = sample_rays(fig8, 5, np.random.default_rng(0))
        assert len(rays) == 5
        assert all(r.time == 0.0 for r in rays)

    def test_deterministic(self, fig8):
        a = sample_rays(fig8, 3, np.random.default_rng(11))
        b = sample_rays(fig8, 3, np.random.default_rng(11))
        assert a == b


class TestBounds:
    """Checking blowup times against C/S and c/S."""

    @staticmethod
    def _constants(big_c, small_c):
        return ErgodicConstants(
            kappa=1.0, a_star=1.0, a_kappa=1.0, a_epsilon=1.0,
            C=big_c, c=small_c, sample_count=1, seed=0,
        )

    def test_generous_constants_pass(self, fig8):
        report = check_bounds(fig8, self._constants(1e4, 0.0), [1.0, 4.0], rays_per_s=2)
        assert report.passed
        assert len(report.checks) == 2 * 2 * 2 * 2
        assert list(report.checks.columns) == ["S", "ray", "x", "kind", "t_max", "bound", "ok"]

    def test_zero_fast_constant_fails_every_fast_check(self, fig8):
        report = check_bounds(
            fig8, self._constants(0.0, 0.0), [1.0], rays_per_s=3, samples_per_ray=1
        )
        assert report.violations == 3
        assert report.to_dict()["by_s"] == {"1.0": 3}

    def test_empty_grid(self, fig8):
        report = check_bounds(fig8, self._constants(1.0, 1.0), [], rays_per_s=1)
        assert report.passed
        assert report.to_dict() == {"violations": 0, "checks": 0, "by_s": {}}


class TestEstimateConstants:
    """Sampled ergodic constants."""

    def test_fibered_scene(self, fibered):
        with pytest.raises(NoMagnifyingOrbit):
            estimate_constants(fibered, sample_count=10)

    def test_blowup_constant_needs_magnifying_orbit(self, fibered):
        with pytest.raises(NoMagnifyingOrbit):
            _fast_constant(fibered, 1.0)

    def test_sample_count_positive(self, fig8):
        with pytest.raises(ValueError):
            estimate_constants(fig8, sample_count=0)

    @pytest.mark.slow
    def test_small_run(self, fig8):
        constants = estimate_constants(fig8, sample_count=300, seed=5)
        assert constants.kappa == 1.0
        assert constants.a_star > 0
        assert constants.a_kappa > 0
        assert constants.C > 0
        assert constants.c > 0
        assert constants.seed == 5
        assert "ERGODIC CONSTANTS" in constants.summary()
        assert set(constants.to_dict()) == {
            "kappa", "a_star", "a_kappa", "a_epsilon", "epsilon",
            "C", "c", "sample_count", "seed",
        }

    @pytest.mark.slow
    def test_deterministic(self, fig8):
        a = estimate_constants(fig8, sample_count=100, seed=9)
        b = estimate_constants(fig8, sample_count=100, seed=9)
        assert a == b


class TestFineStepOracle:
    """Agreement with the unrescaled fixed-step simulation."""

    def test_trivial_cases(self, fig8, fibered, ray):
        assert fine_step_t_max(fig8, ray, -1.0) == INF
        assert fine_step_t_max(fig8, ray, INF) == 0.0
        assert fine_step_t_max(fibered, ray, 1.0) == INF

    def test_rejects_flowed_rays(self, fig8):
        with pytest.raises(ValueError):
            fine_step_t_max(fig8, Ray((0.3, 0.1), 0.5), 1.0)

    @pytest.mark.slow
    @pytest.mark.validation
    def test_agrees_with_engine(self, fig8, ray):
        for x in (1.0, 2.0):
            engine = t_max_east(fig8, ray, x)
            oracle = fine_step_t_max(fig8, ray, x)
            assert oracle == pytest.approx(engine, rel=1e-3)

    @pytest.mark.slow
    @pytest.mark.validation
    def test_agrees_on_sampled_rays(self, fig8):
        rng = np.random.default_rng(2024)
        for sampled in sample_rays(fig8, 3, rng):
            engine = t_max_east(fig8, sampled, 1.5)
            oracle = fine_step_t_max(fig8, sampled, 1.5)
            assert oracle == pytest.approx(engine, rel=1e-3)

    @pytest.mark.slow
    @pytest.mark.validation
    def test_agrees_on_hundred_instances(self, fig8):
        # Starts up to 10 grow past the scan cap several times, so each
        # singularity must be applied once across rescans
        rng = np.random.default_rng(61320)
        worst = 0.0
        for sampled in sample_rays(fig8, 100, rng):
            x = float(10.0 ** rng.uniform(0.0, 1.0))
            engine = t_max_east(fig8, sampled, x)
            oracle = fine_step_t_max(fig8, sampled, x, dt=1e-4)
            assert math.isfinite(engine) and math.isfinite(oracle)
            worst = max(worst, abs(oracle - engine) / engine)
        assert worst < 1e-3

    def test_oracle_never_earlier_than_replayed_events(self, fig8, ray):
        # A repeated push would blow up before the engine's event log does
        for x in (3.0, 6.0, 10.0):
            engine = t_max_east(fig8, ray, x)
            oracle = fine_step_t_max(fig8, ray, x, dt=1e-4)
            assert oracle >= engine - 1e-4 * (1.0 + 1e-9)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
