"""
Tests for the sampled action of loops on the fiber circle.
"""

import math

import numpy as np
import pytest

from holonomy.core.action import (
    FillingMonodromy,
    LoopKind,
    LoopWord,
    SampledHomeo,
    SlopedLine,
    StepInterval,
    builtin_relations,
    circular_sort,
    concatenate,
    default_fiber_samples,
    filling_monodromy,
    intervals_disjoint,
    meridian_loop,
    order_witness,
    relation_residual,
    sample_monodromy,
    staircase,
    step_decomposition,
)
from holonomy.core.transport import East, Flow, North, PathSpec, transport_path_full
from holonomy.exceptions import NoMagnifyingOrbit, NotClosed, RadiusTooLarge
from holonomy.utils.extended import INF


class TestSampledHomeo:
    """Tests for the sampled homeomorphism container."""

    def test_identity(self):
        homeo = SampledHomeo([INF, -1.0, 1.0], [INF, -1.0, 1.0], [0, 0, 0], 0.0, True, "id")
        assert homeo.wraparound == 0
        assert homeo.respects_order
        assert homeo.circular_deviation == 0.0

    def test_wrapped_sample(self):
        homeo = SampledHomeo([INF, 1.0], [INF, -1.0], [0, 1], INF, True)
        assert homeo.wraparound == 1
        assert homeo.lifted_out == pytest.approx([0.0, 1.25])

    def test_order_reversal_detected(self):
        homeo = SampledHomeo([-1.0, 1.0], [1.0, -1.0], [0, 0], 2.0, True)
        assert not homeo.respects_order

    def test_to_dict_renders_infinity(self):
        homeo = SampledHomeo([INF, 0.0], [INF, 0.0], [0, 0], 0.0, True, "loop")
        data = homeo.to_dict()
        assert data["samples"][0] == ["inf", "inf"]
        assert data["maxDeviation"] == 0.0
        assert data["loop"] == "loop"

    def test_summary(self):
        homeo = SampledHomeo([0.0], [0.0], [0], 0.0, True, "loop")
        assert "MONODROMY loop" in homeo.summary()


class TestSamples:
    """Fiber sample helpers."""

    def test_default_samples(self):
        samples = default_fiber_samples(5, 1.0)
        assert samples[:5] == pytest.approx([-1.0, -0.5, 0.0, 0.5, 1.0])
        assert samples[-1] == INF

    def test_circular_sort_puts_infinity_first(self):
        ordered = circular_sort([2.0, INF, -3.0, 0.0])
        assert [p.value for p in ordered] == [INF, -3.0, 0.0, 2.0]

    def test_staircase_adds_up(self):
        moves = staircase((1.0, -2.0), steps=4)
        assert len(moves) == 8
        assert sum(m.dx for m in moves if isinstance(m, East)) == pytest.approx(1.0)
        assert sum(m.dy for m in moves if isinstance(m, North)) == pytest.approx(-2.0)


class TestLoopWord:
    """Named closed paths."""

    def test_filling_needs_orbit(self):
        path = PathSpec((0.1, 0.1), 0.0, (Flow(1.0),))
        with pytest.raises(ValueError, match="orbit index"):
            LoopWord("m", path, LoopKind.FILLING)

    def test_free_loop_without_orbit(self):
        word = LoopWord("free", PathSpec((0.1, 0.1), 0.0, (East(1.0), East(-1.0))))
        assert word.kind is LoopKind.FREE

    def test_meridian_closes(self, fig8):
        loop = meridian_loop(fig8, 0, 0.05)
        loop.check_closed(fig8)
        assert loop.kind is LoopKind.FILLING
        assert loop.orbit_index == 0

    def test_meridian_radius_checks(self, fig8):
        with pytest.raises(ValueError):
            meridian_loop(fig8, 0, 0.0)
        with pytest.raises(RadiusTooLarge):
            meridian_loop(fig8, 0, 0.6)


class TestFillingMonodromy:
    """The meridian of a filled orbit acts trivially."""

    def test_figure_eight_meridian_is_trivial(self, fig8):
        result = filling_monodromy(fig8, 0, hug_radius=0.05)
        assert isinstance(result, FillingMonodromy)
        assert result.max_deviation < 1e-6
        assert result.wraparound == 0
        assert result.inf_fixed
        assert result.respects_order

    def test_algebraic_product(self, fig8):
        result = filling_monodromy(fig8, 0, hug_radius=0.05)
        assert result.algebraic_product == pytest.approx(1.0, rel=1e-12)

    def test_custom_samples(self, fig8):
        result = filling_monodromy(fig8, 0, hug_radius=0.05, samples=[-1.0, INF, 1.0])
        assert result.sample_in == [INF, -1.0, 1.0]
        assert result.sample_out[0] == INF

    def test_to_dict(self, fig8):
        data = filling_monodromy(fig8, 0, hug_radius=0.05).to_dict()
        assert data["orbit"] == 0
        assert data["radius"] == 0.05
        assert data["wraparound"] == 0
        assert data["algebraicProduct"] == pytest.approx(1.0)

    @pytest.mark.validation
    def test_smaller_radius_agrees(self, fig8):
        result = filling_monodromy(fig8, 0, hug_radius=0.01)
        assert result.max_deviation < 1e-6
        assert result.wraparound == 0

    @pytest.mark.validation
    def test_deviation_shrinks_with_radius(self, fig8):
        deviations = [
            filling_monodromy(fig8, 0, hug_radius=r).max_deviation for r in (0.1, 0.05, 0.025)
        ]
        assert all(d < 1e-6 for d in deviations)
        # non-increasing up to rounding
        for larger, smaller in zip(deviations, deviations[1:]):
            assert smaller <= larger + 1e-12


class TestOrderWitness:
    """The degeneracy-slope loop acts as a dilation."""

    def test_figure_eight_dilation(self, fig8, lam):
        report = order_witness(fig8)
        assert report.nontrivial
        assert report.expected_factor == pytest.approx(lam ** 2)
        assert report.dilation_factor == pytest.approx(lam ** 2, rel=1e-9)
        assert report.witness.kind is LoopKind.WALL

    def test_dilation_on_samples(self, fig8, lam):
        report = order_witness(fig8, samples=[-2.0, 3.0, INF])
        assert report.homeo.inf_fixed
        assert report.homeo.sample_out[1:] == pytest.approx([-2.0 * lam ** 2, 3.0 * lam ** 2])

    def test_to_dict(self, fig8):
        data = order_witness(fig8).to_dict()
        assert data["nontrivial"] is True
        assert data["orbit"] == 0
        assert "witnessLoop" in data

    def test_fibered_scene(self, fibered):
        with pytest.raises(NoMagnifyingOrbit):
            order_witness(fibered)


class TestRelations:
    """Relation words of the filled manifold."""

    def test_builtin_relation_names(self, fig8):
        relations = builtin_relations(fig8)
        assert set(relations) == {"torus_e0", "torus_e1", "filling_0"}
        assert len(relations["torus_e0"]) == 2

    def test_builtin_relations_deterministic(self, fig8):
        a = builtin_relations(fig8, seed=4)
        b = builtin_relations(fig8, seed=4)
        assert a["torus_e1"][0].path == b["torus_e1"][0].path

    def test_empty_relation(self, fig8):
        assert relation_residual(fig8, []) == 0.0

    def test_concatenate_rejects_gaps(self, fig8):
        first = LoopWord("a", PathSpec((0.1, 0.1), 0.0, (East(0.2),)))
        second = LoopWord("b", PathSpec((0.45, 0.1), 0.0, (East(-0.2),)))
        with pytest.raises(NotClosed):
            concatenate(fig8, [first, second])

    @pytest.mark.validation
    def test_relations_act_trivially(self, fig8):
        for name, words in builtin_relations(fig8).items():
            residual = relation_residual(fig8, words)
            assert residual < 1e-6, name

    @staticmethod
    def _lattice_word(scene, rng, base, name):
        """A few short moves, then back to base shifted by a small lattice vector."""
        moves = []
        for kind in rng.integers(0, 2, size=3):
            step = float(rng.uniform(-0.3, 0.3))
            moves.append(East(step) if kind == 0 else North(step))
        end, _ = PathSpec(base, 0.0, tuple(moves)).endpoint(scene.lam)
        target = np.array(base) + scene.eigen.dev_matrix @ rng.integers(-1, 2, size=2)
        moves += [East(float(target[0] - end[0])), North(float(target[1] - end[1]))]
        return LoopWord(name, PathSpec(base, 0.0, tuple(moves)))

    @pytest.mark.validation
    def test_group_law(self, fig8):
        rng = np.random.default_rng(2718)
        samples = [-2.0, -1.0, -0.3, 0.4, 1.0, 2.0]
        for _ in range(20):
            base = tuple(float(v) for v in fig8.eigen.dev_matrix @ rng.random(2))
            first = self._lattice_word(fig8, rng, base, "w1")
            second = self._lattice_word(fig8, rng, base, "w2")
            h1 = sample_monodromy(fig8, first.path, samples)
            h12 = sample_monodromy(fig8, concatenate(fig8, [first, second]), samples)
            for value, wraps, joined, joined_wraps in zip(
                h1.sample_out, h1.wraps, h12.sample_out, h12.wraps
            ):
                composed = transport_path_full(fig8, second.path, value, wraps=wraps)
                assert composed.wraps == joined_wraps
                assert abs(composed.point.value - joined) <= 1e-8 * max(1.0, abs(joined))


class TestSlopedLine:
    """Validation of the line walked by the step decomposition."""

    def test_slope_must_be_negative(self):
        with pytest.raises(ValueError):
            SlopedLine((0.0, 0.0), slope=0.5)

    def test_step_must_be_positive(self):
        with pytest.raises(ValueError):
            SlopedLine((0.0, 0.0), step=0.0)


class TestIntervalsDisjoint:
    """Hulls of consecutive step intervals."""

    def test_disjoint(self):
        intervals = [
            StepInterval(0, (0.0, 0.0), 0.0, [0.2, 0.8], 0.0),
            StepInterval(1, (1.0, -1.0), 1.0, [-0.8, -0.2], -1.0),
        ]
        assert intervals_disjoint(intervals)
        assert intervals[1].hull == (-1.0, -0.2)
        assert intervals[1].expected == (-1.0, 0.0)

    def test_overlap(self):
        intervals = [
            StepInterval(0, (0.0, 0.0), 0.0, [0.2, 0.8], 0.0),
            StepInterval(1, (1.0, -1.0), 1.0, [-0.8, 0.1], -1.0),
        ]
        assert not intervals_disjoint(intervals)


class TestStepDecomposition:
    """Splitting the basepoint fiber along a line of negative slope."""

    @pytest.fixture
    def line(self):
        return SlopedLine((math.sqrt(2) - 1.0, (math.sqrt(5) - 2.0) / 3.0))

    def test_zero_count(self, fig8, line):
        assert step_decomposition(fig8, line, 0) == []

    def test_negative_count(self, fig8, line):
        with pytest.raises(ValueError):
            step_decomposition(fig8, line, -1)

    def test_fibered_scene(self, fibered, line):
        with pytest.raises(NoMagnifyingOrbit):
            step_decomposition(fibered, line, 2)
        assert len(step_decomposition(fibered, line, 1)) == 1

    def test_basepoint_interval(self, fig8, line):
        (first,) = step_decomposition(fig8, line, 1, fiber_samples=5)
        assert first.index == 0
        assert first.lower == 0.0
        assert all(0.0 < v < 1.0 for v in first.lifted)

    @pytest.mark.slow
    def test_intervals_land_in_unit_steps(self, fig8, line):
        intervals = step_decomposition(fig8, line, 4, fiber_samples=7)
        assert len(intervals) == 4
        assert [iv.lower for iv in intervals] == [0.0, -1.0, -2.0, -3.0]
        assert intervals_disjoint(intervals)
        for iv in intervals:
            lo, hi = iv.expected
            assert all(lo - 1e-6 <= v < hi + 1e-6 for v in iv.lifted)
        arcs = [iv.arc_length for iv in intervals]
        assert arcs == sorted(arcs)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
