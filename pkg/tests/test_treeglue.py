"""
Tests for the glued binary tree quotients.

Grid points are (word, k) with k counted in steps of 1/N along the edge
ending at ``word``; at resolution 2 there are N = 4 steps per edge.
"""

from fractions import Fraction

import numpy as np
import pytest

from holonomy.core.treeglue import (
    CLAIM_MARGIN,
    Gluing,
    TreePoint,
    build_quotient,
    canonical_rep,
    check_ancestor_claim,
    check_shift_equivariance,
    grid_depth,
    grid_parent,
    is_canonical,
    is_tree_ancestor,
    predicted_geq,
    sample_pairs,
    split_tail,
)
from holonomy.exceptions import ResolutionMismatch, TruncationBoundary
from holonomy.utils.disjoint_set import DisjointSet


@pytest.fixture(scope="module")
def quotient_a():
    return build_quotient("A", 8, 2)


@pytest.fixture(scope="module")
def quotient_b():
    return build_quotient(Gluing.B, 8, 2)


class TestTreePoint:
    """Tests for tree points and grid coordinates."""

    def test_vertex(self):
        point = TreePoint("LR")
        assert str(point) == "v0LR"
        assert point.depth == 2
        assert point.to_grid(2) == ("LR", 4)

    def test_edge_point(self):
        point = TreePoint("", Fraction(1, 2), "L")
        assert str(point) == "v0L^1/2"
        assert point.to_grid(2) == ("L", 2)
        assert TreePoint.from_grid(("L", 2), 2) == point

    def test_root(self):
        assert TreePoint.from_grid(("", 4), 2) == TreePoint("")

    def test_off_grid(self):
        with pytest.raises(ResolutionMismatch):
            TreePoint("", Fraction(1, 3), "R").to_grid(2)

    def test_invalid_points(self):
        with pytest.raises(ValueError):
            TreePoint("LX")
        with pytest.raises(ValueError):
            TreePoint("", Fraction(1))
        with pytest.raises(ValueError):
            TreePoint("", Fraction(1, 2), "X")


class TestGridHelpers:
    """Grid depth, parents, ancestry and canonical form."""

    def test_depth_and_parent(self):
        assert grid_depth(("", 4), 4) == 0
        assert grid_depth(("LR", 3), 4) == 7
        assert grid_parent(("LR", 3), 4) == ("LR", 2)
        assert grid_parent(("LR", 1), 4) == ("L", 4)

    def test_tree_ancestor(self):
        assert is_tree_ancestor(("L", 4), ("LRL", 2))
        assert is_tree_ancestor(("L", 2), ("L", 3))
        assert not is_tree_ancestor(("L", 3), ("L", 2))
        assert not is_tree_ancestor(("L", 4), ("RL", 4))

    def test_canonical(self):
        assert is_canonical(("RRR", 4), 4)
        assert is_canonical(("LRR", 2), 4)
        assert is_canonical(("RLLR", 4), 4)
        assert not is_canonical(("RL", 4), 4)
        assert not is_canonical(("LL", 2), 4)

    def test_split_tail(self):
        assert split_tail(("RR", 4), 4) == ("", Fraction(2))
        assert split_tail(("LLR", 2), 4) == ("LL", Fraction(1, 2))

    def test_predicted_cases(self):
        assert predicted_geq(("", 4), ("LRL", 4), 4) == "a"
        assert predicted_geq(("R", 4), ("LL", 4), 4) == "b"
        assert predicted_geq(("LL", 4), ("RLL", 4), 4) is None


class TestGluingA:
    """Depth-preserving gluing of the two outer spines."""

    def test_class_count(self, quotient_a):
        assert quotient_a.num_classes == 33

    def test_total_order(self, quotient_a):
        assert quotient_a.is_partial_order()
        assert quotient_a.is_total_order()
        assert quotient_a.incomparable_pair() is None

    def test_classes_are_levels(self, quotient_a):
        assert quotient_a.class_of(("LRL", 2)) == quotient_a.class_of(("RRR", 2))
        assert quotient_a.geq(("L", 4), ("RR", 1))

    def test_small_quotient(self):
        quotient = build_quotient("A", 2, 0)
        assert quotient.num_classes == 3
        assert quotient.is_total_order()

    def test_shift_equivariance(self, quotient_a):
        holds, counterexample = check_shift_equivariance(quotient_a)
        assert holds
        assert counterexample is None

    def test_canonical_rep_needs_b(self, quotient_a):
        with pytest.raises(ValueError):
            canonical_rep(quotient_a, ("L", 4))


class TestGluingB:
    """Doubling gluing of the left spine into the right-left spine."""

    def test_right_spine_vertices_identified(self, quotient_b):
        first = quotient_b.class_of(TreePoint("L"))
        for n in range(1, 6):
            assert quotient_b.class_of(TreePoint("R" * n + "L")) == first

    def test_doubling_on_first_edge(self, quotient_b):
        assert quotient_b.class_of(("L", 1)) == quotient_b.class_of(("R", 2))
        assert quotient_b.class_of(("L", 2)) == quotient_b.class_of(("R", 4))

    def test_not_totally_ordered(self, quotient_b):
        assert quotient_b.is_partial_order()
        assert not quotient_b.is_total_order()
        assert quotient_b.incomparable_pair() is not None

    def test_incomparable_pair(self, quotient_b):
        assert not quotient_b.comparable(TreePoint("LL"), TreePoint("RLL"))

    def test_root_is_above_everything(self, quotient_b):
        assert quotient_b.geq(TreePoint(""), TreePoint("RLRL"))

    def test_canonical_rep(self, quotient_b):
        assert canonical_rep(quotient_b, TreePoint("RRL")) == TreePoint("L")
        assert str(canonical_rep(quotient_b, ("RL", 4))) == "v0L"

    def test_resolution_zero_rejected(self):
        with pytest.raises(ResolutionMismatch):
            build_quotient("B", 4, 0)

    def test_truncation_boundary(self, quotient_b):
        with pytest.raises(TruncationBoundary):
            quotient_b.class_of(("L" * 9, 4))


class TestAncestorClaim:
    """The ancestor rule for canonical points against reachability."""

    def test_right_spine_case(self, quotient_b):
        check = check_ancestor_claim(quotient_b, ("R", 4), ("LL", 4))
        assert check.case == "b"
        assert check.predicted and check.brute
        assert check.agree
        assert check.witness[0] == TreePoint.from_grid(
            quotient_b.representative(quotient_b.class_of(("R", 4))), 2
        )

    def test_incomparable_case(self, quotient_b):
        for a, b in ((("LL", 4), ("RLL", 4)), (("RLL", 4), ("LL", 4))):
            check = check_ancestor_claim(quotient_b, a, b)
            assert not check.predicted
            assert not check.brute
            assert check.witness == []

    def test_to_dict(self, quotient_b):
        data = check_ancestor_claim(quotient_b, ("", 4), ("LR", 2)).to_dict()
        assert data["a"] == "v0"
        assert data["case"] == "a"
        assert data["agree"] is True

    def test_rejects_non_canonical(self, quotient_b):
        with pytest.raises(ValueError):
            check_ancestor_claim(quotient_b, ("RL", 4), ("L", 4))

    def test_rejects_deep_points(self, quotient_b):
        with pytest.raises(TruncationBoundary):
            check_ancestor_claim(quotient_b, ("R" * 6, 4), ("L", 4))

    @pytest.mark.validation
    def test_sampled_pairs_agree(self, quotient_b):
        points = quotient_b.canonical_points((quotient_b.depth - CLAIM_MARGIN) * quotient_b.n)
        pairs = sample_pairs(points, 300, np.random.default_rng(7))
        for a, b in pairs:
            assert check_ancestor_claim(quotient_b, a, b).agree, (a, b)


class TestQuotientOutput:
    """Views of the class graph."""

    def test_to_dot(self, quotient_a):
        dot = quotient_a.to_dot()
        assert dot.startswith("digraph quotient_A {")
        assert "c0 -> " in dot
        assert dot.endswith("}\n")

    def test_classes_of(self, quotient_a):
        classes = quotient_a.classes_of()
        assert len(classes) == 33
        assert classes[quotient_a.class_of(("", 4))] == [TreePoint("")]

    def test_canonical_points_bounded(self, quotient_b):
        points = quotient_b.canonical_points(8)
        assert all(grid_depth(p, 4) <= 8 for p in points)
        assert ("R", 4) in points

    def test_sample_pairs(self):
        points = [("L", 4), ("R", 4), ("", 4)]
        a = sample_pairs(points, 10, np.random.default_rng(1))
        b = sample_pairs(points, 10, np.random.default_rng(1))
        assert a == b
        assert len(a) == 10
        assert all(p in points and q in points for p, q in a)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            build_quotient("A", 13, 2)
        with pytest.raises(ValueError):
            build_quotient("A", 4, 7)
        with pytest.raises(ValueError):
            build_quotient("C", 4, 2)


class TestDisjointSet:
    """Tests for the union-find forest."""

    def test_union_and_find(self):
        forest = DisjointSet([1, 2, 3, 4])
        forest.union(1, 2)
        forest.union(3, 4)
        assert forest.same(1, 2)
        assert not forest.same(2, 3)
        assert forest.count() == 2

    def test_groups(self):
        forest = DisjointSet("abc")
        forest.union("a", "c")
        groups = sorted(sorted(g) for g in forest.groups().values())
        assert groups == [["a", "c"], ["b"]]

    def test_lazy_creation(self):
        forest = DisjointSet()
        assert "x" not in forest
        forest.find("x")
        assert "x" in forest
        assert len(forest) == 1


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
