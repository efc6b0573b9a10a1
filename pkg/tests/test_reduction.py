"""Tree-to-path reduction and the lift back to tree shares."""

import numpy as np
import pytest

import helpers
from treebargain import (
    DimensionMismatch,
    InvalidInstance,
    PathInstance,
    TreeInstance,
    lift_to_tree,
    prune,
    reduce_to_path,
    residuals_tree,
    solve_fixed_point,
)


class TestPathInstance:
    def test_coerces_to_floats(self):
        inst = PathInstance((3, 1))
        assert inst.d == (3.0, 1.0)
        assert inst.n == 1

    def test_needs_d0(self):
        with pytest.raises(InvalidInstance):
            PathInstance(())

    def test_d0_must_be_positive(self):
        with pytest.raises(InvalidInstance):
            PathInstance((0.0,))
        with pytest.raises(InvalidInstance):
            PathInstance((-1.0, 0.0))

    def test_later_values_stay_below_d0(self):
        with pytest.raises(InvalidInstance, match=r"d\[2\]"):
            PathInstance((1.0, 0.5, 1.0))
        with pytest.raises(InvalidInstance, match=r"d\[1\]"):
            PathInstance((1.0, -0.1))

    def test_zero_disagreement_is_fine(self):
        assert PathInstance((1.0, 0.0, 0.0)).n == 2


class TestReduce:
    def test_branching_example(self, branch_tree):
        path, mapping = reduce_to_path(branch_tree)
        assert path.d == (1.0, 0.1, 0.6)
        assert mapping.path_nodes == ("D", "B", "A")
        assert mapping.collapsed_subtree_root == "D"
        assert mapping.off_path_edges == (("C", "A"), ("E", "B"))

    def test_two_buyers(self, twelve_six):
        path, mapping = reduce_to_path(twelve_six)
        assert path.d == (12.0, 6.0)
        assert mapping.path_nodes == ("b1", "s")
        assert mapping.off_path_edges == (("b2", "s"),)

    def test_tie_at_root_collapses_everything(self, tie_tree):
        path, mapping = reduce_to_path(tie_tree)
        assert path.d == (7.0,)
        assert path.n == 0
        assert mapping.path_nodes == ("s",)
        assert mapping.collapsed_subtree_root == "s"
        assert set(mapping.off_path_edges) == set(tie_tree.edges())

    def test_tie_below_an_intermediary(self):
        tree = TreeInstance(
            root="A",
            parent={"B": "A", "C": "A", "P": "B", "Q": "B"},
            leaf_values={"C": 5.0, "P": 9.0, "Q": 9.0},
        )
        path, mapping = reduce_to_path(tree)
        assert mapping.collapsed_subtree_root == "B"
        assert mapping.path_nodes == ("B", "A")
        assert path.d == (9.0, 5.0)

    def test_path_node_without_rivals_gets_zero(self):
        tree = TreeInstance(
            root="r",
            parent={"i": "r", "p": "i", "q": "i"},
            leaf_values={"p": 9.0, "q": 9.0},
        )
        path, mapping = reduce_to_path(tree)
        assert mapping.path_nodes == ("i", "r")
        assert path.d == (9.0, 0.0)

    def test_requires_pruning(self):
        tree = TreeInstance(
            root="r", parent={"a": "r", "b": "r"}, leaf_values={"a": 1.0, "b": 0.0}
        )
        with pytest.raises(ValueError, match="pruned"):
            reduce_to_path(tree)
        reduce_to_path(prune(tree))

    def test_off_path_maxima_stay_below_d0(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            tree = helpers.random_tree(rng, max_nodes=40)
            path, _ = reduce_to_path(tree)
            assert path.d[0] == max(tree.leaf_values.values())
            assert all(v < path.d[0] for v in path.d[1:])


class TestLift:
    def test_places_path_shares_and_ones(self, branch_tree):
        _, mapping = reduce_to_path(branch_tree)
        shares = lift_to_tree([0.9, 0.8], mapping, branch_tree)
        assert shares[("D", "B")] == 0.9
        assert shares[("B", "A")] == 0.8
        assert shares[("C", "A")] == 1.0
        assert shares[("E", "B")] == 1.0
        assert set(shares) == set(branch_tree.edges())

    def test_dimension_mismatch(self, branch_tree):
        _, mapping = reduce_to_path(branch_tree)
        with pytest.raises(DimensionMismatch):
            lift_to_tree([0.9], mapping, branch_tree)

    def test_n_zero_lift_is_all_ones(self, tie_tree):
        _, mapping = reduce_to_path(tie_tree)
        shares = lift_to_tree([], mapping, tie_tree)
        assert shares == {("b1", "s"): 1.0, ("b2", "s"): 1.0}

    def test_round_trip_reaches_a_fixed_point(self):
        rng = np.random.default_rng(12)
        for _ in range(25):
            tree = helpers.random_tree(rng, max_nodes=40)
            path, mapping = reduce_to_path(tree)
            sol = solve_fixed_point(path)
            shares = lift_to_tree(sol.x, mapping, tree)
            worst = max(residuals_tree(tree, shares).values())
            assert worst <= 1e-9
