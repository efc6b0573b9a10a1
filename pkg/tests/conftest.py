"""Shared fixtures: small hand-checkable instances used across modules."""

import pytest

from treebargain import TreeInstance


@pytest.fixture
def chain_tree():
    """Seller - middleman - two buyers; values 1.2 and 0.9."""
    return TreeInstance(
        root="s",
        parent={"m": "s", "b1": "m", "b2": "m"},
        leaf_values={"b1": 1.2, "b2": 0.9},
    )


@pytest.fixture
def branch_tree():
    """Root with a direct buyer (0.6) and a subtree holding 1.0 and 0.1."""
    return TreeInstance(
        root="A",
        parent={"B": "A", "C": "A", "D": "B", "E": "B"},
        leaf_values={"C": 0.6, "D": 1.0, "E": 0.1},
    )


@pytest.fixture
def branch_tree_deep():
    """branch_tree with the direct buyer pushed one hop down."""
    return TreeInstance(
        root="A",
        parent={"B": "A", "C": "A", "D": "B", "E": "B", "F": "C"},
        leaf_values={"D": 1.0, "E": 0.1, "F": 0.6},
    )


@pytest.fixture
def twelve_six():
    """Single seller, buyers valued 12 and 6."""
    return TreeInstance(
        root="s",
        parent={"b1": "s", "b2": "s"},
        leaf_values={"b1": 12.0, "b2": 6.0},
    )


@pytest.fixture
def tie_tree():
    """Two buyers with identical values: the path collapses to the root."""
    return TreeInstance(
        root="s",
        parent={"b1": "s", "b2": "s"},
        leaf_values={"b1": 7.0, "b2": 7.0},
    )
