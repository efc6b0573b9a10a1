"""Tree-to-path reduction and the lift back to full tree share assignments.

Any pruned tree collapses to an equivalent path instance: take the best
buyer value v*, find the lowest common ancestor s0 of all leaves attaining
it, replace the whole subtree under s0 by a single collapsed buyer worth
d0 = v*, and walk up to the root.  Each remaining path node i keeps a
disagreement value d_i: the best buyer value reachable through its
off-path children (0 when it has none).  Solving the path and assigning
share 1 to every off-path edge reproduces a fixed point of the full tree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import DimensionMismatch, InvalidInstance
from .tree import Edge, NodeId, TreeInstance


@dataclass(frozen=True)
class PathInstance:
    """A path bargaining instance (d0, d1, ..., dn).

    Node 0 holds the collapsed buyer value d0 > 0; nodes 1..n carry
    disagreement values 0 <= d_i < d0; node n is the root.  n = 0 means
    the collapsed subtree already reaches the root.
    """

    d: tuple[float, ...]

    def __post_init__(self) -> None:
        d = tuple(float(v) for v in self.d)
        object.__setattr__(self, "d", d)
        if not d:
            raise InvalidInstance("instance needs at least d0")
        if not d[0] > 0.0:
            raise InvalidInstance(f"d0 must be positive, got {d[0]!r}")
        for i, v in enumerate(d[1:], start=1):
            if not 0.0 <= v < d[0]:
                raise InvalidInstance(
                    f"d[{i}] = {v!r} outside [0, d0) with d0 = {d[0]!r}"
                )

    @property
    def n(self) -> int:
        """Number of path edges."""
        return len(self.d) - 1


@dataclass(frozen=True)
class ReductionMapping:
    """Where the path instance sits inside the original tree.

    ``path_nodes`` is the s0-to-root chain (path labels 0..n); every tree
    edge not on that chain is in ``off_path_edges`` and receives share 1
    on lift, including all edges inside the collapsed subtree.
    """

    path_nodes: tuple[NodeId, ...]
    collapsed_subtree_root: NodeId
    off_path_edges: tuple[Edge, ...]


def reduce_to_path(tree: TreeInstance) -> tuple[PathInstance, ReductionMapping]:
    """Collapse a pruned tree to its equivalent path instance.

    d0 is the best buyer value; the collapsed node s0 is the LCA of all
    leaves attaining it, so every off-path subtree maximum is strictly
    below d0 and the resulting PathInstance is always valid.
    """
    if min(tree.leaf_values.values()) <= 0.0:
        raise ValueError("tree must be pruned before reduction")
    subtree_max: dict[NodeId, float] = {}
    max_leaf_count: dict[NodeId, int] = {}
    for node in tree.postorder():
        kids = tree.children[node]
        if not kids:
            subtree_max[node] = tree.leaf_values[node]
        else:
            subtree_max[node] = max(subtree_max[k] for k in kids)
    v_star = subtree_max[tree.root]
    for node in tree.postorder():
        kids = tree.children[node]
        if not kids:
            max_leaf_count[node] = 1 if tree.leaf_values[node] == v_star else 0
        else:
            max_leaf_count[node] = sum(max_leaf_count[k] for k in kids)
    total = max_leaf_count[tree.root]
    s0 = tree.root
    while True:
        carriers = [k for k in tree.children[s0] if max_leaf_count[k] == total]
        if not carriers:
            break
        s0 = carriers[0]
    path_nodes = tree.ancestry(s0)
    path_edges = {
        (path_nodes[i], path_nodes[i + 1]) for i in range(len(path_nodes) - 1)
    }
    d = [v_star]
    for i in range(1, len(path_nodes)):
        node = path_nodes[i]
        on_path_child = path_nodes[i - 1]
        off = [subtree_max[k] for k in tree.children[node] if k != on_path_child]
        d.append(max(off) if off else 0.0)
    off_path_edges = tuple(e for e in tree.edges() if e not in path_edges)
    return (
        PathInstance(tuple(d)),
        ReductionMapping(
            path_nodes=path_nodes,
            collapsed_subtree_root=s0,
            off_path_edges=off_path_edges,
        ),
    )


def lift_to_tree(
    path_solution: Sequence[float],
    mapping: ReductionMapping,
    tree: TreeInstance,
) -> dict[Edge, float]:
    """Expand a path share vector to a share assignment on the full tree.

    Path edge i gets x_i; every off-path edge gets exactly 1.0.
    """
    n = len(mapping.path_nodes) - 1
    x = [float(v) for v in path_solution]
    if len(x) != n:
        raise DimensionMismatch(f"expected {n} path shares, got {len(x)}")
    shares: dict[Edge, float] = {e: 1.0 for e in mapping.off_path_edges}
    for i in range(n):
        shares[(mapping.path_nodes[i], mapping.path_nodes[i + 1])] = x[i]
    return shares
