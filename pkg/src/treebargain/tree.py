"""Rooted trade trees: instance model, value flow, winner, payoffs, residuals.

An instance is a rooted tree whose leaves are buyers carrying a nonnegative
value; the root is the seller and interior nodes are intermediaries.  A
share assignment maps every edge (child, parent) to a multiplicative split
x in [0, 1]: the child passes an x fraction of the value reaching it to its
parent and keeps the rest.  Value flows bottom-up, every node forwarding
the best offer among its children, and the chain of argmax children from
the root down is the winning path; only nodes on it earn a payoff.

Per-edge residuals measure how far an assignment is from the egalitarian
balance condition in which each side of an edge gains the same amount over
its outside option; an assignment with all residuals below eps is an
eps-fixed point of the tree system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

from .errors import EmptyAfterPrune, MissingShare

NodeId = str
Edge = tuple[NodeId, NodeId]
# Shares are keyed by (child, parent); the root has no upward edge and its
# fictitious upward share is fixed to 0.
ShareAssignment = Mapping[Edge, float]


@dataclass(frozen=True)
class TreeInstance:
    """Immutable rooted tree with buyer values at the leaves.

    ``parent`` maps every non-root node to its parent; ``leaf_values`` maps
    every childless node to its (nonnegative, finite) value.  Child order
    follows the insertion order of ``parent``.  Node ids must be mutually
    orderable (all strings or all integers): argmax ties in the flow
    computation are broken toward the lowest id.
    """

    root: NodeId
    parent: Mapping[NodeId, NodeId]
    leaf_values: Mapping[NodeId, float]
    children: Mapping[NodeId, tuple[NodeId, ...]] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        parent = dict(self.parent)
        leaf_values = {leaf: float(v) for leaf, v in self.leaf_values.items()}
        object.__setattr__(self, "parent", parent)
        object.__setattr__(self, "leaf_values", leaf_values)
        if self.root in parent:
            raise ValueError("root must not have a parent")
        children: dict[NodeId, list[NodeId]] = {self.root: []}
        for node in parent:
            children.setdefault(node, [])
        for node, par in parent.items():
            if par not in children:
                raise ValueError(f"node {node!r} references unknown parent {par!r}")
            children[par].append(node)
        try:
            sorted(children)
        except TypeError:
            raise ValueError("node ids must be mutually orderable") from None
        reached = 0
        stack = [self.root]
        while stack:
            node = stack.pop()
            reached += 1
            stack.extend(children[node])
        if reached != len(children):
            raise ValueError("parent links do not form a tree rooted at the root")
        for node, kids in children.items():
            if kids:
                if node in leaf_values:
                    raise ValueError(f"internal node {node!r} must not carry a value")
            elif node == self.root:
                raise ValueError("root has no children")
            elif node not in leaf_values:
                raise ValueError(f"childless node {node!r} has no buyer value")
        for leaf, value in leaf_values.items():
            if leaf not in children:
                raise ValueError(f"value given for unknown node {leaf!r}")
            if not (math.isfinite(value) and value >= 0.0):
                raise ValueError(f"leaf {leaf!r} value must be finite and >= 0")
        object.__setattr__(
            self, "children", {n: tuple(kids) for n, kids in children.items()}
        )

    @property
    def nodes(self) -> tuple[NodeId, ...]:
        """All node ids in sorted order."""
        return tuple(sorted(self.children))

    @property
    def leaves(self) -> tuple[NodeId, ...]:
        """All leaf ids in sorted order."""
        return tuple(sorted(self.leaf_values))

    def edges(self) -> tuple[Edge, ...]:
        """All (child, parent) edges, sorted by child id."""
        return tuple(sorted(self.parent.items()))

    def postorder(self) -> tuple[NodeId, ...]:
        """Nodes listed children-first, root last."""
        out: list[NodeId] = []
        stack: list[tuple[NodeId, bool]] = [(self.root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                out.append(node)
                continue
            stack.append((node, True))
            for child in reversed(self.children[node]):
                stack.append((child, False))
        return tuple(out)

    def ancestry(self, node: NodeId) -> tuple[NodeId, ...]:
        """The chain node, parent, ..., root."""
        chain = [node]
        while chain[-1] != self.root:
            chain.append(self.parent[chain[-1]])
        return tuple(chain)


@dataclass(frozen=True)
class Outcome:
    """Result of a flow computation under one share assignment.

    ``winning_path`` runs leaf to root.  Payoffs are 0 off the winning
    path; on it, a non-root node keeps a (1 - x) fraction of its flow and
    the root keeps everything that reaches it.
    """

    winning_leaf: NodeId
    winning_path: tuple[NodeId, ...]
    flows: Mapping[NodeId, float]
    payoffs: Mapping[NodeId, float]


def prune(tree: TreeInstance) -> TreeInstance:
    """Drop zero-value buyers, then any intermediaries left childless.

    Raises EmptyAfterPrune when no buyer survives.  Idempotent: pruning a
    pruned tree returns an equal instance.
    """
    keep: set[NodeId] = set()
    for node in tree.postorder():
        kids = tree.children[node]
        if kids:
            if any(k in keep for k in kids):
                keep.add(node)
        elif tree.leaf_values[node] > 0.0:
            keep.add(node)
    if tree.root not in keep:
        raise EmptyAfterPrune("every buyer has value zero")
    return TreeInstance(
        root=tree.root,
        parent={n: p for n, p in tree.parent.items() if n in keep},
        leaf_values={l: v for l, v in tree.leaf_values.items() if l in keep},
    )


def compute_flow(tree: TreeInstance, shares: ShareAssignment) -> Outcome:
    """Run the bottom-up flow recursion and extract the winning path.

    Each node forwards the best offer x * w among its children (ties to
    the lowest child id, exact float comparison).  Raises MissingShare if
    any edge lacks a share.
    """
    flows: dict[NodeId, float] = {}
    winner_child: dict[NodeId, NodeId] = {}
    for node in tree.postorder():
        kids = tree.children[node]
        if not kids:
            flows[node] = tree.leaf_values[node]
            continue
        best_child: NodeId | None = None
        best_offer = 0.0
        for child in kids:
            try:
                x = shares[(child, node)]
            except KeyError:
                raise MissingShare(f"no share for edge ({child!r}, {node!r})") from None
            offer = x * flows[child]
            if (
                best_child is None
                or offer > best_offer
                or (offer == best_offer and child < best_child)
            ):
                best_child = child
                best_offer = offer
        flows[node] = best_offer
        winner_child[node] = best_child
    path_down = [tree.root]
    while path_down[-1] in winner_child:
        path_down.append(winner_child[path_down[-1]])
    winning_path = tuple(reversed(path_down))
    payoffs = {node: 0.0 for node in flows}
    for node in winning_path[:-1]:
        payoffs[node] = (1.0 - shares[(node, tree.parent[node])]) * flows[node]
    payoffs[tree.root] = flows[tree.root]
    return Outcome(
        winning_leaf=winning_path[0],
        winning_path=winning_path,
        flows=flows,
        payoffs=payoffs,
    )


def residuals_tree(tree: TreeInstance, shares: ShareAssignment) -> dict[Edge, float]:
    """Per-edge imbalance of the egalitarian bargaining condition.

    For edge (t, s) the residual is

        |(1 - x_ts) * w_t - (1 - x_ss') * (max(r, x_ts * w_t) - r)|

    where r is the best offer s receives from its other children (0 when
    there are none) and x_ss' is the share on s's upward edge (0 when s is
    the root).  An assignment is an eps-fixed point iff every residual is
    at most eps.
    """
    flows = compute_flow(tree, shares).flows
    # Best and second-best child offers per parent; the second-best stands
    # in for "best among the others" at the argmax child.
    best: dict[NodeId, float] = {}
    best_child: dict[NodeId, NodeId] = {}
    second: dict[NodeId, float] = {}
    for node, kids in tree.children.items():
        if not kids:
            continue
        b: float | None = None
        bc: NodeId | None = None
        sec = 0.0
        for child in kids:
            offer = shares[(child, node)] * flows[child]
            if b is None or offer > b or (offer == b and child < bc):
                if b is not None and b > sec:
                    sec = b
                b, bc = offer, child
            elif offer > sec:
                sec = offer
        best[node], best_child[node], second[node] = b, bc, sec
    residuals: dict[Edge, float] = {}
    for t, s in tree.parent.items():
        x_ts = shares[(t, s)]
        offer = x_ts * flows[t]
        rival = second[s] if best_child[s] == t else best[s]
        upstream = 1.0 if s == tree.root else 1.0 - shares[(s, tree.parent[s])]
        lhs = (1.0 - x_ts) * flows[t]
        rhs = upstream * (max(rival, offer) - rival)
        residuals[(t, s)] = abs(lhs - rhs)
    return residuals
