"""Asynchronous per-edge renegotiation dynamics on full trees.

Each round draws a fresh uniform permutation of all edges and renegotiates
them one at a time: the edge's share is re-solved from the single-edge
egalitarian balance while every other share stays at its current value,
and the update is visible to the renegotiations that follow it within the
round (Gauss-Seidel style).  Convergence is measured per round as the
max-norm distance between the current shares and the reference fixed
point obtained by reduce -> solve -> lift.

Everything is deterministic given the seed: try k draws from the
dedicated stream default_rng([seed, k]) (PCG64, Fisher-Yates
permutations), tries are independent, and results are aggregated by try
index, so running tries across threads cannot change any output.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ._backend import kernels
from .reduction import lift_to_tree, reduce_to_path
from .solver import solve_fixed_point
from .tree import Edge, NodeId, ShareAssignment, TreeInstance, compute_flow

_REFERENCE_EPS = 1e-15


@dataclass(frozen=True)
class DynamicsConfig:
    """Experiment setup: topology, bids, schedule, and targets.

    Exactly one of ``depth`` (balanced binary tree) or ``tree`` (explicit
    topology) must be given.  Bids are redrawn per try from the lognormal
    exp(1 + standard normal) unless ``fixed_bids`` pins them (in array
    leaf order, strictly positive).  ``target_accuracies`` are sorted
    loosest-first internally; a try stops once it reaches the tightest.
    """

    depth: int | None = None
    tree: TreeInstance | None = None
    fixed_bids: tuple[float, ...] | None = None
    init_share: float = 0.99
    per_edge_tolerance: float = 1e-15
    max_rounds: int = 10000
    target_accuracies: tuple[float, ...] = (1e-2, 1e-4, 1e-6, 1e-8, 1e-10)
    tries: int = 100
    seed: int = 0

    def __post_init__(self) -> None:
        if (self.depth is None) == (self.tree is None):
            raise ValueError("give exactly one of depth or tree")
        if self.depth is not None and self.depth < 1:
            raise ValueError("depth must be at least 1")
        if not 0.0 < self.init_share <= 1.0:
            raise ValueError("init_share must lie in (0, 1]")
        if not self.per_edge_tolerance > 0.0:
            raise ValueError("per_edge_tolerance must be positive")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be at least 1")
        if self.tries < 1:
            raise ValueError("tries must be at least 1")
        accs = tuple(sorted((float(a) for a in self.target_accuracies), reverse=True))
        if not accs or accs[-1] <= 0.0:
            raise ValueError("target_accuracies must be positive and nonempty")
        object.__setattr__(self, "target_accuracies", accs)
        if self.fixed_bids is not None:
            bids = tuple(float(b) for b in self.fixed_bids)
            if any(b <= 0.0 for b in bids):
                raise ValueError("fixed_bids must be strictly positive")
            object.__setattr__(self, "fixed_bids", bids)


@dataclass(frozen=True)
class DynamicsTrace:
    """One try: distance after each round and when targets were met.

    ``rounds_to_accuracy`` maps each target to the first round whose
    distance reached it (targets never reached are absent); tighter
    targets can only take more rounds.
    """

    per_round_distance: tuple[float, ...]
    rounds_to_accuracy: Mapping[float, int]
    converged: bool


@dataclass(frozen=True)
class ExperimentResult:
    """All traces plus the aggregate accuracy table.

    ``table`` holds one row per target accuracy, loosest first:
    (accuracy, mean rounds over tries that reached it, tries, fraction of
    tries that reached it).
    """

    config: DynamicsConfig
    traces: tuple[DynamicsTrace, ...]
    table: tuple[tuple[float, float, int, float], ...]
    all_converged: bool


@dataclass(frozen=True)
class _ArrayTree:
    """Index-space view of a TreeInstance for the kernels.

    Nodes are numbered by BFS from the root (so the root is 0 and every
    child index exceeds its parent's); CSR children preserve the
    instance's child order, and share slot i belongs to the edge from
    node i up to its parent.
    """

    ids: tuple[NodeId, ...]
    index: Mapping[NodeId, int]
    offsets: np.ndarray
    children: np.ndarray
    parent: np.ndarray
    leaf_indices: np.ndarray


def _array_tree(tree: TreeInstance) -> _ArrayTree:
    ids = [tree.root]
    for node in ids:
        ids.extend(tree.children[node])
    index = {node: i for i, node in enumerate(ids)}
    count = len(ids)
    parent = np.full(count, -1, dtype=np.int64)
    offsets = np.zeros(count + 1, dtype=np.int64)
    children = np.zeros(count - 1, dtype=np.int64)
    pos = 0
    for i, node in enumerate(ids):
        offsets[i] = pos
        for child in tree.children[node]:
            children[pos] = index[child]
            parent[index[child]] = i
            pos += 1
    offsets[count] = pos
    leaf_indices = np.asarray(
        [i for i, node in enumerate(ids) if not tree.children[node]], dtype=np.int64
    )
    return _ArrayTree(
        ids=tuple(ids),
        index=index,
        offsets=offsets,
        children=children,
        parent=parent,
        leaf_indices=leaf_indices,
    )


def balanced_binary_tree(
    depth: int, leaf_values: Sequence[float] | None = None
) -> TreeInstance:
    """Balanced binary tree of the given depth with 2**depth leaves.

    Nodes are heap-numbered n0 (root), n1, n2, ...; ``leaf_values`` fills
    the leaves in that order and defaults to all ones.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    count = 2 ** (depth + 1) - 1
    first_leaf = 2**depth - 1
    if leaf_values is None:
        leaf_values = [1.0] * (count - first_leaf)
    if len(leaf_values) != count - first_leaf:
        raise ValueError(f"expected {count - first_leaf} leaf values")
    parent = {f"n{i}": f"n{(i - 1) // 2}" for i in range(1, count)}
    values = {
        f"n{first_leaf + j}": float(v) for j, v in enumerate(leaf_values)
    }
    return TreeInstance(root="n0", parent=parent, leaf_values=values)


def renegotiate_edge(
    tree: TreeInstance,
    shares: ShareAssignment,
    edge: Edge,
    tolerance: float = 1e-15,
) -> float:
    """Re-solve one edge's share with every other share frozen.

    Returns the unique balance solution in (0, 1] (1 by convention when no
    value reaches the child), found by bisection to ``tolerance``.
    """
    t, s = edge
    if tree.parent.get(t) != s:
        raise ValueError(f"({t!r}, {s!r}) is not an edge of the tree")
    flows = compute_flow(tree, shares).flows
    rival = 0.0
    for sibling in tree.children[s]:
        if sibling != t:
            offer = shares[(sibling, s)] * flows[sibling]
            rival = max(rival, offer)
    upstream = 1.0 if s == tree.root else 1.0 - shares[(s, tree.parent[s])]
    return float(kernels.renegotiate(flows[t], rival, upstream, float(tolerance)))


def run_round(
    tree: TreeInstance,
    shares: ShareAssignment,
    rng: np.random.Generator,
    tolerance: float = 1e-15,
) -> dict[Edge, float]:
    """Renegotiate every edge once, in a fresh random order.

    Returns the updated share assignment; ``shares`` is not modified.
    Updates within the round see each other.
    """
    at = _array_tree(tree)
    count = len(at.ids)
    x = np.zeros(count)
    values = np.zeros(count)
    for i, node in enumerate(at.ids):
        if i > 0:
            x[i] = shares[(node, tree.parent[node])]
        if not tree.children[node]:
            values[i] = tree.leaf_values[node]
    w = np.zeros(count)
    kernels.flows_tree(at.offsets, at.children, values, x, w)
    edge_children = np.arange(1, count, dtype=np.int64)
    order = edge_children[rng.permutation(count - 1)]
    kernels.run_round_tree(
        at.offsets, at.children, at.parent, x, w, order, float(tolerance)
    )
    return {
        (node, tree.parent[node]): float(x[i])
        for i, node in enumerate(at.ids)
        if i > 0
    }


def _run_try(
    at: _ArrayTree,
    topology: TreeInstance,
    config: DynamicsConfig,
    try_index: int,
) -> DynamicsTrace:
    rng = np.random.default_rng([config.seed, try_index])
    count = len(at.ids)
    if config.fixed_bids is not None:
        bids = np.asarray(config.fixed_bids, dtype=np.float64)
    else:
        bids = np.exp(1.0 + rng.standard_normal(len(at.leaf_indices)))
    leaf_values = {
        at.ids[i]: float(bids[j]) for j, i in enumerate(at.leaf_indices)
    }
    instance = TreeInstance(
        root=topology.root, parent=topology.parent, leaf_values=leaf_values
    )
    path, mapping = reduce_to_path(instance)
    reference = solve_fixed_point(path, eps_search=_REFERENCE_EPS)
    lifted = lift_to_tree(reference.x, mapping, instance)
    x_ref = np.zeros(count)
    for (child, _), share in lifted.items():
        x_ref[at.index[child]] = share
    x_ref_edges = x_ref[1:]

    values = np.zeros(count)
    values[at.leaf_indices] = bids
    x = np.full(count, config.init_share)
    x[0] = 0.0
    w = np.zeros(count)
    kernels.flows_tree(at.offsets, at.children, values, x, w)

    edge_children = np.arange(1, count, dtype=np.int64)
    tightest = config.target_accuracies[-1]
    distances: list[float] = []
    converged = False
    for _ in range(config.max_rounds):
        order = edge_children[rng.permutation(count - 1)]
        kernels.run_round_tree(
            at.offsets,
            at.children,
            at.parent,
            x,
            w,
            order,
            config.per_edge_tolerance,
        )
        distance = float(np.max(np.abs(x[1:] - x_ref_edges)))
        distances.append(distance)
        if distance <= tightest:
            converged = True
            break
    rounds_to: dict[float, int] = {}
    for accuracy in config.target_accuracies:
        for round_number, distance in enumerate(distances, start=1):
            if distance <= accuracy:
                rounds_to[accuracy] = round_number
                break
    return DynamicsTrace(
        per_round_distance=tuple(distances),
        rounds_to_accuracy=rounds_to,
        converged=converged,
    )


def run_experiment(
    config: DynamicsConfig, threads: int | None = None
) -> ExperimentResult:
    """Run all tries and build the accuracy-versus-rounds table.

    ``threads`` defaults to the TREEBARGAIN_THREADS environment variable
    (1 when unset).  Output is independent of the thread count.
    """
    if threads is None:
        threads = int(os.environ.get("TREEBARGAIN_THREADS", "1"))
    topology = (
        config.tree if config.tree is not None else balanced_binary_tree(config.depth)
    )
    at = _array_tree(topology)
    if config.fixed_bids is not None and len(config.fixed_bids) != len(
        at.leaf_indices
    ):
        raise ValueError(
            f"expected {len(at.leaf_indices)} fixed bids, got {len(config.fixed_bids)}"
        )
    indices = range(config.tries)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            traces = tuple(
                pool.map(lambda k: _run_try(at, topology, config, k), indices)
            )
    else:
        traces = tuple(_run_try(at, topology, config, k) for k in indices)
    table = []
    for accuracy in config.target_accuracies:
        reached = [
            t.rounds_to_accuracy[accuracy]
            for t in traces
            if accuracy in t.rounds_to_accuracy
        ]
        mean_rounds = float(np.mean(reached)) if reached else float("nan")
        table.append(
            (accuracy, mean_rounds, config.tries, len(reached) / config.tries)
        )
    return ExperimentResult(
        config=config,
        traces=traces,
        table=tuple(table),
        all_converged=all(t.converged for t in traces),
    )
