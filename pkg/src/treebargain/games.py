"""Cooperative-game layer: coalition values, core checks, probes, comparators.

The coalition value of a node set is the best buyer value among complete
root-to-leaf chains contained in it (0 when it contains none, in
particular whenever it lacks the root).  Because every coalition's worth
comes from its best contained chain, core membership reduces to the
root-to-leaf path constraints; a brute-force enumeration over all
coalitions is kept as the cross-checking mode.

Also here: a strict-monotonicity probe for disagreement-value increases,
a Shapley value (exact or sampled), a grid-refinement nucleolus for
3-payoff-node path games, and the Nash-bargaining variant whose winner
can fail to be the max-value leaf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    InvalidPerturbation,
    MonotonicityViolation,
    TooLarge,
    Unsupported,
)
from .reduction import PathInstance
from .solver import solve_fixed_point
from .tree import Edge, NodeId, Outcome, TreeInstance, compute_flow

_BRUTE_NODE_CAP = 20
_EXACT_SHAPLEY_CAP = 10
_SAMPLED_SHAPLEY_CAP = 20


@dataclass(frozen=True)
class CoalitionGame:
    """Characteristic-function view of a tree instance.

    The value of a coalition S is max over leaves l in S with their whole
    ancestor chain inside S of v_l, else 0.  Monotone by construction;
    the grand coalition is worth the best buyer value.
    """

    tree: TreeInstance
    _chains: Mapping[NodeId, frozenset[NodeId]] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        chains = {
            leaf: frozenset(self.tree.ancestry(leaf)) for leaf in self.tree.leaves
        }
        object.__setattr__(self, "_chains", chains)


def coalition_value(game: CoalitionGame, coalition: Iterable[NodeId]) -> float:
    """Best complete root-to-leaf chain value inside the coalition."""
    members = frozenset(coalition)
    best = 0.0
    for leaf, chain in game._chains.items():
        if leaf in members and chain <= members:
            best = max(best, game.tree.leaf_values[leaf])
    return best


@dataclass(frozen=True)
class CoreVerdict:
    """Core-membership verdict with a violating coalition as witness.

    When ``in_core`` is False, ``coalition`` names a blocking coalition
    (or the grand coalition when the payoffs are not efficient), together
    with its value and its payoff total.
    """

    in_core: bool
    mode: str
    coalition: tuple[NodeId, ...] | None = None
    coalition_value: float | None = None
    coalition_payoff: float | None = None


def check_core(
    game: CoalitionGame,
    payoffs: Mapping[NodeId, float],
    mode: str = "paths",
    slack: float = 1e-9,
) -> CoreVerdict:
    """Decide whether a payoff vector lies in the core.

    Requires efficiency (total payoff equals the grand-coalition value,
    within ``slack``) and no coalition whose value beats its payoff total
    by more than ``slack``.  Mode "paths" checks only root-to-leaf chains,
    which bind every other coalition; mode "brute" enumerates all
    coalitions (node count capped) and must agree with "paths".
    """
    if mode not in ("paths", "brute"):
        raise ValueError(f"unknown core-check mode {mode!r}")
    tree = game.tree
    nodes = tree.nodes
    if mode == "brute" and len(nodes) > _BRUTE_NODE_CAP:
        raise TooLarge(
            f"brute-force core check capped at {_BRUTE_NODE_CAP} nodes, "
            f"got {len(nodes)}"
        )
    total = math.fsum(payoffs[node] for node in nodes)
    grand = coalition_value(game, nodes)
    if abs(total - grand) > slack:
        return CoreVerdict(
            in_core=False,
            mode=mode,
            coalition=nodes,
            coalition_value=grand,
            coalition_payoff=total,
        )
    if mode == "paths":
        for leaf in tree.leaves:
            chain = tree.ancestry(leaf)
            got = math.fsum(payoffs[node] for node in chain)
            want = tree.leaf_values[leaf]
            if got < want - slack:
                return CoreVerdict(
                    in_core=False,
                    mode=mode,
                    coalition=chain,
                    coalition_value=want,
                    coalition_payoff=got,
                )
        return CoreVerdict(in_core=True, mode=mode)
    index = {node: i for i, node in enumerate(nodes)}
    u = [payoffs[node] for node in nodes]
    chain_masks = []
    for leaf in tree.leaves:
        mask = 0
        for node in tree.ancestry(leaf):
            mask |= 1 << index[node]
        chain_masks.append((mask, tree.leaf_values[leaf]))
    worst_deficit = -math.inf
    worst_mask = None
    worst = (0.0, 0.0)
    for mask in range(1, 1 << len(nodes)):
        value = 0.0
        for cmask, v in chain_masks:
            if cmask & mask == cmask and v > value:
                value = v
        if value == 0.0:
            continue
        paid = 0.0
        rest = mask
        while rest:
            low = rest & -rest
            paid += u[low.bit_length() - 1]
            rest ^= low
        deficit = value - paid
        if deficit > worst_deficit:
            worst_deficit = deficit
            worst_mask = mask
            worst = (value, paid)
    if worst_mask is not None and worst_deficit > slack:
        members = tuple(
            node for node in nodes if (1 << index[node]) & worst_mask
        )
        return CoreVerdict(
            in_core=False,
            mode=mode,
            coalition=members,
            coalition_value=worst[0],
            coalition_payoff=worst[1],
        )
    return CoreVerdict(in_core=True, mode=mode)


def monotonicity_probe(
    path: PathInstance, i: int, delta: float, eps_search: float = 1e-13
) -> tuple[float, float]:
    """Payoff of path node i before and after raising d_i by delta.

    For delta > 0 the payoff must strictly increase; a failure raises
    MonotonicityViolation.  delta = 0 is allowed and changes nothing.
    """
    if not 1 <= i <= path.n:
        raise ValueError(f"index {i} outside 1..{path.n}")
    if delta < 0.0:
        raise InvalidPerturbation("delta must be nonnegative")
    if path.d[i] + delta >= path.d[0]:
        raise InvalidPerturbation(
            f"d[{i}] + delta = {path.d[i] + delta!r} reaches d0 = {path.d[0]!r}"
        )
    before = float(solve_fixed_point(path, eps_search).payoffs[i])
    bumped = list(path.d)
    bumped[i] += delta
    after = float(solve_fixed_point(PathInstance(tuple(bumped)), eps_search).payoffs[i])
    if delta > 0.0 and not after > before:
        raise MonotonicityViolation(
            f"payoff of node {i} went {before!r} -> {after!r} "
            f"after raising d[{i}] by {delta!r}"
        )
    return before, after


@dataclass(frozen=True)
class ShapleyResult:
    """Shapley payoffs, with per-node standard errors in sampled mode."""

    values: Mapping[NodeId, float]
    mode: str
    samples: int | None = None
    stderr: Mapping[NodeId, float] | None = None


def shapley(
    game: CoalitionGame, samples: int | None = None, seed: int = 0
) -> ShapleyResult:
    """Permutation-average marginal contribution to the coalition value.

    Exact mode (``samples`` is None) evaluates the average through the
    equivalent subset-weighted sum and is capped at 10 nodes; sampled
    mode draws uniform random permutations (capped at 20 nodes) and
    reports the standard error of each node's mean marginal.
    """
    nodes = game.tree.nodes
    count = len(nodes)
    index = {node: i for i, node in enumerate(nodes)}
    chain_masks = [
        (
            sum(1 << index[node] for node in game.tree.ancestry(leaf)),
            game.tree.leaf_values[leaf],
        )
        for leaf in game.tree.leaves
    ]

    if samples is None:
        if count > _EXACT_SHAPLEY_CAP:
            raise TooLarge(
                f"exact Shapley capped at {_EXACT_SHAPLEY_CAP} nodes, got {count}"
            )
        values = np.zeros(1 << count)
        for mask in range(1, 1 << count):
            v = 0.0
            for cmask, leaf_v in chain_masks:
                if cmask & mask == cmask and leaf_v > v:
                    v = leaf_v
            values[mask] = v
        fact = [math.factorial(k) for k in range(count + 1)]
        weight = [
            fact[k] * fact[count - 1 - k] / fact[count] for k in range(count)
        ]
        phi = {}
        for node in nodes:
            bit = 1 << index[node]
            acc = 0.0
            for mask in range(1 << count):
                if mask & bit:
                    continue
                acc += weight[mask.bit_count()] * (values[mask | bit] - values[mask])
            phi[node] = float(acc)
        return ShapleyResult(values=phi, mode="exact")

    if count > _SAMPLED_SHAPLEY_CAP:
        raise TooLarge(
            f"sampled Shapley capped at {_SAMPLED_SHAPLEY_CAP} nodes, got {count}"
        )
    if samples < 2:
        raise ValueError("need at least 2 samples")
    rng = np.random.default_rng(seed)
    sums = np.zeros(count)
    sq_sums = np.zeros(count)
    for _ in range(samples):
        perm = rng.permutation(count)
        mask = 0
        prev = 0.0
        for pos in perm:
            mask |= 1 << int(pos)
            v = 0.0
            for cmask, leaf_v in chain_masks:
                if cmask & mask == cmask and leaf_v > v:
                    v = leaf_v
            marginal = v - prev
            prev = v
            sums[pos] += marginal
            sq_sums[pos] += marginal * marginal
    mean = sums / samples
    var = np.maximum(sq_sums / samples - mean**2, 0.0) * samples / (samples - 1)
    stderr = np.sqrt(var / samples)
    return ShapleyResult(
        values={node: float(mean[index[node]]) for node in nodes},
        mode="sampled",
        samples=samples,
        stderr={node: float(stderr[index[node]]) for node in nodes},
    )


def _nucleolus3_excesses(
    x0: float, x1: float, x2: float, d0: float, d1: float, d2: float
) -> tuple[float, ...]:
    """Sorted (descending) excesses of the six proper coalitions.

    Players are the path nodes 0 (collapsed buyer), 1 (intermediary), and
    2 (root).  Coalitions without the root are worthless; the root alone
    or with the buyer falls back on its off-path alternative d2, and root
    plus intermediary reach the better of the two alternatives.
    """
    e = (
        -x0,
        -x1,
        d2 - x2,
        -(x0 + x1),
        d2 - (x0 + x2),
        max(d1, d2) - (x1 + x2),
    )
    return tuple(sorted(e, reverse=True))


def nucleolus3(path: PathInstance) -> np.ndarray:
    """Nucleolus of the 3-payoff-node game behind a 2-edge path instance.

    Lexicographically minimizes the sorted coalition excesses over the
    efficient simplex by iterated grid refinement (step halved each pass),
    accurate to about 1e-4 * d0 in each coordinate.  Only n = 2 is
    supported.
    """
    if path.n != 2:
        raise Unsupported(f"nucleolus3 needs exactly 2 path edges, got {path.n}")
    d0, d1, d2 = path.d
    best_xy = (d0 / 3.0, d0 / 3.0)
    best_key = None
    step = d0 / 40.0
    # Pass 0 scans the whole simplex; later passes shrink around the best.
    spans = [(0.0, d0, 0.0, d0)]
    for _ in range(26):
        lo0, hi0, lo1, hi1 = spans[-1]
        k0 = 0
        while True:
            x0 = lo0 + k0 * step
            if x0 > hi0 or x0 > d0:
                break
            k1 = 0
            while True:
                x1 = lo1 + k1 * step
                if x1 > hi1 or x0 + x1 > d0:
                    break
                key = _nucleolus3_excesses(x0, x1, d0 - x0 - x1, d0, d1, d2)
                if best_key is None or key < best_key:
                    best_key = key
                    best_xy = (x0, x1)
                k1 += 1
            k0 += 1
        step *= 0.5
        spans.append(
            (
                max(best_xy[0] - 4.0 * step, 0.0),
                best_xy[0] + 4.0 * step,
                max(best_xy[1] - 4.0 * step, 0.0),
                best_xy[1] + 4.0 * step,
            )
        )
    x0, x1 = best_xy
    return np.array([x0, x1, d0 - x0 - x1])


def nash_variant_shares(tree: TreeInstance) -> dict[Edge, float]:
    """Shares from the Nash-bargaining variant, one bottom-up pass.

    At each parent the child carrying the highest variant value wins and
    keeps a share 1/2 + rival / (2 * value); the other children pass
    everything up (share 1).  Ties break toward the lowest child id, which
    sends the winner's share to 1 as well.
    """
    variant_value: dict[NodeId, float] = {}
    shares: dict[Edge, float] = {}
    for node in tree.postorder():
        kids = tree.children[node]
        if not kids:
            variant_value[node] = tree.leaf_values[node]
            continue
        winner: NodeId | None = None
        best = 0.0
        for child in kids:
            v = variant_value[child]
            if winner is None or v > best or (v == best and child < winner):
                winner, best = child, v
        rival = 0.0
        for child in kids:
            if child != winner and variant_value[child] > rival:
                rival = variant_value[child]
        for child in kids:
            if child == winner and best > 0.0:
                shares[(child, node)] = 0.5 + rival / (2.0 * best)
            else:
                shares[(child, node)] = 1.0
        variant_value[node] = shares[(winner, node)] * best
    return shares


def nash_variant_solve(tree: TreeInstance) -> Outcome:
    """Flow outcome of the Nash-bargaining variant's share assignment.

    Unlike the egalitarian fixed point, the resulting winner need not be
    a max-value leaf.
    """
    return compute_flow(tree, nash_variant_shares(tree))
