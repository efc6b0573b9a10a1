"""Command-line surface: solve, reduce, dynamics, analyze, generate.

Exit codes are stable API: 0 success, 2 parse error, 3 no buyers left
after pruning, 4 a dynamics try failed to converge, 5 a checked property
failed.  All error messages go to standard error; machine-readable output
(JSON result documents, CSV tables, instance files) goes to the path
given with --out, or standard output.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io
from .dynamics import balanced_binary_tree, run_experiment
from .errors import EmptyAfterPrune, InstanceParseError, MonotonicityViolation
from .games import (
    CoalitionGame,
    check_core,
    monotonicity_probe,
    nash_variant_solve,
    shapley,
)
from .reduction import lift_to_tree, reduce_to_path
from .solver import solve_fixed_point
from .tree import TreeInstance, compute_flow, prune, residuals_tree

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_EMPTY = 3
EXIT_NONCONVERGENCE = 4
EXIT_PROPERTY = 5

_BRUTE_CORE_LIMIT = 16


def _fmt(value: float) -> str:
    """Integers without the trailing .0, everything else via repr."""
    return str(int(value)) if value == int(value) else repr(value)


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InstanceParseError(f"cannot read {path}: {exc}") from None


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load_pruned(path: str) -> TreeInstance:
    tree, _ = io.parse_instance(_read(path))
    return prune(tree)


def cmd_solve(args: argparse.Namespace) -> int:
    tree = _load_pruned(args.instance)
    path, mapping = reduce_to_path(tree)
    solution = solve_fixed_point(path, eps_search=args.eps)
    shares = lift_to_tree(solution.x, mapping, tree)
    outcome = compute_flow(tree, shares)
    residuals = residuals_tree(tree, shares)
    _write(
        args.out,
        io.format_result(
            tree,
            path,
            mapping,
            solution,
            shares,
            outcome,
            max_tree_residual=max(residuals.values()),
        ),
    )
    return EXIT_OK


def cmd_reduce(args: argparse.Namespace) -> int:
    tree = _load_pruned(args.instance)
    path, mapping = reduce_to_path(tree)
    out = [
        f"d = [{', '.join(_fmt(v) for v in path.d)}]",
        f"n = {path.n}",
        f"path = [{', '.join(mapping.path_nodes)}]",
        f"off_path = [{', '.join(f'{c}->{p}' for c, p in mapping.off_path_edges)}]",
    ]
    sys.stdout.write("\n".join(out) + "\n")
    return EXIT_OK


def cmd_dynamics(args: argparse.Namespace) -> int:
    config = io.parse_dynamics_config(_read(args.config))
    result = run_experiment(config)
    _write(args.out, io.format_dynamics_csv(result))
    if args.trace is not None:
        _write(args.trace, io.format_dynamics_trace(result))
    if not result.all_converged:
        failed = sum(1 for t in result.traces if not t.converged)
        print(
            f"{failed} of {config.tries} tries did not converge "
            f"within {config.max_rounds} rounds",
            file=sys.stderr,
        )
        return EXIT_NONCONVERGENCE
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    tree = _load_pruned(args.instance)
    run_all = not (args.core or args.shapley or args.nash or args.monotonicity)
    path, mapping = reduce_to_path(tree)
    solution = solve_fixed_point(path)
    shares = lift_to_tree(solution.x, mapping, tree)
    outcome = compute_flow(tree, shares)
    game = CoalitionGame(tree)
    failed = False

    if args.core or run_all:
        verdict = check_core(game, outcome.payoffs, mode="paths")
        if len(tree.nodes) <= _BRUTE_CORE_LIMIT:
            brute = check_core(game, outcome.payoffs, mode="brute")
            if brute.in_core != verdict.in_core:
                print("core: FAIL (path and brute modes disagree)")
                failed = True
        if verdict.in_core:
            print("core: PASS (fixed-point payoffs admit no blocking coalition)")
        else:
            print(
                f"core: FAIL (coalition {list(verdict.coalition)} gets "
                f"{_fmt(verdict.coalition_value)} but is paid "
                f"{_fmt(verdict.coalition_payoff)})"
            )
            failed = True

    if args.monotonicity or run_all:
        if path.n == 0:
            print("monotonicity: SKIP (no path edges to perturb)")
        else:
            try:
                for i in range(1, path.n + 1):
                    delta = (path.d[0] - path.d[i]) / 2.0
                    before, after = monotonicity_probe(path, i, delta)
                    print(
                        f"monotonicity: PASS (node {i}: payoff "
                        f"{before!r} -> {after!r} when d[{i}] rises by {delta!r})"
                    )
            except MonotonicityViolation as exc:
                print(f"monotonicity: FAIL ({exc})")
                failed = True

    if args.shapley or run_all:
        result = (
            shapley(game)
            if len(tree.nodes) <= 10
            else shapley(game, samples=20000, seed=0)
        )
        rendered = ", ".join(
            f"{node}: {_fmt(value)}" for node, value in sorted(result.values.items())
        )
        print(f"shapley ({result.mode}): {rendered}")
        verdict = check_core(game, result.values, mode="paths")
        if verdict.in_core:
            print("shapley core check: in core")
        else:
            print(
                f"shapley core check: violated by {list(verdict.coalition)} "
                f"(value {_fmt(verdict.coalition_value)}, "
                f"paid {_fmt(verdict.coalition_payoff)})"
            )

    if args.nash or run_all:
        nash = nash_variant_solve(tree)
        v_star = max(tree.leaf_values.values())
        efficient = tree.leaf_values[nash.winning_leaf] == v_star
        note = "max-value leaf" if efficient else "NOT a max-value leaf (inefficient)"
        print(
            f"nash variant: winner {nash.winning_leaf} "
            f"(value {_fmt(tree.leaf_values[nash.winning_leaf])}), {note}; "
            f"seller payoff {nash.payoffs[tree.root]!r}"
        )

    return EXIT_PROPERTY if failed else EXIT_OK


def cmd_generate(args: argparse.Namespace) -> int:
    rng = np.random.default_rng(args.seed)
    if args.kind == "balanced-binary":
        leaf_count = 2**args.depth
        bids = np.exp(1.0 + rng.standard_normal(leaf_count))
        tree = balanced_binary_tree(args.depth, leaf_values=bids.tolist())
        name = f"balanced-binary-depth{args.depth}"
    else:
        if args.nodes < 2:
            print("random trees need at least 2 nodes", file=sys.stderr)
            return EXIT_PARSE
        parent = {
            f"n{i}": f"n{int(rng.integers(i))}" for i in range(1, args.nodes)
        }
        has_children = set(parent.values())
        leaves = [f"n{i}" for i in range(1, args.nodes) if f"n{i}" not in has_children]
        bids = np.exp(1.0 + rng.standard_normal(len(leaves)))
        tree = TreeInstance(
            root="n0",
            parent=parent,
            leaf_values=dict(zip(leaves, bids.tolist())),
        )
        name = f"random-{args.nodes}"
    _write(args.out, io.format_instance(tree, name=name, seed=args.seed))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="treebargain",
        description=(
            "Egalitarian bargaining on rooted trade trees: reduce, solve, "
            "simulate renegotiation dynamics, and check game properties."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve an instance and write a JSON result")
    p.add_argument("instance")
    p.add_argument("--eps", type=float, default=1e-13, help="search tolerance")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("reduce", help="print the reduced path instance")
    p.add_argument("instance")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("dynamics", help="run the renegotiation experiment")
    p.add_argument("--config", required=True, help="JSON config path")
    p.add_argument("--out", default=None, help="CSV output path (default stdout)")
    p.add_argument("--trace", default=None, help="optional per-try trace CSV path")
    p.set_defaults(func=cmd_dynamics)

    p = sub.add_parser("analyze", help="run game-theoretic checks")
    p.add_argument("instance")
    p.add_argument("--core", action="store_true")
    p.add_argument("--shapley", action="store_true")
    p.add_argument("--nash", action="store_true")
    p.add_argument("--monotonicity", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("generate", help="emit a deterministic instance file")
    p.add_argument(
        "--kind", choices=("balanced-binary", "random"), default="balanced-binary"
    )
    p.add_argument("--depth", type=int, default=4, help="balanced-binary depth")
    p.add_argument("--nodes", type=int, default=12, help="random tree node count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.set_defaults(func=cmd_generate)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InstanceParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except EmptyAfterPrune as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY


if __name__ == "__main__":
    sys.exit(main())
