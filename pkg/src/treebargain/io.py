"""Text formats: instance files, result documents, configs, and CSV.

Instance files are line-oriented so hand-written fixtures stay diffable:

    # comment (also allowed at end of line)
    name my-instance          optional metadata, kept verbatim
    seed 7                    optional metadata, integer
    root R
    node I R                  internal node I with parent R
    leaf L2 I 10              buyer L2 under I with value 10

Declarations may appear in any order; ids must be unique and exactly one
root is required.  A ``node`` that never receives children is a parse
error (childless nodes must be ``leaf`` lines).

Result documents and dynamics configs are JSON with sorted keys; the
dynamics aggregate is CSV with the fixed header
``accuracy,mean_rounds,tries,converged_fraction``.  All numeric output
uses repr, so a given seed always produces identical bytes.
"""

from __future__ import annotations

import json
from typing import Any, Mapping

from .dynamics import DynamicsConfig, ExperimentResult
from .errors import InstanceParseError
from .reduction import PathInstance, ReductionMapping
from .solver import FixedPointSolution
from .tree import Outcome, ShareAssignment, TreeInstance

_CONFIG_KEYS = {
    "depth",
    "tries",
    "seed",
    "accuracies",
    "init",
    "tolerance",
    "max_rounds",
}


def parse_instance(text: str) -> tuple[TreeInstance, dict[str, Any]]:
    """Parse an instance file into a TreeInstance plus its metadata."""
    root: str | None = None
    parent: dict[str, str] = {}
    leaf_values: dict[str, float] = {}
    declared: set[str] = set()
    meta: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        kind = tokens[0]

        def fail(message: str) -> InstanceParseError:
            return InstanceParseError(f"line {lineno}: {message}")

        if kind == "name":
            if len(tokens) < 2:
                raise fail("name needs a value")
            meta["name"] = line.split(None, 1)[1]
        elif kind == "seed":
            if len(tokens) != 2:
                raise fail("seed needs one integer")
            try:
                meta["seed"] = int(tokens[1])
            except ValueError:
                raise fail(f"bad seed {tokens[1]!r}") from None
        elif kind == "root":
            if len(tokens) != 2:
                raise fail("root needs one id")
            if root is not None:
                raise fail("second root declaration")
            root = tokens[1]
            if root in declared:
                raise fail(f"duplicate id {root!r}")
            declared.add(root)
        elif kind == "node":
            if len(tokens) != 3:
                raise fail("node needs an id and a parent")
            node, par = tokens[1], tokens[2]
            if node in declared:
                raise fail(f"duplicate id {node!r}")
            declared.add(node)
            parent[node] = par
        elif kind == "leaf":
            if len(tokens) != 4:
                raise fail("leaf needs an id, a parent, and a value")
            leaf, par, value = tokens[1], tokens[2], tokens[3]
            if leaf in declared:
                raise fail(f"duplicate id {leaf!r}")
            declared.add(leaf)
            parent[leaf] = par
            try:
                leaf_values[leaf] = float(value)
            except ValueError:
                raise fail(f"bad value {value!r}") from None
        else:
            raise fail(f"unknown directive {kind!r}")
    if root is None:
        raise InstanceParseError("no root declared")
    try:
        tree = TreeInstance(root=root, parent=parent, leaf_values=leaf_values)
    except ValueError as exc:
        raise InstanceParseError(str(exc)) from None
    return tree, meta


def format_instance(
    tree: TreeInstance, name: str | None = None, seed: int | None = None
) -> str:
    """Render a TreeInstance in the instance file format (BFS order)."""
    lines = []
    if name is not None:
        lines.append(f"name {name}")
    if seed is not None:
        lines.append(f"seed {seed}")
    lines.append(f"root {tree.root}")
    queue = [tree.root]
    for node in queue:
        for child in tree.children[node]:
            queue.append(child)
            if tree.children[child]:
                lines.append(f"node {child} {node}")
            else:
                lines.append(f"leaf {child} {node} {tree.leaf_values[child]!r}")
    return "\n".join(lines) + "\n"


def format_result(
    tree: TreeInstance,
    path: PathInstance,
    mapping: ReductionMapping,
    solution: FixedPointSolution,
    shares: ShareAssignment,
    outcome: Outcome,
    max_tree_residual: float,
) -> str:
    """Render the solve pipeline's result as a sorted-key JSON document."""
    doc = {
        "d": list(path.d),
        "n": path.n,
        "path_nodes": list(mapping.path_nodes),
        "gamma": solution.diagnostics.gamma,
        "iterations": solution.iterations,
        "max_path_residual": solution.max_residual,
        "max_tree_residual": max_tree_residual,
        "winning_leaf": outcome.winning_leaf,
        "winning_path": list(outcome.winning_path),
        "shares": {f"{child}->{par}": x for (child, par), x in shares.items()},
        "payoffs": dict(outcome.payoffs),
        "flows": dict(outcome.flows),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def parse_dynamics_config(text: str) -> DynamicsConfig:
    """Parse a JSON dynamics config document into a DynamicsConfig."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceParseError(f"bad JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise InstanceParseError("config must be a JSON object")
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise InstanceParseError(f"unknown config keys: {sorted(unknown)}")
    for key in ("depth", "tries", "seed"):
        if key not in doc:
            raise InstanceParseError(f"config needs {key!r}")
    kwargs: dict[str, Any] = {
        "depth": doc["depth"],
        "tries": doc["tries"],
        "seed": doc["seed"],
    }
    if "accuracies" in doc:
        kwargs["target_accuracies"] = tuple(doc["accuracies"])
    if "init" in doc:
        kwargs["init_share"] = doc["init"]
    if "tolerance" in doc:
        kwargs["per_edge_tolerance"] = doc["tolerance"]
    if "max_rounds" in doc:
        kwargs["max_rounds"] = doc["max_rounds"]
    try:
        return DynamicsConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise InstanceParseError(str(exc)) from None


def format_dynamics_csv(result: ExperimentResult) -> str:
    """Aggregate table as CSV: accuracy,mean_rounds,tries,converged_fraction."""
    lines = ["accuracy,mean_rounds,tries,converged_fraction"]
    for accuracy, mean_rounds, tries, fraction in result.table:
        lines.append(f"{accuracy!r},{mean_rounds!r},{tries},{fraction!r}")
    return "\n".join(lines) + "\n"


def format_dynamics_trace(result: ExperimentResult) -> str:
    """Optional per-try dump as CSV: try,round,distance."""
    lines = ["try,round,distance"]
    for k, trace in enumerate(result.traces):
        for round_number, distance in enumerate(trace.per_round_distance, start=1):
            lines.append(f"{k},{round_number},{distance!r}")
    return "\n".join(lines) + "\n"
