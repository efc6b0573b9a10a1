"""Egalitarian bargaining on rooted trade trees.

Reduce a tree instance to its equivalent path instance, compute the
unique fixed point of the per-edge bargaining balance, lift it back to
the tree, verify its game-theoretic properties (core membership, strict
payoff monotonicity, comparisons against Shapley, nucleolus, and a
Nash-bargaining variant), and simulate asynchronous decentralized
renegotiation dynamics that converge to the same fixed point.
"""

from ._backend import BACKEND
from .errors import (
    BoundViolation,
    DimensionMismatch,
    EmptyAfterPrune,
    InfeasiblePoint,
    InstanceParseError,
    InvalidInstance,
    InvalidPerturbation,
    MissingShare,
    MonotonicityViolation,
    TooLarge,
    TreeBargainError,
    Unsupported,
)
from .dynamics import (
    DynamicsConfig,
    DynamicsTrace,
    ExperimentResult,
    balanced_binary_tree,
    renegotiate_edge,
    run_experiment,
    run_round,
)
from .games import (
    CoalitionGame,
    CoreVerdict,
    ShapleyResult,
    check_core,
    coalition_value,
    monotonicity_probe,
    nash_variant_shares,
    nash_variant_solve,
    nucleolus3,
    shapley,
)
from .reduction import PathInstance, ReductionMapping, lift_to_tree, reduce_to_path
from .solver import (
    BoundsReport,
    FixedPointSolution,
    SolverDiagnostics,
    SweepResult,
    check_theoretical_bounds,
    downward_curve,
    residuals_path,
    solve_fixed_point,
    upward_sweep,
)
from .tree import (
    Outcome,
    ShareAssignment,
    TreeInstance,
    compute_flow,
    prune,
    residuals_tree,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoundViolation",
    "BoundsReport",
    "CoalitionGame",
    "CoreVerdict",
    "DimensionMismatch",
    "DynamicsConfig",
    "DynamicsTrace",
    "EmptyAfterPrune",
    "ExperimentResult",
    "FixedPointSolution",
    "InfeasiblePoint",
    "InstanceParseError",
    "InvalidInstance",
    "InvalidPerturbation",
    "MissingShare",
    "MonotonicityViolation",
    "Outcome",
    "PathInstance",
    "ReductionMapping",
    "ShapleyResult",
    "ShareAssignment",
    "SolverDiagnostics",
    "SweepResult",
    "TooLarge",
    "TreeBargainError",
    "TreeInstance",
    "Unsupported",
    "balanced_binary_tree",
    "check_core",
    "check_theoretical_bounds",
    "coalition_value",
    "compute_flow",
    "downward_curve",
    "lift_to_tree",
    "monotonicity_probe",
    "nash_variant_shares",
    "nash_variant_solve",
    "nucleolus3",
    "prune",
    "reduce_to_path",
    "renegotiate_edge",
    "residuals_path",
    "residuals_tree",
    "run_experiment",
    "run_round",
    "shapley",
    "solve_fixed_point",
    "upward_sweep",
    "__version__",
]
