"""Exception types shared across the package."""


class TreeBargainError(Exception):
    """Base class for all errors raised by this package."""


class InstanceParseError(TreeBargainError):
    """An instance or config document could not be parsed."""


class EmptyAfterPrune(TreeBargainError):
    """Pruning zero-value buyers left the tree with no leaves."""


class MissingShare(TreeBargainError):
    """A share assignment does not cover every edge of the tree."""


class DimensionMismatch(TreeBargainError):
    """A path share vector does not match the path edge count."""


class InvalidInstance(TreeBargainError):
    """A path instance violates d0 > 0 or 0 <= d_i < d0."""


class InfeasiblePoint(TreeBargainError):
    """An operation requiring a feasible x1 was called at an infeasible one."""


class InvalidPerturbation(TreeBargainError):
    """A disagreement-value perturbation would reach or exceed d0."""


class MonotonicityViolation(TreeBargainError):
    """A strictly positive perturbation failed to strictly raise the payoff."""


class BoundViolation(TreeBargainError):
    """A solved instance violates a theoretical share/flow bound."""

    def __init__(self, message, index=None, margin=None):
        super().__init__(message)
        self.index = index
        self.margin = margin


class TooLarge(TreeBargainError):
    """The game exceeds the node cap of the requested exhaustive method."""


class Unsupported(TreeBargainError):
    """The operation is only defined for a restricted instance family."""
