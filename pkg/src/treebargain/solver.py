"""Fixed-point solver for path bargaining instances.

The balance condition on path edge i reads

    (1 - x_i) * w_{i-1} = (1 - x_{i+1}) * (x_i * w_{i-1} - d_i)

with flows w_i = d0 * x_1 * ... * x_i and the fictitious share x_{n+1} = 0.
Fixing a trial x1 determines every later share through the upward form

    x_{i+1} = 1 - (w_{i-1} - w_i) / (w_i - d_i),

and x1 is feasible when the sweep keeps every x_i in [0, 1] and every
w_i > d_i.  The feasible set is an interval ending at 1, the swept x_n
rises with x1 while the downward curve 1/2 + d_n / (2 * w_{n-1}) falls,
and their unique crossing is the fixed point.  The solver binary-searches
x1 for that crossing: an infeasible midpoint moves the left endpoint,
otherwise the comparison of x_n against the downward curve decides the
side, and the final sweep runs at the right endpoint, which stays
feasible throughout.

Instances are normalized to d0 = 1 internally (the fixed point is
scale-free) and results are denormalized on the way out, so the search
tolerance and all residuals are relative to d0.

The swept x_n can be extremely sensitive to x1 when some flows barely
clear their disagreement values: between two adjacent double-precision
values of x1 the swept tail may jump by far more than any residual
target.  The solver measures that mismatch at the found bracket and,
when it stays above ~1e-11 even at the double-precision floor, continues
the same bisection in fixed-precision decimal arithmetic and returns the
correctly rounded shares.  Residuals evaluated at the rounded fixed
point are immune to the amplification, so they land near machine epsilon
for every instance.
"""

from __future__ import annotations

import decimal
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from ._backend import kernels
from .errors import BoundViolation, DimensionMismatch, InfeasiblePoint
from .reduction import PathInstance

_MACHINE_EPS = float(np.finfo(np.float64).eps)

# Crossing mismatch above which the bisection escalates precision: first
# to the double floor, then to decimal.  Keeping it two decades under the
# 1e-9 residual scale leaves room for the w_{n-1} factor in residual n.
_REFINE_GAP = 1e-11
_REFINE_PREC = 60
_REFINE_WIDTH = decimal.Decimal("1e-30")
_REFINE_MAX_ITER = 240

PathLike = Union[PathInstance, Sequence[float]]


def _as_instance(d: PathLike) -> PathInstance:
    return d if isinstance(d, PathInstance) else PathInstance(tuple(d))


def _gamma(dn: np.ndarray) -> float:
    """min(1 - max_{i>0} d_i, 1/(n+2)) on the normalized instance."""
    n = len(dn) - 1
    head = 1.0 - float(dn[1:].max()) if n > 0 else 1.0
    return min(head, 1.0 / (n + 2))


@dataclass(frozen=True)
class SweepResult:
    """Outcome of one upward sweep from a trial x1.

    ``first_violation`` is None when feasible, else (index, reason) for
    the first failed check; x and w entries beyond it are left at zero.
    """

    x: np.ndarray
    w: np.ndarray
    feasible: bool
    first_violation: tuple[int, str] | None


@dataclass(frozen=True)
class SolverDiagnostics:
    gamma: float
    normalized: bool
    binary_search_interval_width: float


@dataclass(frozen=True)
class FixedPointSolution:
    """Shares, flows, and payoffs at the fixed point, in original units.

    Payoffs follow u_i = (1 - x_{i+1}) * w_i with x_{n+1} = 0, so the
    root's payoff u_n equals its flow w_n.  ``max_residual`` is the
    largest per-edge balance residual relative to d0.
    """

    x: np.ndarray
    w: np.ndarray
    payoffs: np.ndarray
    max_residual: float
    iterations: int
    diagnostics: SolverDiagnostics


def upward_sweep(x1: float, d: PathLike) -> SweepResult:
    """Propagate a trial x1 through the upward equations.

    Works in the instance's own units; the recurrence only involves
    ratios, so the result matches the normalized sweep exactly.
    """
    inst = _as_instance(d)
    if inst.n < 1:
        raise ValueError("upward sweep needs at least one path edge")
    x, w, code = kernels.sweep_path(float(x1), np.asarray(inst.d))
    if code == 0:
        return SweepResult(x=x, w=w, feasible=True, first_violation=None)
    if code > 0:
        violation = (code, f"w[{code}] does not exceed d[{code}]")
    else:
        violation = (-code, f"x[{-code}] outside [0, 1]")
    return SweepResult(x=x, w=w, feasible=False, first_violation=violation)


def downward_curve(x1: float, d: PathLike) -> float:
    """The downward-equation value x_n' = 1/2 + d_n / (2 * w_{n-1}).

    Uses w_{n-1} from the upward sweep at x1; raises InfeasiblePoint when
    that sweep fails.
    """
    inst = _as_instance(d)
    sweep = upward_sweep(x1, inst)
    if not sweep.feasible:
        index, reason = sweep.first_violation
        raise InfeasiblePoint(f"x1 = {x1!r} is infeasible: {reason}")
    n = inst.n
    return 0.5 + inst.d[n] / (2.0 * float(sweep.w[n - 1]))


def _bisect_double(
    dn: np.ndarray, lo: float, hi: float, eps: float
) -> tuple[float, float, int]:
    """Shrink the x1 bracket by bisection in doubles."""
    n = len(dn) - 1
    iterations = 0
    while hi - lo > eps:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        iterations += 1
        xs, ws, code = kernels.sweep_path(mid, dn)
        if code != 0:
            lo = mid
            continue
        if xs[n - 1] > 0.5 + dn[n] / (2.0 * ws[n - 1]):
            hi = mid
        else:
            lo = mid
    return lo, hi, iterations


def _sweep_right_endpoint(hi: float, dn: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x, w, code = kernels.sweep_path(hi, dn)
    if code != 0:
        # The right endpoint is feasible by construction (the all-ones
        # point is, and hi only ever moves to feasible midpoints).
        raise AssertionError("right endpoint of the search went infeasible")
    return x, w


def _crossing_gap(x: np.ndarray, w: np.ndarray, dn: np.ndarray) -> float:
    """|swept x_n minus the downward curve| at the returned point.

    The last-edge residual equals 2 w_{n-1} times this gap, so it is the
    direct measure of how well the bracket resolved the crossing.
    """
    n = len(dn) - 1
    return abs(float(x[n - 1]) - (0.5 + dn[n] / (2.0 * float(w[n - 1]))))


def _decimal_sweep(x1, dn_dec):
    """Upward sweep in the ambient decimal context; None when infeasible.

    Returns (x, w, gap) with gap the signed crossing mismatch at x1.
    """
    n = len(dn_dec) - 1
    one = decimal.Decimal(1)
    x = [x1]
    w = [one]
    for i in range(1, n + 1):
        w_i = w[i - 1] * x[i - 1]
        if w_i <= dn_dec[i]:
            return None
        w.append(w_i)
        if i == n:
            break
        x_next = one - (w[i - 1] - w_i) / (w_i - dn_dec[i])
        if x_next < 0 or x_next > one:
            return None
        x.append(x_next)
    gap = x[n - 1] - (one / 2 + dn_dec[n] / (2 * w[n - 1]))
    return x, w, gap


def _refine_decimal(
    dn: np.ndarray, lo: float, hi: float
) -> tuple[np.ndarray, np.ndarray, int, float]:
    """Continue the x1 bisection in decimal until the bracket is ~1e-30.

    Adjacent doubles of x1 are 2^-53 apart, so once conditioning turns
    that spacing into a visible crossing gap no double-precision bracket
    can help; sixty decimal digits leave the swept shares exact to well
    past the final rounding.
    """
    with decimal.localcontext() as ctx:
        ctx.prec = _REFINE_PREC
        dn_dec = [decimal.Decimal(float(v)) for v in dn]
        # The double phase's sign decisions carry float noise worth a few
        # dozen ulps of x1, so the true crossing may sit just outside its
        # bracket; widen before continuing.
        lo_d = decimal.Decimal(max(0.0, lo - 1e-12))
        hi_d = decimal.Decimal(min(1.0, hi + 1e-12))
        iterations = 0
        for _ in range(_REFINE_MAX_ITER):
            if hi_d - lo_d <= _REFINE_WIDTH:
                break
            mid = (lo_d + hi_d) / 2
            iterations += 1
            swept = _decimal_sweep(mid, dn_dec)
            if swept is not None and swept[2] > 0:
                hi_d = mid
            else:
                lo_d = mid
        swept = _decimal_sweep(hi_d, dn_dec)
        if swept is None:
            raise AssertionError("right endpoint of the search went infeasible")
        xs, ws, _ = swept
        width = float(hi_d - lo_d)
    x = np.array([float(v) for v in xs])
    w = np.array([float(v) for v in ws])
    return x, w, iterations, width


def solve_fixed_point(d: PathLike, eps_search: float = 1e-13) -> FixedPointSolution:
    """Locate the unique fixed point of the path balance equations.

    n = 0 is seller-takes-all and n = 1 has the closed form
    x1 = (d0 + d1) / (2 * d0); larger instances are binary-searched until
    the bracket width reaches max(eps_search, 4 machine epsilons), with
    the final sweep taken at the right endpoint.  When the crossing gap
    at that point stays above ~1e-11, the bisection continues first to
    the double-precision floor and then in decimal arithmetic, returning
    correctly rounded shares; ``iterations`` counts every bisection step
    taken.  Residuals are measured directly on the result rather than
    inferred from the bracket.
    """
    if not eps_search > 0.0:
        raise ValueError("eps_search must be positive")
    inst = _as_instance(d)
    n = inst.n
    d0 = inst.d[0]
    dn = np.asarray(inst.d) / d0
    gamma = _gamma(dn)

    iterations = 0
    width = 0.0
    if n == 0:
        x = np.zeros(0)
        w_norm = np.ones(1)
    elif n == 1:
        x1 = (1.0 + dn[1]) / 2.0
        x, w_norm, code = kernels.sweep_path(x1, dn)
    else:
        eps_eff = max(float(eps_search), 4.0 * _MACHINE_EPS)
        lo, hi, iterations = _bisect_double(dn, 0.0, 1.0, eps_eff)
        x, w_norm = _sweep_right_endpoint(hi, dn)
        if _crossing_gap(x, w_norm, dn) > _REFINE_GAP:
            lo, hi, extra = _bisect_double(dn, lo, hi, 4.0 * _MACHINE_EPS)
            iterations += extra
            x, w_norm = _sweep_right_endpoint(hi, dn)
        width = hi - lo
        if _crossing_gap(x, w_norm, dn) > _REFINE_GAP:
            x, w_norm, extra, width = _refine_decimal(dn, lo, hi)
            iterations += extra

    w = w_norm * d0
    payoffs = np.empty(n + 1)
    for i in range(n):
        payoffs[i] = (1.0 - x[i]) * w[i]
    payoffs[n] = w[n]
    res = residuals_path(x, inst)
    return FixedPointSolution(
        x=x,
        w=w,
        payoffs=payoffs,
        max_residual=float(res.max()) if n > 0 else 0.0,
        iterations=iterations,
        diagnostics=SolverDiagnostics(
            gamma=gamma, normalized=True, binary_search_interval_width=width
        ),
    )


def residuals_path(x: Sequence[float], d: PathLike) -> np.ndarray:
    """Per-edge balance residuals of a share vector, relative to d0.

    Residual i is |(1 - x_i) w_{i-1} - (1 - x_{i+1})(x_i w_{i-1} - d_i)|
    on the normalized instance, with x_{n+1} = 0; an eps-fixed point has
    every entry at most eps.
    """
    inst = _as_instance(d)
    n = inst.n
    xv = np.asarray(x, dtype=np.float64)
    if xv.shape != (n,):
        raise DimensionMismatch(f"expected {n} shares, got shape {xv.shape}")
    dn = np.asarray(inst.d) / inst.d[0]
    w_prev = 1.0
    res = np.empty(n)
    for i in range(1, n + 1):
        x_i = float(xv[i - 1])
        x_next = float(xv[i]) if i < n else 0.0
        res[i - 1] = abs(
            (1.0 - x_i) * w_prev - (1.0 - x_next) * (x_i * w_prev - dn[i])
        )
        w_prev = w_prev * x_i
    return res


@dataclass(frozen=True)
class BoundsReport:
    """Margins by which a solution clears the theoretical bounds.

    Lower bounds: x_i >= (n-i+1)/(n-i+2) and w_i >= (n-i+1)/(n+1) on the
    normalized scale.  Upper bounds: x_i <= 1 - gamma^(4n) and
    w_i >= d_i + gamma^(4n+1); these are checked only while gamma^(4n+1)
    stays above 1e-300, otherwise they are recorded as vacuous at this
    precision and their margins are None.
    """

    gamma: float
    lower_share_margin: float
    lower_flow_margin: float
    upper_share_margin: float | None
    flow_gap_margin: float | None
    vacuous: tuple[str, ...]


def check_theoretical_bounds(
    sol: FixedPointSolution, d: PathLike, slack: float = 1e-12
) -> BoundsReport:
    """Verify the share/flow bounds the fixed point must satisfy.

    Raises BoundViolation (with index and margin) when any checked bound
    is missed by more than ``slack``.
    """
    inst = _as_instance(d)
    n = inst.n
    dn = np.asarray(inst.d) / inst.d[0]
    gamma = _gamma(dn)
    x = np.asarray(sol.x, dtype=np.float64)
    w = np.asarray(sol.w, dtype=np.float64) / inst.d[0]

    lower_share = math.inf
    for i in range(1, n + 1):
        margin = float(x[i - 1]) - (n - i + 1) / (n - i + 2)
        if margin < -slack:
            raise BoundViolation(
                f"x[{i}] misses its lower bound by {-margin:.3e}",
                index=i,
                margin=margin,
            )
        lower_share = min(lower_share, margin)
    lower_flow = math.inf
    for i in range(n + 1):
        margin = float(w[i]) - (n - i + 1) / (n + 1)
        if margin < -slack:
            raise BoundViolation(
                f"w[{i}] misses its lower bound by {-margin:.3e}",
                index=i,
                margin=margin,
            )
        lower_flow = min(lower_flow, margin)

    gap = gamma ** (4 * n + 1)
    if gap <= 1e-300:
        return BoundsReport(
            gamma=gamma,
            lower_share_margin=lower_share,
            lower_flow_margin=lower_flow,
            upper_share_margin=None,
            flow_gap_margin=None,
            vacuous=("upper_share", "flow_gap"),
        )
    cap = 1.0 - gamma ** (4 * n)
    upper_share = math.inf
    for i in range(1, n + 1):
        margin = cap - float(x[i - 1])
        if margin < -slack:
            raise BoundViolation(
                f"x[{i}] exceeds its upper bound by {-margin:.3e}",
                index=i,
                margin=margin,
            )
        upper_share = min(upper_share, margin)
    flow_gap = math.inf
    for i in range(1, n + 1):
        margin = float(w[i]) - float(dn[i]) - gap
        if margin < -slack:
            raise BoundViolation(
                f"w[{i}] is too close to d[{i}] (margin {margin:.3e})",
                index=i,
                margin=margin,
            )
        flow_gap = min(flow_gap, margin)
    return BoundsReport(
        gamma=gamma,
        lower_share_margin=lower_share,
        lower_flow_margin=lower_flow,
        upper_share_margin=upper_share,
        flow_gap_margin=flow_gap,
        vacuous=(),
    )
