"""Shared test utilities: an independent path-solver oracle and generators.

The oracle reimplements the fixed-point computation from scratch (dense
grid over x1 locating the sign change of the upward-minus-downward gap,
then bisection) without touching the package's solver, so agreement
between the two is meaningful evidence.

Float bisection alone cannot pin the answer on badly conditioned
instances: the swept tail can move more per ulp of x1 than the accuracy
being certified.  The oracle therefore finishes every solve with a
decimal-arithmetic bisection (50 digits, bracket down to 1e-28) and
returns correctly rounded shares.
"""

from __future__ import annotations

from decimal import Decimal, localcontext

import numpy as np


def oracle_sweep(x1, d):
    """Scalar upward sweep; returns (x, w, feasible)."""
    d = np.asarray(d, dtype=float)
    n = len(d) - 1
    x = np.zeros(n)
    w = np.zeros(n + 1)
    w[0] = d[0]
    x[0] = x1
    for i in range(1, n + 1):
        w[i] = w[i - 1] * x[i - 1]
        if not w[i] > d[i]:
            return x, w, False
        if i < n:
            nxt = 1.0 - (w[i - 1] - w[i]) / (w[i] - d[i])
            if not 0.0 <= nxt <= 1.0:
                return x, w, False
            x[i] = nxt
    return x, w, True


def oracle_gap(x1, d):
    """Upward x_n minus the downward curve at x1; None when infeasible."""
    d = np.asarray(d, dtype=float)
    n = len(d) - 1
    x, w, feasible = oracle_sweep(x1, d)
    if not feasible:
        return None
    return x[n - 1] - (0.5 + d[n] / (2.0 * w[n - 1]))


def oracle_grid(d, points=4097, lo=0.0, hi=1.0):
    """Vectorized sweep over a uniform x1 grid spanning [lo, hi].

    Returns (x1 grid, alive mask, gap values); gap entries are garbage
    where not alive.
    """
    d = np.asarray(d, dtype=float)
    n = len(d) - 1
    x1 = np.linspace(lo, hi, points)
    alive = np.ones(points, dtype=bool)
    w_prev = np.full(points, d[0])
    x_i = x1.copy()
    with np.errstate(divide="ignore", invalid="ignore"):
        for i in range(1, n):
            w_i = w_prev * x_i
            alive &= w_i > d[i]
            x_next = 1.0 - (w_prev - w_i) / (w_i - d[i])
            alive &= (x_next >= 0.0) & (x_next <= 1.0)
            w_prev = w_i
            x_i = x_next
        w_n = w_prev * x_i
        alive &= w_n > d[n]
        gap = x_i - (0.5 + d[n] / (2.0 * w_prev))
    return x1, alive, gap


def oracle_sign_changes(d, points=4097, max_zoom=8):
    """Gap sign flips across the feasible x1 region, zooming as needed.

    The negative-gap corridor between the feasibility boundary and the
    crossing is often far narrower than any fixed grid step, so whenever
    every feasible point seen so far has a positive gap the counter
    re-grids the cell just below the first feasible point and repeats.
    """
    lo, hi = 0.0, 1.0
    flips = 0
    for _ in range(max_zoom):
        x1, alive, gap = oracle_grid(d, points, lo, hi)
        idx = np.nonzero(alive)[0]
        if len(idx) == 0:
            return flips
        signs = gap[idx] > 0.0
        flips += int(np.count_nonzero(signs[1:] != signs[:-1]))
        first = int(idx[0])
        if not signs[0] or first == 0:
            return flips
        lo, hi = float(x1[first - 1]), float(x1[first])
        if not hi > lo:
            return flips
    return flips


def _decimal_gap(x1, dd):
    """Decimal sweep at x1; returns (shares, gap) or (None, None)."""
    n = len(dd) - 1
    shares = [x1]
    w_prev = dd[0]
    for i in range(1, n):
        w_i = w_prev * shares[-1]
        if w_i <= dd[i]:
            return None, None
        nxt = 1 - (w_prev - w_i) / (w_i - dd[i])
        if nxt < 0 or nxt > 1:
            return None, None
        shares.append(nxt)
        w_prev = w_i
    w_last = w_prev * shares[-1]
    if w_last <= dd[n]:
        return None, None
    return shares, shares[-1] - (Decimal(1) / 2 + dd[n] / (2 * w_prev))


def _decimal_refine(d, lo, hi):
    """Finish the bisection in 50-digit decimal; returns rounded shares.

    The float bracket is widened first because its endpoint decisions
    were made with noisy float sweeps.
    """
    with localcontext() as ctx:
        ctx.prec = 50
        dd = [Decimal(float(v)) for v in d]
        left = Decimal(max(0.0, lo - 1e-12))
        right = Decimal(min(1.0, hi + 1e-12))
        floor = Decimal("1e-28")
        for _ in range(200):
            if right - left <= floor:
                break
            mid = (left + right) / 2
            _, g = _decimal_gap(mid, dd)
            if g is not None and g > 0:
                right = mid
            else:
                left = mid
        shares, g = _decimal_gap(right, dd)
        assert g is not None
        return np.array([float(s) for s in shares])


def oracle_solve(d, points=4097):
    """Grid-bracketed bisection for the fixed-point share vector."""
    d = np.asarray(d, dtype=float)
    n = len(d) - 1
    if n == 0:
        return np.zeros(0)
    if n == 1:
        return np.array([(d[0] + d[1]) / (2.0 * d[0])])
    x1, alive, gap = oracle_grid(d, points)
    pos = np.nonzero(alive & (gap > 0.0))[0]
    hi = x1[pos[0]]
    lo = x1[pos[0] - 1] if pos[0] > 0 else 0.0
    for _ in range(100):
        if hi - lo <= 1e-16:
            break
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        g = oracle_gap(mid, d)
        if g is None or g <= 0.0:
            lo = mid
        else:
            hi = mid
    return _decimal_refine(d, lo, hi)


def random_path(rng, max_n=16):
    """Random instance tuple: lognormal d0, d_i uniform in [0, 0.99) * d0."""
    n = int(rng.integers(1, max_n + 1))
    d0 = float(np.exp(1.0 + rng.standard_normal()))
    rest = rng.uniform(0.0, 0.99, n) * d0
    return (d0, *[float(v) for v in rest])


def random_tree(rng, max_nodes=50, tie_prob=0.2):
    """Random topology (uniform parent attachment) with lognormal bids.

    With probability ``tie_prob`` two leaves share the maximum value so
    the tie-collapse reduction path gets exercised.
    """
    from treebargain import TreeInstance

    count = int(rng.integers(2, max_nodes + 1))
    parent = {f"n{i}": f"n{int(rng.integers(i))}" for i in range(1, count)}
    internal = set(parent.values())
    leaves = [f"n{i}" for i in range(1, count) if f"n{i}" not in internal]
    values = {leaf: float(np.exp(1.0 + rng.standard_normal())) for leaf in leaves}
    if len(leaves) >= 2 and rng.random() < tie_prob:
        pair = rng.choice(len(leaves), size=2, replace=False)
        top = max(values.values()) + 1.0
        values[leaves[int(pair[0])]] = top
        values[leaves[int(pair[1])]] = top
    return TreeInstance(root="n0", parent=parent, leaf_values=values)


def random_shares(rng, tree):
    """Uniform random share per edge."""
    return {edge: float(rng.uniform()) for edge in tree.edges()}
