"""Pure-Python mirror of the compiled kernels in ``_kernels.pyx``.

Every function here performs the same floating-point operations in the
same order as its compiled twin (whose build disables FP contraction), so
the two backends produce bit-identical results.  Keep the two files in
lockstep when editing either.
"""

from __future__ import annotations

import numpy as np


def sweep_path(x1, d):
    """Upward sweep of the path balance equations from a trial x1.

    ``d`` is the (possibly normalized) instance vector of length n + 1.
    Returns (x, w, code): share vector x1..xn, flow vector w0..wn, and a
    status code: 0 feasible; i > 0 when w_i fails to exceed d_i; -i when
    x_i leaves [0, 1].  Entries beyond a violation are left at zero.
    """
    dd = [float(v) for v in d]
    n = len(dd) - 1
    x = [0.0] * n
    w = [0.0] * (n + 1)
    w[0] = dd[0]
    code = 0
    if not 0.0 <= x1 <= 1.0:
        return np.asarray(x), np.asarray(w), -1
    if n > 0:
        x[0] = float(x1)
    for i in range(1, n + 1):
        w[i] = w[i - 1] * x[i - 1]
        if not w[i] > dd[i]:
            code = i
            break
        if i < n:
            x_next = 1.0 - (w[i - 1] - w[i]) / (w[i] - dd[i])
            if not 0.0 <= x_next <= 1.0:
                code = -(i + 1)
                break
            x[i] = x_next
    return np.asarray(x), np.asarray(w), code


def flows_tree(offsets, children, values, x, w):
    """Bottom-up flow pass over an indexed tree, filling ``w`` in place.

    Node indices must be topologically ordered root-first (every child
    index exceeds its parent's), which BFS numbering guarantees.
    """
    off = offsets.tolist()
    ch = children.tolist()
    val = values.tolist()
    xs = x.tolist()
    n = len(off) - 1
    ww = [0.0] * n
    for node in range(n - 1, -1, -1):
        if off[node] == off[node + 1]:
            ww[node] = val[node]
        else:
            best = -1.0
            for k in range(off[node], off[node + 1]):
                c = ch[k]
                offer = xs[c] * ww[c]
                if offer > best:
                    best = offer
            ww[node] = best
    w[:] = ww


def renegotiate(a, b, c, tol):
    """Bisect the single-edge egalitarian balance for a new share.

    Solves (1 - x) * a = c * (max(b, x * a) - b) for x in [0, 1], where a
    is the child's flow, b the best rival offer at the parent, and c the
    parent's retained fraction (1 at the root).  The left side falls from
    a to 0 and the right side is nondecreasing, so the root is unique;
    a == 0 degenerates to the all-ones convention.
    """
    a = float(a)
    b = float(b)
    c = float(c)
    if a == 0.0:
        return 1.0
    lo = 0.0
    hi = 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        lhs = (1.0 - mid) * a
        xa = mid * a
        m = xa if xa > b else b
        rhs = c * (m - b)
        if lhs > rhs:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def run_round_tree(offsets, children, parent, x, w, order, tol):
    """One renegotiation round: update each edge in ``order`` in place.

    ``order`` lists child-node indices; each update is immediately visible
    to later ones (Gauss-Seidel), and flows are re-propagated up the
    ancestor chain until a node's best offer is unchanged.
    """
    off = offsets.tolist()
    ch = children.tolist()
    par = parent.tolist()
    xs = x.tolist()
    ws = w.tolist()
    tol = float(tol)
    for t in order.tolist():
        s = par[t]
        b = 0.0
        for k in range(off[s], off[s + 1]):
            c = ch[k]
            if c != t:
                offer = xs[c] * ws[c]
                if offer > b:
                    b = offer
        cc = 1.0 if par[s] < 0 else 1.0 - xs[s]
        xs[t] = renegotiate(ws[t], b, cc, tol)
        node = s
        while node >= 0:
            best = -1.0
            for k in range(off[node], off[node + 1]):
                c = ch[k]
                offer = xs[c] * ws[c]
                if offer > best:
                    best = offer
            if best == ws[node]:
                break
            ws[node] = best
            node = par[node]
    x[:] = xs
    w[:] = ws
