# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled kernels: path sweeps, tree flows, and per-edge renegotiation.

The pure-Python mirror (``_kernels_py``) performs identical operations in
identical order; the build disables FP contraction so results stay
bit-identical across backends.  Keep the two files in lockstep.
"""

import numpy as np


def sweep_path(double x1, d):
    """Upward sweep of the path balance equations from a trial x1.

    Returns (x, w, code): share vector x1..xn, flow vector w0..wn, and a
    status code: 0 feasible; i > 0 when w_i fails to exceed d_i; -i when
    x_i leaves [0, 1].  Entries beyond a violation are left at zero.
    """
    dd_arr = np.ascontiguousarray(d, dtype=np.float64)
    cdef double[::1] dd = dd_arr
    cdef Py_ssize_t n = dd.shape[0] - 1
    x_arr = np.zeros(n, dtype=np.float64)
    w_arr = np.zeros(n + 1, dtype=np.float64)
    cdef double[::1] x = x_arr
    cdef double[::1] w = w_arr
    cdef Py_ssize_t i
    cdef double x_next
    cdef int code = 0
    w[0] = dd[0]
    if not (0.0 <= x1 <= 1.0):
        return x_arr, w_arr, -1
    if n > 0:
        x[0] = x1
    for i in range(1, n + 1):
        w[i] = w[i - 1] * x[i - 1]
        if not w[i] > dd[i]:
            code = <int> i
            break
        if i < n:
            x_next = 1.0 - (w[i - 1] - w[i]) / (w[i] - dd[i])
            if not (0.0 <= x_next <= 1.0):
                code = -(<int> i + 1)
                break
            x[i] = x_next
    return x_arr, w_arr, code


def flows_tree(long long[::1] offsets, long long[::1] children,
               double[::1] values, double[::1] x, double[::1] w):
    """Bottom-up flow pass over an indexed tree, filling ``w`` in place.

    Node indices must be topologically ordered root-first (every child
    index exceeds its parent's), which BFS numbering guarantees.
    """
    cdef Py_ssize_t n = offsets.shape[0] - 1
    cdef Py_ssize_t node, k, c
    cdef double best, offer
    for node in range(n - 1, -1, -1):
        if offsets[node] == offsets[node + 1]:
            w[node] = values[node]
        else:
            best = -1.0
            for k in range(offsets[node], offsets[node + 1]):
                c = <Py_ssize_t> children[k]
                offer = x[c] * w[c]
                if offer > best:
                    best = offer
            w[node] = best


cdef double _renegotiate(double a, double b, double c, double tol) nogil:
    cdef double lo, hi, mid, lhs, xa, m, rhs
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


def renegotiate(double a, double b, double c, double tol):
    """Bisect the single-edge egalitarian balance for a new share.

    Solves (1 - x) * a = c * (max(b, x * a) - b) for x in [0, 1], where a
    is the child's flow, b the best rival offer at the parent, and c the
    parent's retained fraction (1 at the root).  The left side falls from
    a to 0 and the right side is nondecreasing, so the root is unique;
    a == 0 degenerates to the all-ones convention.
    """
    return _renegotiate(a, b, c, tol)


def run_round_tree(long long[::1] offsets, long long[::1] children,
                   long long[::1] parent, double[::1] x, double[::1] w,
                   long long[::1] order, double tol):
    """One renegotiation round: update each edge in ``order`` in place.

    ``order`` lists child-node indices; each update is immediately visible
    to later ones (Gauss-Seidel), and flows are re-propagated up the
    ancestor chain until a node's best offer is unchanged.
    """
    cdef Py_ssize_t e, t, s, k, c, node
    cdef double a, b, cc, offer, best
    with nogil:
        for e in range(order.shape[0]):
            t = <Py_ssize_t> order[e]
            s = <Py_ssize_t> parent[t]
            b = 0.0
            for k in range(offsets[s], offsets[s + 1]):
                c = <Py_ssize_t> children[k]
                if c != t:
                    offer = x[c] * w[c]
                    if offer > b:
                        b = offer
            if parent[s] < 0:
                cc = 1.0
            else:
                cc = 1.0 - x[s]
            a = w[t]
            x[t] = _renegotiate(a, b, cc, tol)
            node = s
            while node >= 0:
                best = -1.0
                for k in range(offsets[node], offsets[node + 1]):
                    c = <Py_ssize_t> children[k]
                    offer = x[c] * w[c]
                    if offer > best:
                        best = offer
                if best == w[node]:
                    break
                w[node] = best
                node = <Py_ssize_t> parent[node]
