"""Compare the compiled kernels against the pure-Python fallback.

Times the two hot paths: batched upward sweeps (the solver's inner loop)
and full renegotiation rounds on a deep balanced tree.  Run with

    python3 benchmarks/bench_backends.py

Works without the compiled extension (it then only reports the fallback).
"""

import time

import numpy as np

from treebargain import _kernels_py
from treebargain.dynamics import _array_tree, balanced_binary_tree

try:
    from treebargain import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def bench(label, fn, repeats=5):
    best = min(timeit(fn) for _ in range(repeats))
    print(f"  {label:<14} {best * 1e3:9.2f} ms")
    return best


def timeit(fn):
    start = time.perf_counter()
    fn()
    return time.perf_counter() - start


def sweep_batch(kernels, d, trials):
    def run():
        for x1 in trials:
            kernels.sweep_path(x1, d)

    return run


def dynamics_rounds(kernels, at, values, rounds=20):
    count = len(at.ids)
    edge_children = np.arange(1, count, dtype=np.int64)

    def run():
        rng = np.random.default_rng(0)
        x = np.full(count, 0.99)
        x[0] = 0.0
        w = np.zeros(count)
        kernels.flows_tree(at.offsets, at.children, values, x, w)
        for _ in range(rounds):
            order = edge_children[rng.permutation(count - 1)]
            kernels.run_round_tree(
                at.offsets, at.children, at.parent, x, w, order, 1e-15
            )

    return run


def main():
    rng = np.random.default_rng(0)
    d = np.concatenate([[1.0], rng.uniform(0.0, 0.99, 32)])
    trials = rng.uniform(0.0, 1.0, 20000).tolist()

    tree = balanced_binary_tree(8)
    at = _array_tree(tree)
    values = np.zeros(len(at.ids))
    values[at.leaf_indices] = np.exp(1.0 + rng.standard_normal(len(at.leaf_indices)))

    backends = [("python", _kernels_py)]
    if _kernels_c is not None:
        backends.append(("compiled", _kernels_c))

    print("20000 upward sweeps, n = 32:")
    sweep_times = {}
    for name, kernels in backends:
        sweep_times[name] = bench(name, sweep_batch(kernels, d, trials))

    print("20 renegotiation rounds, depth-8 tree (511 nodes):")
    round_times = {}
    for name, kernels in backends:
        round_times[name] = bench(name, dynamics_rounds(kernels, at, values))

    if _kernels_c is not None:
        print(
            f"speedup: sweeps x{sweep_times['python'] / sweep_times['compiled']:.1f}, "
            f"rounds x{round_times['python'] / round_times['compiled']:.1f}"
        )
    else:
        print("compiled extension not available; showing fallback only")


if __name__ == "__main__":
    main()
