"""Compiled-versus-pure kernel parity and backend selection.

The two implementations are written to perform the same floating-point
operations in the same order, so everything here compares bit-for-bit,
not within tolerances.
"""

import os
import subprocess
import sys

import numpy as np
import pytest

import helpers
import treebargain
from treebargain import _kernels_py
from treebargain.dynamics import _array_tree

compiled = pytest.importorskip(
    "treebargain._kernels", reason="compiled extension not built"
)


def random_array_instance(rng, max_nodes=30):
    tree = helpers.random_tree(rng, max_nodes=max_nodes)
    at = _array_tree(tree)
    count = len(at.ids)
    values = np.zeros(count)
    for i, node in enumerate(at.ids):
        if not tree.children[node]:
            values[i] = tree.leaf_values[node]
    x = rng.uniform(0.0, 1.0, count)
    x[0] = 0.0
    return at, values, x


class TestSweepParity:
    def test_bitwise_identical(self):
        rng = np.random.default_rng(41)
        for _ in range(200):
            d = np.asarray(helpers.random_path(rng))
            x1 = float(rng.uniform())
            xc, wc, cc = compiled.sweep_path(x1, d)
            xp, wp, cp = _kernels_py.sweep_path(x1, d)
            assert cc == cp
            assert np.array_equal(xc, xp)
            assert np.array_equal(wc, wp)


class TestRenegotiateParity:
    def test_bitwise_identical(self):
        rng = np.random.default_rng(42)
        for _ in range(500):
            a = float(rng.uniform(0.0, 10.0))
            b = float(rng.uniform(0.0, 10.0))
            c = float(rng.uniform(0.0, 1.0))
            got_c = compiled.renegotiate(a, b, c, 1e-15)
            got_p = _kernels_py.renegotiate(a, b, c, 1e-15)
            assert got_c == got_p

    def test_no_value_convention(self):
        assert compiled.renegotiate(0.0, 1.0, 0.5, 1e-15) == 1.0
        assert _kernels_py.renegotiate(0.0, 1.0, 0.5, 1e-15) == 1.0


class TestTreeKernelParity:
    def test_flows_bitwise_identical(self):
        rng = np.random.default_rng(43)
        for _ in range(100):
            at, values, x = random_array_instance(rng)
            wc = np.zeros(len(at.ids))
            wp = np.zeros(len(at.ids))
            compiled.flows_tree(at.offsets, at.children, values, x, wc)
            _kernels_py.flows_tree(at.offsets, at.children, values, x, wp)
            assert np.array_equal(wc, wp)

    def test_rounds_bitwise_identical(self):
        rng = np.random.default_rng(44)
        for _ in range(50):
            at, values, x = random_array_instance(rng)
            count = len(at.ids)
            order = np.arange(1, count, dtype=np.int64)
            order = order[rng.permutation(count - 1)]
            xc, xp = x.copy(), x.copy()
            wc = np.zeros(count)
            wp = np.zeros(count)
            compiled.flows_tree(at.offsets, at.children, values, xc, wc)
            _kernels_py.flows_tree(at.offsets, at.children, values, xp, wp)
            for _ in range(3):
                compiled.run_round_tree(
                    at.offsets, at.children, at.parent, xc, wc, order, 1e-15
                )
                _kernels_py.run_round_tree(
                    at.offsets, at.children, at.parent, xp, wp, order, 1e-15
                )
            assert np.array_equal(xc, xp)
            assert np.array_equal(wc, wp)


class TestBackendSelection:
    def test_compiled_is_active_here(self):
        if os.environ.get("TREEBARGAIN_PURE_PYTHON"):
            pytest.skip("pure-Python backend forced by the environment")
        assert treebargain.BACKEND == "compiled"

    def test_env_var_forces_pure_python(self):
        code = "import treebargain; print(treebargain.BACKEND)"
        out = subprocess.run(
            [sys.executable, "-c", code],
            env={"PATH": "/usr/bin:/bin", "TREEBARGAIN_PURE_PYTHON": "1"},
            capture_output=True,
            text=True,
            check=True,
        )
        assert out.stdout.strip() == "python"

    def test_solver_output_matches_across_backends(self):
        code = (
            "import numpy, treebargain\n"
            "sol = treebargain.solve_fixed_point((1.0, 0.62, 0.11, 0.38))\n"
            "print(treebargain.BACKEND)\n"
            "print(repr(sol.x.tolist()))\n"
        )
        runs = {}
        for pure in ("0", "1"):
            out = subprocess.run(
                [sys.executable, "-c", code],
                env={"PATH": "/usr/bin:/bin", "TREEBARGAIN_PURE_PYTHON": pure},
                capture_output=True,
                text=True,
                check=True,
            )
            backend, shares = out.stdout.strip().splitlines()
            runs[backend] = shares
        assert set(runs) == {"compiled", "python"}
        assert runs["compiled"] == runs["python"]
