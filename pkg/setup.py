"""Build script for the optional compiled kernels.

The package is fully functional without the extension (a pure-Python
fallback is selected at import time), so the build is marked optional:
a missing compiler or Cython must not break installation.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext = Extension(
        "treebargain._kernels",
        ["src/treebargain/_kernels.pyx"],
        # -ffp-contract=off: forbid FMA contraction so the compiled kernels
        # are bit-identical to the pure-Python fallback.
        extra_compile_args=["-O2", "-ffp-contract=off"],
        optional=True,
    )
    ext_modules = cythonize([ext], language_level=3)

setup(ext_modules=ext_modules)
