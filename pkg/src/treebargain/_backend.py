"""Kernel backend selection.

Imports the compiled kernels when the extension built successfully and
falls back to the pure-Python mirror otherwise.  Both backends are
bit-identical; the environment variable TREEBARGAIN_PURE_PYTHON (any
value other than empty or "0") forces the fallback.
"""

from __future__ import annotations

import os

if os.environ.get("TREEBARGAIN_PURE_PYTHON", "0") not in ("", "0"):
    from . import _kernels_py as kernels

    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as kernels  # type: ignore[no-redef]

        BACKEND = "python"

__all__ = ["kernels", "BACKEND"]
