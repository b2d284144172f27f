"""Kernel backend selection.

Prefers the compiled extension; falls back to the pure-Python twin when
the extension is missing or ``LOGOGROUND_PURE=1`` is set (useful for
benchmarking and debugging).
"""

import os

if os.environ.get("LOGOGROUND_PURE"):
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as kernels

BACKEND = kernels.BACKEND_NAME
