"""Integration kernel selection: compiled Cython core when available,
pure-Python fallback otherwise.

Set AGROSPRAY_PURE_PYTHON=1 to force the fallback (used by the kernel
benchmark and the fallback test run).
"""

import os

if os.environ.get("AGROSPRAY_PURE_PYTHON", "") not in ("", "0"):
    from . import _fallback as kernel
    COMPILED = False
else:
    try:
        from . import _core as kernel  # type: ignore[attr-defined]
        COMPILED = True
    except ImportError:
        from . import _fallback as kernel
        COMPILED = False

__all__ = ["kernel", "COMPILED"]
