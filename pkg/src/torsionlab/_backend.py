"""Pick the compiled kernels when available, else the NumPy fallback.

Set ``TORSIONLAB_PURE=1`` to force the fallback.
"""

import os

if os.environ.get("TORSIONLAB_PURE", "") not in ("", "0"):
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        from . import _kernels_py as kernels

BACKEND = kernels.BACKEND

__all__ = ["kernels", "BACKEND"]
