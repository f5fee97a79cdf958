"""Kernel backend selection.

The compiled module (maskseq._kernels.fast, built from fast.pyx) and the
numpy fallback (py.py) implement the same two entry points with bit-identical
outputs. Selection happens once at import:

    MASKSEQ_KERNELS=fast   require the compiled module (ImportError if absent)
    MASKSEQ_KERNELS=py     force the pure fallback
    unset / auto           compiled if available, else fallback
"""

import os

from . import py as _py

_choice = os.environ.get("MASKSEQ_KERNELS", "auto").lower()

if _choice == "py":
    _impl = _py
elif _choice == "fast":
    from . import fast as _impl  # type: ignore[no-redef]
else:
    try:
        from . import fast as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _py

BACKEND = "fast" if _impl is not _py else "py"

trace_rings = _impl.trace_rings
fill_polygon = _impl.fill_polygon

__all__ = ["trace_rings", "fill_polygon", "BACKEND"]
