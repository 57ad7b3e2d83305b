"""Kernel backend selection.

The compiled extension is preferred when importable; the pure-numpy
reference is the fallback. Set VEGASCORE_KERNELS=python (or =native) to
force a backend — forcing native raises if the extension is missing.
"""

from __future__ import annotations

import os

from . import _pyref

_requested = os.environ.get("VEGASCORE_KERNELS", "").strip().lower()

if _requested == "python":
    _impl = _pyref
    BACKEND = "python"
else:
    try:
        from . import _native as _impl  # type: ignore[no-redef]

        BACKEND = "native"
    except ImportError:
        if _requested == "native":
            raise ImportError(
                "VEGASCORE_KERNELS=native but the compiled extension is unavailable"
            )
        _impl = _pyref
        BACKEND = "python"

bhattacharyya_diag_matrix = _impl.bhattacharyya_diag_matrix
neighbor_entropy_mean = _impl.neighbor_entropy_mean


def backend_name() -> str:
    """Which kernel implementation is active: 'native' or 'python'."""
    return BACKEND
