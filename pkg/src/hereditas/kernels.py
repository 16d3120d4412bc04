"""Selects the coordinate-descent kernel at import time.

The compiled extension is preferred; the numpy implementation is the
fallback when the extension was not built.  Set HEREDITAS_PURE_PYTHON=1
to force the fallback (used by the kernel benchmark and for debugging).
"""

from __future__ import annotations

import os

from . import _cd_numpy

if os.environ.get("HEREDITAS_PURE_PYTHON"):
    _impl = _cd_numpy
    KERNEL = "python"
else:
    try:
        from . import _cd as _impl  # type: ignore[no-redef]

        KERNEL = "cython"
    except ImportError:
        _impl = _cd_numpy
        KERNEL = "python"

cd_solve = _impl.cd_solve


def available_kernels() -> dict[str, object]:
    """Name -> cd_solve callable for every kernel importable here."""
    kernels = {"python": _cd_numpy.cd_solve}
    try:
        from . import _cd

        kernels["cython"] = _cd.cd_solve
    except ImportError:
        pass
    return kernels
