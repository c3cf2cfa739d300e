"""Select the compiled kernels when available, else the numpy fallback.

Set ``PQCBOUNDS_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("PQCBOUNDS_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

propagate_batch = _impl.propagate_batch
loss_batch = _impl.loss_batch
cone_batch = _impl.cone_batch

__all__ = ["BACKEND", "propagate_batch", "loss_batch", "cone_batch"]
