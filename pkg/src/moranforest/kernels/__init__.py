"""Hot loops of the samplers and the Monte Carlo harness.

Two interchangeable implementations live here: ``_numba`` (compiled with
``numba.njit``) and ``_numpy`` (vectorized numpy, plain Python where the
algorithm is inherently sequential).  The numba path is used when numba
imports; set ``MORANFOREST_BACKEND=numpy`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _numpy

_requested = os.environ.get("MORANFOREST_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"MORANFOREST_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

_impl = _numpy
if _requested == "numba":
    try:
        from . import _numba as _impl  # type: ignore[no-redef]
    except ImportError:  # numba missing or broken
        _impl = _numpy

BACKEND = "numba" if _impl is not _numpy else "numpy"

UA_COLUMNS = _numpy.UA_COLUMNS
FOREST_COLUMNS = _numpy.FOREST_COLUMNS

forest_summary = _impl.forest_summary
ua_parents = _numpy.ua_parents
ua_summary = _impl.ua_summary
ua_extremes = _impl.ua_extremes
backward_consume = _impl.backward_consume
backward_parents = _impl.backward_parents
prufer_parents = _impl.prufer_parents
relabel = _numpy.relabel
local_limit_batch = _impl.local_limit_batch


def load_backend(name: str):
    """Return the kernel module for ``name`` regardless of the env flag."""
    if name == "numpy":
        return _numpy
    if name == "numba":
        from . import _numba
        return _numba
    raise ValueError(f"unknown backend {name!r}")
