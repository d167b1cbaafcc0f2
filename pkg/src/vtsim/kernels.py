"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy/pure
Python reference module takes over. Set ``VTSIM_PURE_PYTHON=1`` to force the
fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("VTSIM_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

locate_many = _impl.locate_many
distance_matrix = _impl.distance_matrix
greedy_select = _impl.greedy_select


def backends():
    """Map of every importable backend name to its module."""
    found = {"python": _pykernels}
    try:
        from . import _ckernels

        found["cython"] = _ckernels
    except ImportError:
        pass
    return found
