"""Kernel backend selection.

The compiled extension is used when it imports; set ``SYNDLOSS_BACKEND=numpy``
to force the vectorized fallback.
"""

import os

from . import _kernels_py

_requested = os.environ.get("SYNDLOSS_BACKEND", "auto").lower()

if _requested == "numpy":
    kernels = _kernels_py
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        if _requested == "cython":
            raise
        kernels = _kernels_py

BACKEND = kernels.BACKEND


def get_kernels(name=None):
    """Kernel module by name (``"cython"`` / ``"numpy"``), or the active one."""
    if name is None:
        return kernels
    if name == "numpy":
        return _kernels_py
    if name == "cython":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {name!r}")


def available_backends():
    names = ["numpy"]
    try:
        get_kernels("cython")
    except ImportError:
        return names
    return names + ["cython"]
