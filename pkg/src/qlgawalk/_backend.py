"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
pure-Python ``_kernels_py`` module. Setting ``QLGAWALK_PURE_PYTHON=1`` forces
the fallback.
"""

import os

from . import _kernels_py

_AVAILABLE = {"python": _kernels_py}

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None
else:
    _AVAILABLE["cython"] = _ckernels

if os.environ.get("QLGAWALK_PURE_PYTHON", "") not in ("", "0") or _ckernels is None:
    kernels = _kernels_py
    name = "python"
else:
    kernels = _ckernels
    name = "cython"


def available():
    """Names of the importable backends."""
    return sorted(_AVAILABLE)


def use(backend):
    """Switch the active kernel backend (``"python"`` or ``"cython"``)."""
    global kernels, name
    if backend not in _AVAILABLE:
        raise ValueError(f"backend {backend!r} unavailable; have {available()}")
    kernels = _AVAILABLE[backend]
    name = backend

