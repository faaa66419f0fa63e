"""Kernel selection.

Picks the compiled extension when it imports, otherwise the pure-Python
fallback.  Set ``FAIRRANK_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _kernels_py

IMPLEMENTATION = "python"
_impl = _kernels_py

if not os.environ.get("FAIRRANK_PURE_PYTHON"):
    try:
        from . import _kernels_ext as _impl  # noqa: F811
        IMPLEMENTATION = "cython"
    except ImportError:
        pass

count_columns_direct = _impl.count_columns_direct
hit_and_run = _impl.hit_and_run


def get(name):
    """Return the kernel module ``"python"`` or ``"cython"`` explicitly."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels_ext
        return _kernels_ext
    raise ValueError(f"unknown kernel implementation {name!r}")


def available():
    names = ["python"]
    try:
        from . import _kernels_ext  # noqa: F401
        names.append("cython")
    except ImportError:
        pass
    return names
