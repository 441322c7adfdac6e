"""Kernel backend selection.

The compiled :mod:`apronid._speedups` module is used when it imports; setting
``APRONID_PURE_PYTHON=1`` forces the pure-Python fallback. Both expose
``giftwrap``, ``monotone_chain``, ``calipers_sq`` and ``start_index``.
"""
import os

from apronid import _pure

# |coordinate| bound for the 64-bit compiled path
COMPILED_COORD_LIMIT = 1 << 30

if os.environ.get("APRONID_PURE_PYTHON", "") not in ("", "0"):
    compiled = None
else:
    try:
        from apronid import _speedups as compiled
    except ImportError:
        compiled = None

BACKEND = "cython" if compiled is not None else "python"


def available_backends():
    names = ["python"]
    if compiled is not None:
        names.append("cython")
    return names


def get_backend(name=None):
    """Return a kernel module by name; ``None`` picks the default."""
    if name is None:
        return compiled if compiled is not None else _pure
    if name == "python":
        return _pure
    if name == "cython":
        if compiled is None:
            raise ImportError("compiled kernels are not built")
        return compiled
    raise ValueError(f"unknown kernel backend {name!r}")
