"""Pick the event-loop implementation at import time.

The compiled core is used when it was built; set ``DPSGAME_PURE_PYTHON=1``
to force the reference Python loops.
"""
import os

from . import _pycore


def load(name: str | None = None):
    """Return the kernel module called ``name`` ("cython" or "python")."""
    if name == "python":
        return _pycore
    if name not in (None, "cython"):
        raise ValueError(f"unknown backend {name!r}")
    try:
        from . import _ccore
    except ImportError:
        if name == "cython":
            raise
        return _pycore
    return _ccore


def _default():
    if os.environ.get("DPSGAME_PURE_PYTHON") == "1":
        return _pycore
    return load()


core = _default()
BACKEND = "python" if core is _pycore else "cython"
