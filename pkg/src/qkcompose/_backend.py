"""Pick the compiled core when it is importable, NumPy otherwise.

``QKCOMPOSE_BACKEND=python`` forces the fallback.
"""
import os

from . import _pycore

if os.environ.get("QKCOMPOSE_BACKEND", "").lower() == "python":
    core = _pycore
    NAME = "python"
else:
    try:
        from . import _core as core
        NAME = "cython"
    except ImportError:  # extension not built
        core = _pycore
        NAME = "python"


def available():
    """Return the names of the backends that can be imported here."""
    names = ["python"]
    try:
        from . import _core  # noqa: F401
    except ImportError:
        pass
    else:
        names.insert(0, "cython")
    return names


def get(name):
    if name == "python":
        return _pycore
    if name == "cython":
        from . import _core
        return _core
    raise ValueError(f"unknown backend {name!r}")
