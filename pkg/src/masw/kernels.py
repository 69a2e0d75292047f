"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the pure-Python
fallback. ``MASW_BACKEND=python`` forces the fallback, ``MASW_BACKEND=compiled``
makes a missing extension an error.
"""
import logging
import os

from . import _pycore

log = logging.getLogger(__name__)

try:
    from . import _core as _compiled
except ImportError as exc:  # pragma: no cover - depends on the build
    _compiled = None
    _import_error = exc
else:
    _import_error = None

COMPILED_AVAILABLE = _compiled is not None


def get_backend(name: str = "auto"):
    """Return the kernel module for ``name`` in {"auto", "compiled", "python"}."""
    if name == "python":
        return _pycore
    if name == "compiled":
        if _compiled is None:
            raise ImportError(f"compiled kernels unavailable: {_import_error}")
        return _compiled
    if name == "auto":
        return _compiled if _compiled is not None else _pycore
    raise ValueError(f"unknown backend {name!r}")


backend = get_backend(os.environ.get("MASW_BACKEND", "auto"))
if backend is _pycore and os.environ.get("MASW_BACKEND", "auto") == "auto":
    log.warning("compiled kernels unavailable (%s); using the pure-Python fallback",
                _import_error)
