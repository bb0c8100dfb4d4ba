"""Kernel backend selection.

The compiled module is used when it imports; otherwise the pure-Python
twin. Set ``WONTFIX_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _fallback

if os.environ.get("WONTFIX_PURE_PYTHON", "") not in ("", "0"):
    _compiled = None
else:
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None

_impl = _compiled if _compiled is not None else _fallback
BACKEND = "compiled" if _compiled is not None else "python"

smo_solve = _impl.smo_solve
scan_splits = _impl.scan_splits


def backends():
    """Name -> module for every backend available in this process."""
    out = {"python": _fallback}
    if _compiled is not None:
        out["compiled"] = _compiled
    return out
