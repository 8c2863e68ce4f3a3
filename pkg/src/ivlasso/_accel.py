"""Optional numba acceleration.

Set ``IVLASSO_DISABLE_NUMBA=1`` to run every kernel through its pure
Python/numpy fallback. The flag is read once at import time.
"""
import os

_FLAG = os.environ.get("IVLASSO_DISABLE_NUMBA", "").strip().lower()
DISABLED = _FLAG in ("1", "true", "yes", "on")

try:
    if DISABLED:
        raise ImportError("numba disabled by IVLASSO_DISABLE_NUMBA")
    from numba import njit as _njit

    NUMBA_ENABLED = True
except ImportError:
    _njit = None
    NUMBA_ENABLED = False


def jit(func):
    """Compile ``func`` with numba when available, else return it unchanged."""
    if not NUMBA_ENABLED:
        return func
    return _njit(cache=True, nogil=True)(func)
