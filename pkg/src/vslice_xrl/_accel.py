"""Numba switch for the hot kernels.

Set ``VSLICE_XRL_NUMBA=0`` before import to force the pure-numpy kernels.
When numba is missing the numpy path is used automatically.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

HAS_NUMBA = numba is not None
USE_NUMBA = HAS_NUMBA and os.environ.get("VSLICE_XRL_NUMBA", "1").strip().lower() not in (
    "0",
    "false",
    "no",
    "off",
)


def njit(func):
    """``numba.njit(cache=True)`` when numba is importable, identity otherwise."""
    if not HAS_NUMBA:
        return func
    return numba.njit(cache=True)(func)
