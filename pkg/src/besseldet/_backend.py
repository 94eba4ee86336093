"""Kernel backend selection.

Hot loops are compiled with numba when it is importable. Setting the
environment variable ``BESSELDET_BACKEND=numpy`` (read once, at import)
forces the pure-numpy path: array kernels switch to their vectorized
implementations and scalar kernels run as ordinary Python.
"""

import os

BACKEND = os.environ.get("BESSELDET_BACKEND", "numba").strip().lower()
if BACKEND not in ("numba", "numpy"):
    raise ImportError(f"BESSELDET_BACKEND must be 'numba' or 'numpy', got {BACKEND!r}")

USE_NUMBA = False
if BACKEND == "numba":
    try:
        import numba
    except ImportError:  # pragma: no cover - depends on environment
        BACKEND = "numpy"
    else:
        USE_NUMBA = True


def jit(func):
    """``numba.njit`` with on-disk caching, or the identity on the numpy path.

    fastmath stays off: error-free transformations rely on strict IEEE
    evaluation order.
    """
    if USE_NUMBA:
        return numba.njit(cache=True, fastmath=False)(func)
    return func


def py(func):
    """The uncompiled Python function behind a (possibly) jitted kernel."""
    return getattr(func, "py_func", func)
