"""Numba switch.

Hot kernels are decorated with :func:`jit`. When numba is importable and
``BAYESPOLY_DISABLE_NUMBA`` is unset (or ``0``), they compile with
``numba.njit``; otherwise they stay plain Python and the batch drivers take
their vectorised numpy path instead of the per-SNP loops.

The flag is read once at import time. To compare both paths in one session,
run the second one in a subprocess with the variable set.
"""

from __future__ import annotations

import os

ENV_FLAG = "BAYESPOLY_DISABLE_NUMBA"


def _numba_requested() -> bool:
    return os.environ.get(ENV_FLAG, "0").strip().lower() in ("", "0", "false", "no")


try:
    if not _numba_requested():
        raise ImportError("numba disabled by " + ENV_FLAG)
    import numba

    USE_NUMBA = True
except ImportError:
    numba = None
    USE_NUMBA = False


def jit(func):
    """Compile ``func`` with ``njit(cache=True, nogil=True, error_model="numpy")`` when numba is active."""
    if USE_NUMBA:
        return numba.njit(cache=True, nogil=True, error_model="numpy")(func)
    return func


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"


def py(func):
    """The pure-Python body of a (possibly jitted) kernel."""
    return getattr(func, "py_func", func)
