"""Kernel backend selection: numba JIT by default, pure numpy as fallback.

Set SETPACK_BACKEND=numpy to force the interpreted path (e.g. where numba is
unavailable or for benchmarking); SETPACK_BACKEND=numba to fail loudly if the
JIT cannot be used.  The flag is read once at import time.
"""

from __future__ import annotations

import os

__all__ = ["NUMBA_ENABLED", "jit", "prange", "set_threads", "max_threads"]

_requested = os.environ.get("SETPACK_BACKEND", "auto").strip().lower()
if _requested not in ("auto", "numba", "numpy"):
    raise ValueError(f"SETPACK_BACKEND must be auto, numba or numpy, got {_requested!r}")

_numba = None
if _requested in ("auto", "numba"):
    try:
        import numba as _numba  # type: ignore
    except ImportError:
        if _requested == "numba":
            raise
        _numba = None

NUMBA_ENABLED = _numba is not None

if NUMBA_ENABLED:
    from numba import prange  # noqa: F401

    def jit(parallel: bool = False):
        return _numba.njit(cache=True, parallel=parallel)

    def max_threads() -> int:
        return int(_numba.config.NUMBA_NUM_THREADS)

    def set_threads(n: int) -> int:
        n = max(1, min(int(n), max_threads()))
        _numba.set_num_threads(n)
        return n

else:
    prange = range

    def jit(parallel: bool = False):
        def decorate(fn):
            return fn

        return decorate

    def max_threads() -> int:
        return os.cpu_count() or 1

    def set_threads(n: int) -> int:
        # Interpreted kernels run serially regardless of the requested count.
        return 1
