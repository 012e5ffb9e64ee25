"""Numba toggle shared by the hot kernels.

Set ``SPIKELAB_NUMBA=0`` to force the pure-numpy code paths (useful for
debugging and for checking that both paths agree). ``SPIKELAB_THREADS`` caps
numba's thread pool.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_FALSY = {"0", "false", "no", "off"}

NUMBA_AVAILABLE = numba is not None
USE_NUMBA = NUMBA_AVAILABLE and os.environ.get("SPIKELAB_NUMBA", "1").lower() not in _FALSY


def njit(func):
    """Compile ``func`` in nopython mode, or return it untouched without numba."""
    if not NUMBA_AVAILABLE:
        return func
    return numba.njit(cache=True)(func)


def apply_thread_cap():
    threads = os.environ.get("SPIKELAB_THREADS")
    if not threads or not NUMBA_AVAILABLE:
        return
    n = max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)


apply_thread_cap()
