"""Numba switch. Set RWCOLLIDE_DISABLE_NUMBA=1 to run the kernels as plain Python.

Both paths draw from the same Mersenne Twister seeding, so they produce
bit-identical results; the plain path exists for debugging and for hosts
without numba.
"""
import os

DISABLE_ENV = "RWCOLLIDE_DISABLE_NUMBA"

USE_NUMBA = os.environ.get(DISABLE_ENV, "").strip().lower() not in ("1", "true", "yes")
if USE_NUMBA:
    try:
        import numba
    except ImportError:  # pragma: no cover
        USE_NUMBA = False


def jit(fn):
    if USE_NUMBA:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn
