"""Backend selection for the hot kernels.

Set ``BRWRE_NUMBA=0`` in the environment to force the pure-numpy path.
The flag is read once at import time.
"""
import os

try:
    import numba
    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    _HAVE_NUMBA = False

USE_NUMBA = _HAVE_NUMBA and os.environ.get("BRWRE_NUMBA", "1").strip() not in ("0", "false", "no", "")


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity decorator otherwise."""
    if _HAVE_NUMBA:
        return numba.njit(*args, **kwargs)

    def wrap(fn):
        return fn
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return wrap


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
