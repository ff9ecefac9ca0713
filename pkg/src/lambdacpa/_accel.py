"""Backend selection for the compiled kernels.

``LAMBDACPA_BACKEND=numpy`` forces the pure-numpy path; the default is numba
when it imports cleanly.
"""

import os

try:
    import numba

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    numba = None
    NUMBA_AVAILABLE = False

_requested = os.environ.get("LAMBDACPA_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"LAMBDACPA_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

USE_NUMBA = NUMBA_AVAILABLE and _requested == "numba"
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(func):
    """Compile ``func`` in nopython mode, or return None without numba."""
    if not NUMBA_AVAILABLE:
        return None
    return numba.njit(cache=True)(func)
