"""Kernel backend selection.

Hot inner loops (moment-matching Newton, cubic-spline advection) exist in two
implementations: numba ``@njit`` kernels and pure-numpy fallbacks.  The active
backend is chosen once at import time from the ``DVBGK_BACKEND`` environment
variable:

    DVBGK_BACKEND=numba   require numba, raise if unavailable
    DVBGK_BACKEND=numpy   force the pure-numpy path
    unset / auto          use numba when importable, else numpy

Both backends implement the same algorithms; results agree to roundoff.
``benchmarks/benchmark_kernels.py`` compares their throughput.
"""

import os

_requested = os.environ.get("DVBGK_BACKEND", "auto").strip().lower()
if _requested not in ("auto", "numba", "numpy"):
    raise RuntimeError(f"DVBGK_BACKEND must be 'numba', 'numpy' or 'auto', got {_requested!r}")

if _requested in ("auto", "numba"):
    try:
        import numba  # noqa: F401

        HAVE_NUMBA = True
    except ImportError:
        if _requested == "numba":
            raise RuntimeError("DVBGK_BACKEND=numba but numba is not importable")
        HAVE_NUMBA = False
else:
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"
