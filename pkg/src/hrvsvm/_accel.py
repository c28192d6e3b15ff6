"""Backend selection for the hot loops.

Set ``HRVSVM_DISABLE_NUMBA=1`` to run the plain Python/NumPy versions. Numba is
also skipped silently if it cannot be imported.
"""

from __future__ import annotations

import os

_FALSY = {"", "0", "false", "no", "off"}

DISABLED_BY_ENV = os.environ.get("HRVSVM_DISABLE_NUMBA", "").strip().lower() not in _FALSY

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

HAVE_NUMBA = _numba is not None
USE_NUMBA = HAVE_NUMBA and not DISABLED_BY_ENV


def njit(func):
    """Compile ``func`` with numba in nopython mode, or return it untouched."""
    if _numba is None:
        return func
    return _numba.njit(cache=True, nogil=True)(func)


def backend_name() -> str:
    return "numba" if USE_NUMBA else "python"
