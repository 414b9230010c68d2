"""Optional numba acceleration.

Set ``SLOTPUNCT_DISABLE_NUMBA=1`` (or numba's own ``NUMBA_DISABLE_JIT=1``) to
force the pure-numpy kernels.
"""

from __future__ import annotations

import os

_DISABLED = os.environ.get("SLOTPUNCT_DISABLE_NUMBA", "0").lower() not in ("", "0", "false", "no")

try:
    if _DISABLED or os.environ.get("NUMBA_DISABLE_JIT", "0") not in ("", "0"):
        raise ImportError
    import numba

    HAS_NUMBA = True
    njit = numba.njit(cache=True, nogil=True)
except ImportError:
    HAS_NUMBA = False

    def njit(func):
        return None


def use_numba() -> bool:
    return HAS_NUMBA
