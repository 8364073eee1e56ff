"""Backend selection for the hot kernels.

Set ``ISOLINES_PURE_NUMPY=1`` to force the vectorised numpy path even when
numba is importable. The choice is made once, at import time.
"""

from __future__ import annotations

import os

ENV_FLAG = "ISOLINES_PURE_NUMPY"

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

FORCE_NUMPY = os.environ.get(ENV_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}
USE_NUMBA = HAVE_NUMBA and not FORCE_NUMPY
BACKEND = "numba" if USE_NUMBA else "numpy"
