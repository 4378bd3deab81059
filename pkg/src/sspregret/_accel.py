"""Backend selection for the numeric kernels.

Set ``SSPREGRET_DISABLE_NUMBA=1`` to force the pure-numpy path.  The numba
path is also skipped automatically when numba cannot be imported.
"""
from __future__ import annotations

import os

ENV_FLAG = "SSPREGRET_DISABLE_NUMBA"


def _flag_set(value: str | None) -> bool:
    return value is not None and value.strip().lower() not in ("", "0", "false", "no")


try:
    import numba  # noqa: F401

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and not _flag_set(os.environ.get(ENV_FLAG))
