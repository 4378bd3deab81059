"""Dispatch to the numba or numpy kernel backend (see ``_accel``)."""
from __future__ import annotations

from . import _kernels_numpy as numpy_backend
from ._accel import USE_NUMBA

if USE_NUMBA:
    from . import _kernels_numba as numba_backend

    backend = numba_backend
else:
    numba_backend = None
    backend = numpy_backend

BACKEND_NAME = "numba" if USE_NUMBA else "numpy"
CONVERGED, MAX_ITER, DIVERGED = 0, 1, 2

bellman_sweep = backend.bellman_sweep
value_iteration = backend.value_iteration
policy_evaluation = backend.policy_evaluation
inner_min_row = backend.inner_min_row
optimistic_rows = backend.optimistic_rows
optimistic_q = backend.optimistic_q
extended_value_iteration = backend.extended_value_iteration
