"""Pure-numpy kernels.  Reference path; numerically equivalent to the numba one.

Shapes: cost (S, A), trans (S, A, S) with the goal as the row residual,
values (S,).  Status codes: 0 converged, 1 iteration cap, 2 divergence guard.
"""
from __future__ import annotations

import numpy as np

CONVERGED, MAX_ITER, DIVERGED = 0, 1, 2


def bellman_sweep(cost, trans, J):
    Q = cost + trans @ J
    greedy = np.argmin(Q, axis=1)
    return Q.min(axis=1), greedy


def value_iteration(cost, trans, J0, tol, max_iter, j_max):
    J = np.array(J0, dtype=np.float64)
    policy = np.zeros(cost.shape[0], dtype=np.int64)
    residual = np.inf
    status = MAX_ITER
    it = 0
    while it < max_iter:
        it += 1
        Q = cost + trans @ J
        policy = np.argmin(Q, axis=1)
        Jn = Q.min(axis=1)
        residual = float(np.max(np.abs(Jn - J))) if J.size else 0.0
        J = Jn
        if J.size and J.max() > j_max:
            status = DIVERGED
            break
        if residual <= tol:
            status = CONVERGED
            break
    return J, policy.astype(np.int64), residual, it, status


def policy_evaluation(c_pi, P_pi, tol, max_iter):
    J = np.zeros_like(c_pi, dtype=np.float64)
    residual = np.inf
    it = 0
    while it < max_iter:
        it += 1
        Jn = c_pi + P_pi @ J
        residual = float(np.max(np.abs(Jn - J))) if J.size else 0.0
        J = Jn
        if residual <= tol:
            break
    return J, residual, it


def _descending(J):
    # stable: equal values keep index order
    return np.argsort(-J, kind="stable")


def _greedy_removal(pbar, radius, order):
    ps = pbar[..., order]
    # budget left before each entry; sequential subtraction rounds like the scalar loop
    r = np.broadcast_to(np.asarray(radius, dtype=np.float64)[..., None], ps.shape[:-1] + (1,))
    before = np.subtract.accumulate(np.concatenate([r, ps[..., :-1]], axis=-1), axis=-1)
    removed = np.minimum(ps, np.maximum(before, 0.0))
    return ps - removed


def inner_min_row(p_row, radius, J):
    order = _descending(J)
    q = np.empty_like(p_row, dtype=np.float64)
    q[order] = _greedy_removal(p_row, radius, order)
    return q


def optimistic_rows(pbar, radius, J):
    order = _descending(J)
    q = np.empty_like(pbar, dtype=np.float64)
    q[..., order] = _greedy_removal(pbar, radius, order)
    return q


def optimistic_q(cost, pbar, radius, J):
    order = _descending(J)
    q_sorted = _greedy_removal(pbar, radius, order)
    return cost + q_sorted @ J[order]


def extended_value_iteration(cost, pbar, radius, tol, max_iter, j_max):
    S = cost.shape[0]
    J = np.zeros(S, dtype=np.float64)
    policy = np.zeros(S, dtype=np.int64)
    residual = np.inf
    status = MAX_ITER
    it = 0
    while it < max_iter:
        it += 1
        Q = optimistic_q(cost, pbar, radius, J)
        policy = np.argmin(Q, axis=1)
        Jn = Q.min(axis=1)
        residual = float(np.max(np.abs(Jn - J))) if S else 0.0
        J = Jn
        if S and J.max() > j_max:
            status = DIVERGED
            break
        if residual <= tol:
            status = CONVERGED
            break
    return J, policy.astype(np.int64), residual, it, status
