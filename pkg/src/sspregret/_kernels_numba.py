"""numba-compiled kernels; same contracts as ``_kernels_numpy``."""
from __future__ import annotations

import numpy as np
from numba import njit

CONVERGED, MAX_ITER, DIVERGED = 0, 1, 2


@njit(cache=True)
def _backup(cost, trans, J, Jn, policy):
    S, A = cost.shape
    residual = 0.0
    for s in range(S):
        best = np.inf
        best_a = 0
        for a in range(A):
            v = cost[s, a]
            for s2 in range(S):
                v += trans[s, a, s2] * J[s2]
            if v < best:
                best = v
                best_a = a
        Jn[s] = best
        policy[s] = best_a
        d = abs(best - J[s])
        if d > residual:
            residual = d
    return residual


@njit(cache=True)
def bellman_sweep(cost, trans, J):
    S = cost.shape[0]
    Jn = np.empty(S)
    policy = np.zeros(S, dtype=np.int64)
    _backup(cost, trans, J, Jn, policy)
    return Jn, policy


@njit(cache=True)
def value_iteration(cost, trans, J0, tol, max_iter, j_max):
    S = cost.shape[0]
    J = J0.astype(np.float64).copy()
    Jn = np.empty(S)
    policy = np.zeros(S, dtype=np.int64)
    residual = np.inf
    status = MAX_ITER
    it = 0
    while it < max_iter:
        it += 1
        residual = _backup(cost, trans, J, Jn, policy)
        J, Jn = Jn, J
        if S > 0 and J.max() > j_max:
            status = DIVERGED
            break
        if residual <= tol:
            status = CONVERGED
            break
    return J, policy, residual, it, status


@njit(cache=True)
def policy_evaluation(c_pi, P_pi, tol, max_iter):
    S = c_pi.shape[0]
    J = np.zeros(S)
    Jn = np.empty(S)
    residual = np.inf
    it = 0
    while it < max_iter:
        it += 1
        residual = 0.0
        for s in range(S):
            v = c_pi[s]
            for s2 in range(S):
                v += P_pi[s, s2] * J[s2]
            Jn[s] = v
            d = abs(v - J[s])
            if d > residual:
                residual = d
        J, Jn = Jn, J
        if residual <= tol:
            break
    return J, residual, it


@njit(cache=True)
def _descending(J):
    return np.argsort(-J, kind="mergesort")


@njit(cache=True)
def _remove_into(p_row, radius, order, q):
    for k in range(p_row.shape[0]):
        q[k] = p_row[k]
    budget = radius
    for k in range(order.shape[0]):
        if budget <= 0.0:
            break
        o = order[k]
        take = min(q[o], budget)
        q[o] -= take
        budget -= take


@njit(cache=True)
def inner_min_row(p_row, radius, J):
    q = np.empty(p_row.shape[0])
    _remove_into(p_row, radius, _descending(J), q)
    return q


@njit(cache=True)
def optimistic_rows(pbar, radius, J):
    S, A, _ = pbar.shape
    order = _descending(J)
    out = np.empty_like(pbar)
    q = np.empty(pbar.shape[2])
    for s in range(S):
        for a in range(A):
            _remove_into(pbar[s, a], radius[s, a], order, q)
            out[s, a, :] = q
    return out


@njit(cache=True)
def _optimistic_value(p_row, radius, order, J):
    # q.J without materialising q: remove mass from the highest-valued states first
    total = 0.0
    budget = radius
    for k in range(order.shape[0]):
        o = order[k]
        p = p_row[o]
        take = min(p, budget) if budget > 0.0 else 0.0
        budget -= take
        total += (p - take) * J[o]
    return total


@njit(cache=True)
def optimistic_q(cost, pbar, radius, J):
    S, A = cost.shape
    order = _descending(J)
    Q = np.empty((S, A))
    for s in range(S):
        for a in range(A):
            Q[s, a] = cost[s, a] + _optimistic_value(pbar[s, a], radius[s, a], order, J)
    return Q


@njit(cache=True)
def extended_value_iteration(cost, pbar, radius, tol, max_iter, j_max):
    S, A = cost.shape
    J = np.zeros(S)
    Jn = np.empty(S)
    policy = np.zeros(S, dtype=np.int64)
    residual = np.inf
    status = MAX_ITER
    it = 0
    while it < max_iter:
        it += 1
        order = _descending(J)
        residual = 0.0
        for s in range(S):
            best = np.inf
            best_a = 0
            for a in range(A):
                v = cost[s, a] + _optimistic_value(pbar[s, a], radius[s, a], order, J)
                if v < best:
                    best = v
                    best_a = a
            Jn[s] = best
            policy[s] = best_a
            d = abs(best - J[s])
            if d > residual:
                residual = d
        J, Jn = Jn, J
        if S > 0 and J.max() > j_max:
            status = DIVERGED
            break
        if residual <= tol:
            status = CONVERGED
            break
    return J, policy, residual, it, status
