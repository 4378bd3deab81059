"""Exact planning on a known SSP: backups, value iteration, policy evaluation,
properness checks, hitting times, and a brute-force oracle."""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidArgument, NumericFailure, RefusedError

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 1_000_000
DEFAULT_J_MAX = 1e9
GOAL_EDGE_TOL = 1e-12
EXHAUSTIVE_GUARD = 1_000_000


@dataclass
class PlanResult:
    values: np.ndarray
    policy: np.ndarray
    residual: float
    iterations: int
    converged: bool
    diverged: bool = False


def _arrays(instance):
    return np.ascontiguousarray(instance.cost), np.ascontiguousarray(instance.trans)


def bellman_backup(instance, J) -> tuple[np.ndarray, np.ndarray]:
    """One optimality backup; the goal contributes 0 and ties go to the lowest action."""
    cost, trans = _arrays(instance)
    return kernels.bellman_sweep(cost, trans, np.asarray(J, dtype=np.float64))


def value_iteration_arrays(cost, trans, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, j_max=DEFAULT_J_MAX, init=None):
    S = cost.shape[0]
    J0 = np.zeros(S) if init is None else np.asarray(init, dtype=np.float64)
    J, policy, residual, it, status = kernels.value_iteration(
        np.ascontiguousarray(cost, dtype=np.float64),
        np.ascontiguousarray(trans, dtype=np.float64),
        J0, float(tol), int(max_iter), float(j_max),
    )
    return PlanResult(
        values=np.asarray(J),
        policy=np.asarray(policy),
        residual=float(residual),
        iterations=int(it),
        converged=status == kernels.CONVERGED,
        diverged=status == kernels.DIVERGED,
    )


def value_iteration(instance, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, j_max=DEFAULT_J_MAX, init=None) -> PlanResult:
    """Iterate Bellman backups from ``init`` (default J = 0) to sup-norm change <= tol.

    Values above ``j_max`` stop the run with ``diverged=True``.  Starting
    from an upper bound (e.g. a proper policy's value) gives a monotone
    decreasing sequence instead, which is much faster for tiny costs.
    """
    if tol <= 0:
        raise InvalidArgument("tol must be positive")
    cost, trans = _arrays(instance)
    return value_iteration_arrays(cost, trans, tol, max_iter, j_max, init)


def polish(instance, plan: PlanResult, tol: float = DEFAULT_TOL) -> PlanResult:
    """Replace converged VI values by the exact value of the greedy policy.

    The linear solve is kept only if it is itself a Bellman fixed point
    (residual <= tol * 1e-3), which certifies optimality; otherwise
    ``plan`` is returned unchanged.
    """
    if not plan.converged or not is_proper(instance, plan.policy):
        return plan
    exact = evaluate_policy(instance, plan.policy, method="solve")
    backed, _ = bellman_backup(instance, exact)
    residual = float(np.max(np.abs(backed - exact)))
    if residual > tol * 1e-3:
        return plan
    return PlanResult(exact, plan.policy, residual, plan.iterations, True)


def _policy_rows(instance, policy):
    policy = np.asarray(policy, dtype=np.int64)
    S = instance.num_states
    if policy.shape != (S,) or policy.min() < 0 or policy.max() >= instance.num_actions:
        raise InvalidArgument("policy must assign a valid action to every state")
    idx = np.arange(S)
    return instance.cost[idx, policy], instance.trans[idx, policy], policy


def _reaches_goal(succ: list[list[int]], exits: np.ndarray) -> np.ndarray:
    """Backward BFS from the goal over a successor-list graph."""
    S = len(succ)
    pred: list[list[int]] = [[] for _ in range(S)]
    for s, nbrs in enumerate(succ):
        for s2 in nbrs:
            pred[s2].append(s)
    ok = exits.copy()
    queue = deque(np.flatnonzero(ok).tolist())
    while queue:
        s2 = queue.popleft()
        for s in pred[s2]:
            if not ok[s]:
                ok[s] = True
                queue.append(s)
    return ok


def is_proper(instance, policy) -> bool:
    """Goal reachable from every state in the support graph of ``policy``."""
    _, P_pi, _ = _policy_rows(instance, policy)
    exits = (1.0 - P_pi.sum(axis=1)) > GOAL_EDGE_TOL
    succ = [np.flatnonzero(P_pi[s] > 0).tolist() for s in range(P_pi.shape[0])]
    return bool(_reaches_goal(succ, exits).all())


def proper_policy_exists(instance) -> bool:
    trans = instance.trans
    exits = ((1.0 - trans.sum(axis=2)) > GOAL_EDGE_TOL).any(axis=1)
    support = (trans > 0).any(axis=1)
    succ = [np.flatnonzero(support[s]).tolist() for s in range(trans.shape[0])]
    return bool(_reaches_goal(succ, exits).all())


def proper_policy(instance) -> np.ndarray:
    """Some proper policy: each state moves toward a state closer to the goal.

    Layers are built by backward BFS; every state picks an action with
    positive probability of reaching a strictly closer layer (or the goal).
    """
    trans = instance.trans
    S, A = instance.num_states, instance.num_actions
    exit_prob = 1.0 - trans.sum(axis=2)
    depth = np.full(S, -1)
    policy = np.zeros(S, dtype=np.int64)
    frontier = []
    for s in range(S):
        acts = np.flatnonzero(exit_prob[s] > GOAL_EDGE_TOL)
        if acts.size:
            depth[s] = 0
            policy[s] = acts[0]
            frontier.append(s)
    level = 0
    while frontier:
        level += 1
        nxt = []
        done = depth >= 0
        for s in range(S):
            if depth[s] >= 0:
                continue
            hits = (trans[s][:, done] > 0).any(axis=1)
            acts = np.flatnonzero(hits)
            if acts.size:
                policy[s] = acts[0]
                nxt.append(s)
        for s in nxt:
            depth[s] = level
        frontier = nxt
    if (depth < 0).any():
        raise InvalidArgument("no proper policy exists")
    return policy


def evaluate_policy(instance, policy, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, method="iterate") -> np.ndarray:
    """Cost-to-go of ``policy``; an all-``inf`` array marks an improper policy.

    ``method="solve"`` uses a direct linear solve instead of fixed-point
    iteration (same contract).
    """
    c_pi, P_pi, policy = _policy_rows(instance, policy)
    if not is_proper(instance, policy):
        return np.full(instance.num_states, np.inf)
    if method == "solve":
        return np.linalg.solve(np.eye(len(c_pi)) - P_pi, c_pi)
    if method != "iterate":
        raise InvalidArgument(f"unknown method {method!r}")
    J, residual, _ = kernels.policy_evaluation(
        np.ascontiguousarray(c_pi), np.ascontiguousarray(P_pi), float(tol), int(max_iter)
    )
    if residual > tol:
        raise NumericFailure(f"policy evaluation did not converge in {max_iter} iterations", residual)
    return np.asarray(J)


def is_divergent(values) -> bool:
    return bool(np.isinf(np.asarray(values)).any())


def expected_time(instance, policy, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, method="iterate") -> np.ndarray:
    """Expected steps to reach the goal under ``policy`` (unit-cost evaluation)."""
    return evaluate_policy(instance.with_costs(np.ones_like(instance.cost)), policy, tol, max_iter, method)


def exhaustive_optimal(instance) -> PlanResult:
    """Brute force over every deterministic stationary policy (direct linear solves)."""
    S, A = instance.num_states, instance.num_actions
    if A**S > EXHAUSTIVE_GUARD:
        raise RefusedError(f"|A|^|S| = {A**S} exceeds the enumeration guard {EXHAUSTIVE_GUARD}")
    best = np.full(S, np.inf)
    best_policy = None
    best_total = np.inf
    eye = np.eye(S)
    idx = np.arange(S)
    for combo in itertools.product(range(A), repeat=S):
        policy = np.array(combo, dtype=np.int64)
        if not is_proper(instance, policy):
            continue
        J = np.linalg.solve(eye - instance.trans[idx, policy], instance.cost[idx, policy])
        best = np.minimum(best, J)
        total = J.sum()
        if total < best_total:
            best_total, best_policy = total, policy
    return PlanResult(values=best, policy=best_policy, residual=0.0, iterations=A**S, converged=True)


def optimal_proper(instance, eps0: float = 1e-8, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> PlanResult:
    """Best proper policy, valid also when some costs are zero.

    With positive costs this is plain value iteration.  Otherwise costs are
    floored at ``eps0``; the floored problem is solved by value iteration
    started from a proper policy's value, and the resulting policy is then
    evaluated under the original costs.
    """
    if instance.cost.min() > 0:
        return value_iteration(instance, tol=tol, max_iter=max_iter)
    floored = instance.with_costs(np.maximum(instance.cost, eps0))
    start = evaluate_policy(floored, proper_policy(floored), method="solve")
    plan = value_iteration(floored, tol=tol, max_iter=max_iter, init=start)
    values = evaluate_policy(instance, plan.policy, method="solve")
    return PlanResult(values, plan.policy, plan.residual, plan.iterations, plan.converged and not is_divergent(values))
