"""Independent oracles for the inner L1 minimisation and for the planner."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from . import planner
from .confidence import inner_optimistic_distribution
from .model import make_random_instance

INNER_TOL = 1e-9
PLANNER_TOL = 1e-6


def lp_inner_min(p_row, radius: float, J) -> tuple[float, np.ndarray]:
    """min q.J  s.t.  ||q - p||_1 <= radius, q >= 0, sum(q) <= 1, as an LP in (q, u)."""
    p = np.asarray(p_row, dtype=np.float64)
    J = np.asarray(J, dtype=np.float64)
    n = p.size
    eye = np.eye(n)
    c = np.concatenate([J, np.zeros(n)])
    A_ub = np.block([
        [eye, -eye],                                   # q - u <= p
        [-eye, -eye],                                  # -q - u <= -p
        [np.zeros((1, n)), np.ones((1, n))],           # sum u <= radius
        [np.ones((1, n)), np.zeros((1, n))],           # sum q <= 1
    ])
    b_ub = np.concatenate([p, -p, [radius], [1.0]])
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=[(0, None)] * (2 * n), method="highs",
                  options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        raise RuntimeError(f"LP oracle failed: {res.message}")
    return float(res.fun), res.x[:n]


def random_feasible_points(p_row, radius: float, count: int, rng: np.random.Generator) -> np.ndarray:
    """Points of the feasible set: random L1 perturbations of p, clipped at 0, with sum <= 1."""
    p = np.asarray(p_row, dtype=np.float64)
    d = rng.laplace(size=(count, p.size))
    d /= np.abs(d).sum(axis=1, keepdims=True)
    d *= radius * rng.uniform(0.0, 1.0, size=(count, 1))
    # clipping at 0 only moves entries toward p, so the L1 budget still holds
    q = np.maximum(p + d, 0.0)
    over = q.sum(axis=1) > 1.0
    q[over] = np.minimum(q[over], p)  # drop the added mass: still within budget, sum <= sum(p) <= 1
    return q


def corrupted_inner(p_row, radius, J):
    """Negative control: removes mass from the lowest-valued states first."""
    order = np.argsort(np.asarray(J), kind="stable")
    q = np.array(p_row, dtype=np.float64)
    budget = radius
    for o in order:
        take = min(q[o], budget)
        q[o] -= take
        budget -= take
    return q


@dataclass
class SuiteResult:
    name: str
    trials: int
    failures: int
    worst_gap: float

    @property
    def passed(self) -> bool:
        return self.failures == 0


def _random_triple(rng, max_states=6):
    n = int(rng.integers(1, max_states + 1))
    p = rng.dirichlet(np.ones(n + 1))[:n]
    if rng.random() < 0.2:
        p[rng.random(n) < 0.4] = 0.0
    J = rng.uniform(0.0, 10.0, size=n)
    if rng.random() < 0.2:
        J[rng.integers(n)] = J[rng.integers(n)]  # ties
    radius = float(rng.uniform(0.0, 2.0))
    return p, radius, J


def inner_min_suite(trials: int = 100, seed: int = 0, points: int = 10_000, inner=None) -> SuiteResult:
    inner = inner_optimistic_distribution if inner is None else inner
    rng = np.random.default_rng(seed)
    failures, worst = 0, 0.0
    for _ in range(trials):
        p, radius, J = _random_triple(rng)
        q = np.asarray(inner(p, radius, J))
        obj = float(q @ J)
        lp_obj, _ = lp_inner_min(p, radius, J)
        feasible_obj = random_feasible_points(p, radius, points, rng) @ J
        gap = abs(obj - lp_obj)
        worst = max(worst, gap)
        ok = (
            gap <= INNER_TOL
            and obj <= feasible_obj.min() + INNER_TOL
            and np.abs(q - p).sum() <= radius + 1e-12
            and q.min(initial=0.0) >= 0.0
            and np.all(q <= p + 1e-15)
        )
        failures += not ok
    return SuiteResult("inner-min vs LP/random-feasible", trials, failures, worst)


def planner_suite(trials: int = 100, seed: int = 0) -> SuiteResult:
    rng = np.random.default_rng(seed)
    failures, worst = 0, 0.0
    for _ in range(trials):
        S = int(rng.integers(1, 5))
        A = int(rng.integers(1, 4))
        inst = make_random_instance(int(rng.integers(2**31)), S, A, float(rng.uniform(0.05, 0.5)), 0.0)
        vi = planner.value_iteration(inst)
        ex = planner.exhaustive_optimal(inst)
        gap = float(np.max(np.abs(vi.values - ex.values)))
        worst = max(worst, gap)
        failures += not (vi.converged and gap <= PLANNER_TOL)
    return SuiteResult("value iteration vs exhaustive enumeration", trials, failures, worst)
