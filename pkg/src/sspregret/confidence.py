"""Visit counts, confidence sets, and optimistic models.

Two flavours of optimism are provided:

* Hoeffding: an L1 ball (over S) around the empirical row, solved by
  extended value iteration whose inner step greedily moves mass from the
  highest-valued states to the goal.
* Bernstein: per-entry intervals, whose optimistic model has the closed form
  ``max(p - 28 A - 4 sqrt(p A), 0)`` with the goal taking the residual.

Logarithms are natural throughout.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import InvalidArgument
from .planner import DEFAULT_J_MAX, value_iteration_arrays

HOEFFDING_SCALE = 5.0
BERNSTEIN_LINEAR = 28.0
BERNSTEIN_SQRT = 4.0


@dataclass
class CountTable:
    """Cumulative counts ``N``/``N3`` plus per-epoch deltas ``n``/``n3``.

    ``N3`` and ``n3`` have a trailing axis of size S + 1; the last slot is the goal.
    """

    num_states: int
    num_actions: int
    N: np.ndarray = field(init=False)
    N3: np.ndarray = field(init=False)
    n: np.ndarray = field(init=False)
    n3: np.ndarray = field(init=False)

    def __post_init__(self):
        S, A = self.num_states, self.num_actions
        self.N = np.zeros((S, A), dtype=np.int64)
        self.N3 = np.zeros((S, A, S + 1), dtype=np.int64)
        self.n = np.zeros((S, A), dtype=np.int64)
        self.n3 = np.zeros((S, A, S + 1), dtype=np.int64)

    def add(self, s: int, a: int, s_next: int) -> None:
        self.N[s, a] += 1
        self.N3[s, a, s_next] += 1

    def add_delta(self, s: int, a: int, s_next: int) -> None:
        self.n[s, a] += 1
        self.n3[s, a, s_next] += 1

    def merge(self) -> None:
        """Fold epoch deltas into the cumulative counts and zero them."""
        self.N += self.n
        self.N3 += self.n3
        self.n[:] = 0
        self.n3[:] = 0

    @property
    def total(self) -> int:
        return int(self.N.sum() + self.n.sum())

    def consistent(self) -> bool:
        return bool(
            np.array_equal(self.N3.sum(axis=2), self.N)
            and np.array_equal(self.n3.sum(axis=2), self.n)
            and self.N.min(initial=0) >= 0
            and self.n.min(initial=0) >= 0
        )

    def copy(self) -> "CountTable":
        out = CountTable(self.num_states, self.num_actions)
        out.N, out.N3, out.n, out.n3 = self.N.copy(), self.N3.copy(), self.n.copy(), self.n3.copy()
        return out

    @classmethod
    def from_transitions(cls, N3) -> "CountTable":
        N3 = np.asarray(N3, dtype=np.int64)
        out = cls(N3.shape[0], N3.shape[1])
        out.N3 = N3.copy()
        out.N = N3.sum(axis=2)
        return out


@dataclass
class OptimisticModel:
    trans_tilde: np.ndarray  # (S, A, S); goal is the residual
    values: np.ndarray
    policy: np.ndarray
    epoch_id: int = 0
    converged: bool = True
    iterations: int = 0
    residual: float = 0.0


def _n_plus(N):
    return np.maximum(np.asarray(N, dtype=np.float64), 1.0)


def empirical_transitions(counts: CountTable) -> np.ndarray:
    """N(s,a,s') / max(N(s,a), 1) restricted to s' in S."""
    return counts.N3[..., :-1] / _n_plus(counts.N)[..., None]


def hoeffding_radius(N, num_states: int, num_actions: int, delta: float):
    if not 0.0 < delta < 1.0:
        raise InvalidArgument(f"delta must lie in (0, 1), got {delta}")
    n = _n_plus(N)
    return HOEFFDING_SCALE * np.sqrt(num_states * np.log(num_states * num_actions * n / delta) / n)


def bernstein_width(N, num_states: int, num_actions: int, delta: float):
    """The per-pair quantity log(|S||A| N+ / delta) / N+."""
    if not 0.0 < delta < 1.0:
        raise InvalidArgument(f"delta must lie in (0, 1), got {delta}")
    n = _n_plus(N)
    return np.log(num_states * num_actions * n / delta) / n


def bernstein_bound(p_bar, width):
    return BERNSTEIN_LINEAR * width + BERNSTEIN_SQRT * np.sqrt(p_bar * width)


def inner_optimistic_distribution(p_row, radius: float, J) -> np.ndarray:
    """Minimise q.J over the L1 ball of ``radius`` around ``p_row`` (mass may leave to the goal).

    Mass is removed from states in non-increasing order of J until the
    budget is spent; no mass is ever added inside S.
    """
    p_row = np.asarray(p_row, dtype=np.float64)
    J = np.asarray(J, dtype=np.float64)
    if radius < 0 or not np.isfinite(radius):
        raise InvalidArgument("radius must be a finite non-negative number")
    if p_row.ndim != 1 or p_row.shape != J.shape:
        raise InvalidArgument("p_row and J must be 1-D of equal length")
    if p_row.min(initial=0.0) < 0 or p_row.sum() > 1.0 + 1e-9:
        raise InvalidArgument("p_row must be non-negative with sum <= 1")
    if J.min(initial=0.0) < 0:
        raise InvalidArgument("J must be non-negative")
    return np.asarray(kernels.inner_min_row(p_row, float(radius), J))


def extended_value_iteration(
    counts: CountTable,
    cost,
    delta: float,
    tol: float = 1e-8,
    max_iter: int = 100_000,
    epoch_id: int = 0,
    j_max: float = DEFAULT_J_MAX,
) -> OptimisticModel:
    """Optimistic planning over the Hoeffding L1 ball of every (s, a)."""
    S, A = counts.num_states, counts.num_actions
    p_bar = np.ascontiguousarray(empirical_transitions(counts))
    radius = np.ascontiguousarray(hoeffding_radius(counts.N, S, A, delta))
    cost = np.ascontiguousarray(cost, dtype=np.float64)
    J, policy, residual, it, status = kernels.extended_value_iteration(
        cost, p_bar, radius, float(tol), int(max_iter), float(j_max)
    )
    J = np.asarray(J)
    trans_tilde = np.asarray(kernels.optimistic_rows(p_bar, radius, J))
    return OptimisticModel(trans_tilde, J, np.asarray(policy), epoch_id, status == kernels.CONVERGED, int(it), float(residual))


def bernstein_optimistic(counts: CountTable, delta: float) -> np.ndarray:
    p_bar = empirical_transitions(counts)
    width = bernstein_width(counts.N, counts.num_states, counts.num_actions, delta)[..., None]
    return np.maximum(p_bar - bernstein_bound(p_bar, width), 0.0)


def optimistic_plan_bernstein(
    counts: CountTable,
    cost,
    delta: float,
    tol: float = 1e-8,
    max_iter: int = 100_000,
    epoch_id: int = 0,
    j_max: float = DEFAULT_J_MAX,
) -> OptimisticModel:
    trans_tilde = bernstein_optimistic(counts, delta)
    plan = value_iteration_arrays(np.asarray(cost, dtype=np.float64), trans_tilde, tol, max_iter, j_max)
    return OptimisticModel(trans_tilde, plan.values, plan.policy, epoch_id, plan.converged, plan.iterations, plan.residual)


def contains_true_hoeffding(counts: CountTable, true_trans, delta: float) -> bool:
    """Every (s, a): ||P - P_bar||_1 over S within the Hoeffding radius."""
    dist = np.abs(np.asarray(true_trans) - empirical_transitions(counts)).sum(axis=2)
    radius = hoeffding_radius(counts.N, counts.num_states, counts.num_actions, delta)
    return bool(np.all(dist <= radius))


def contains_true_bernstein(counts: CountTable, true_trans, delta: float) -> bool:
    """Every (s, a, s') with s' in S + {g}: |P - P_bar| <= 28 A + 4 sqrt(P_bar A)."""
    true_trans = np.asarray(true_trans)
    p_true = np.concatenate([true_trans, (1.0 - true_trans.sum(axis=2))[..., None]], axis=2)
    p_bar = counts.N3 / _n_plus(counts.N)[..., None]
    # unvisited pairs have an all-zero empirical row, goal slot included
    width = bernstein_width(counts.N, counts.num_states, counts.num_actions, delta)[..., None]
    return bool(np.all(np.abs(p_true - p_bar) <= bernstein_bound(p_bar, width)))


def bernstein_coverage_monte_carlo(
    rows,
    num_runs: int = 200,
    horizon: int = 10_000,
    delta: float = 0.1,
    num_states: int | None = None,
    num_actions: int = 2,
    seed: int = 0,
) -> np.ndarray:
    """Per run: did the entrywise Bernstein bound hold at every sample prefix?

    ``rows`` is a (R, m) array of categorical distributions (last entry may
    be read as the goal).  For each run, every row is sampled ``horizon``
    times and the bound is checked for all prefixes n = 1..horizon and all
    entries.  ``num_states`` defaults to m - 1 (goal excluded).
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    R, m = rows.shape
    S = m - 1 if num_states is None else num_states
    rng = np.random.default_rng(seed)
    n = np.arange(1, horizon + 1, dtype=np.float64)
    width = np.log(S * num_actions * n / delta) / n
    ok = np.ones(num_runs, dtype=bool)
    for run in range(num_runs):
        for r in range(R):
            draws = rng.choice(m, size=horizon, p=rows[r])
            hits = np.zeros((horizon, m))
            hits[np.arange(horizon), draws] = 1.0
            p_bar = np.cumsum(hits, axis=0) / n[:, None]
            bound = bernstein_bound(p_bar, width[:, None])
            if np.any(np.abs(rows[r] - p_bar) > bound):
                ok[run] = False
                break
    return ok
