"""Goal-augmented tabular SSP instances, sampling, and instance generators.

The goal state is never stored explicitly: the probability of reaching it
from ``(s, a)`` is the row residual ``1 - trans[s, a].sum()``.  In sampled
trajectories the goal is the sentinel index ``num_states``.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import CorruptedInstance, ImproperInstance, InvalidArgument

BUILD_TOL = 1e-12
USE_TOL = 1e-9


def _frozen(x, dtype=np.float64) -> np.ndarray:
    arr = np.array(x, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SspInstance:
    """Tabular SSP with costs in [0, 1] and an implicit absorbing goal."""

    cost: np.ndarray
    trans: np.ndarray
    init_dist: np.ndarray
    _cdf: list = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        cost = _frozen(self.cost)
        trans = _frozen(self.trans)
        if cost.ndim != 2 or cost.shape[0] < 1 or cost.shape[1] < 1:
            raise InvalidArgument(f"cost must be a non-empty (S, A) table, got shape {cost.shape}")
        S, A = cost.shape
        if trans.shape != (S, A, S):
            raise InvalidArgument(f"trans must have shape {(S, A, S)}, got {trans.shape}")
        init = _frozen(self.init_dist)
        if init.shape != (S,):
            raise InvalidArgument(f"init_dist must have shape {(S,)}, got {init.shape}")
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "trans", trans)
        object.__setattr__(self, "init_dist", init)
        self.validate()

    @property
    def num_states(self) -> int:
        return self.cost.shape[0]

    @property
    def num_actions(self) -> int:
        return self.cost.shape[1]

    @property
    def goal(self) -> int:
        """Sentinel index used for the goal in samples and count tables."""
        return self.num_states

    @property
    def goal_prob(self) -> np.ndarray:
        return 1.0 - self.trans.sum(axis=2)

    def full_trans(self) -> np.ndarray:
        """Transition table over S + {g}; the last column is the goal."""
        g = np.clip(self.goal_prob, 0.0, 1.0)[..., None]
        return np.concatenate([self.trans, g], axis=2)

    def validate(self, tol: float = BUILD_TOL) -> None:
        if not np.all(np.isfinite(self.cost)) or self.cost.min() < 0 or self.cost.max() > 1:
            raise InvalidArgument("costs must lie in [0, 1]")
        if not np.all(np.isfinite(self.trans)) or self.trans.min() < 0 or self.trans.max() > 1:
            raise InvalidArgument("transition entries must lie in [0, 1]")
        worst = float(self.trans.sum(axis=2).max())
        if worst > 1.0 + tol:
            raise InvalidArgument(f"transition row sums to {worst!r} > 1")
        if self.init_dist.min() < 0 or abs(self.init_dist.sum() - 1.0) > tol:
            raise InvalidArgument("init_dist must be a probability vector")
        from .planner import proper_policy_exists

        if not proper_policy_exists(self):
            raise ImproperInstance("no proper policy exists: goal unreachable from some state")

    def with_costs(self, cost) -> "SspInstance":
        return replace(self, cost=cost)

    def start_state(self, rng: np.random.Generator) -> int:
        init = self.init_dist
        nz = np.flatnonzero(init)
        if nz.size == 1:
            return int(nz[0])
        u = rng.random()
        return min(int(np.searchsorted(np.cumsum(init), u, side="right")), self.num_states - 1)

    def _cdf_rows(self) -> list:
        if self._cdf is None:
            cum = np.cumsum(self.trans, axis=2)
            if cum.size and cum[..., -1].max() > 1.0 + USE_TOL:
                raise CorruptedInstance("transition row sums exceed 1")
            rows = [[cum[s, a].tolist() for a in range(self.num_actions)] for s in range(self.num_states)]
            object.__setattr__(self, "_cdf", rows)
        return self._cdf


def sample_transition(instance: SspInstance, s: int, a: int, rng: np.random.Generator) -> int:
    """Draw the next state by inverse CDF over (0, ..., S-1, goal)."""
    cdf = instance._cdf_rows()[s][a]
    return bisect.bisect_right(cdf, rng.random())


def perturb_costs(instance: SspInstance, eps: float) -> SspInstance:
    if not 0.0 <= eps <= 1.0:
        raise InvalidArgument(f"eps must lie in [0, 1], got {eps}")
    return instance.with_costs(np.maximum(instance.cost, eps))


def _point_mass(n: int, i: int = 0) -> np.ndarray:
    d = np.zeros(n)
    d[i] = 1.0
    return d


def _check_lb_args(num_actions, b_star, eps_gap):
    if num_actions < 2:
        raise InvalidArgument("lower-bound instances need at least 2 actions")
    if not b_star >= 2:
        raise InvalidArgument(f"b_star must be >= 2, got {b_star}")
    if not 0.0 < eps_gap < 0.125:
        raise InvalidArgument(f"eps_gap must lie in (0, 1/8), got {eps_gap}")


def make_two_state_lb(num_actions: int, b_star: float, eps_gap: float, special: int = 0) -> SspInstance:
    """One non-goal state with unit costs; only ``special`` reaches the goal w.p. 1/b_star."""
    _check_lb_args(num_actions, b_star, eps_gap)
    if not 0 <= special < num_actions:
        raise InvalidArgument(f"special action {special} out of range")
    stay = np.full(num_actions, 1.0 - (1.0 - eps_gap) / b_star)
    stay[special] = 1.0 - 1.0 / b_star
    return SspInstance(
        cost=np.ones((1, num_actions)),
        trans=stay.reshape(1, num_actions, 1),
        init_dist=_point_mass(1),
    )


def make_multistate_lb(num_states: int, num_actions: int, b_star: float, eps_gap: float, seed: int) -> SspInstance:
    """Independent copies of the two-state gadget, one per state, uniform start.

    Each state only self-loops or exits to the goal; its special action is
    drawn uniformly from ``seed``.
    """
    _check_lb_args(num_actions, b_star, eps_gap)
    if num_states < 1:
        raise InvalidArgument("num_states must be positive")
    rng = np.random.default_rng(seed)
    specials = rng.integers(0, num_actions, size=num_states)
    trans = np.zeros((num_states, num_actions, num_states))
    for s in range(num_states):
        trans[s, :, s] = 1.0 - (1.0 - eps_gap) / b_star
        trans[s, specials[s], s] = 1.0 - 1.0 / b_star
    return SspInstance(
        cost=np.ones((num_states, num_actions)),
        trans=trans,
        init_dist=np.full(num_states, 1.0 / num_states),
    )


def special_actions(instance: SspInstance) -> np.ndarray:
    """Per-state action with the largest goal probability (the LB special action)."""
    return np.argmax(instance.goal_prob, axis=1)


def make_random_instance(
    seed: int,
    num_states: int,
    num_actions: int,
    min_goal_prob: float = 0.05,
    cost_floor: float = 0.0,
) -> SspInstance:
    """Random instance in which every policy is proper.

    Rows are Dirichlet(1, ..., 1) over S + {g}; a goal entry below
    ``min_goal_prob`` is raised to it and the in-S mass rescaled to fit.
    """
    if not 0.0 < min_goal_prob <= 1.0:
        raise InvalidArgument(f"min_goal_prob must lie in (0, 1], got {min_goal_prob}")
    if not 0.0 <= cost_floor <= 1.0:
        raise InvalidArgument(f"cost_floor must lie in [0, 1], got {cost_floor}")
    if num_states < 1 or num_actions < 1:
        raise InvalidArgument("num_states and num_actions must be positive")
    rng = np.random.default_rng(seed)
    rows = rng.dirichlet(np.ones(num_states + 1), size=(num_states, num_actions))
    goal = rows[..., -1]
    trans = rows[..., :-1]
    low = goal < min_goal_prob
    inside = trans.sum(axis=2)
    scale = np.where(low, (1.0 - min_goal_prob) / np.where(inside > 0, inside, 1.0), 1.0)
    trans = trans * scale[..., None]
    cost = rng.uniform(cost_floor, 1.0, size=(num_states, num_actions))
    return SspInstance(cost=cost, trans=trans, init_dist=_point_mass(num_states))


def make_chain(length: int) -> SspInstance:
    """Deterministic chain 0 -> 1 -> ... -> goal with unit costs and one action."""
    if length < 1:
        raise InvalidArgument("chain length must be positive")
    trans = np.zeros((length, 1, length))
    for s in range(length - 1):
        trans[s, 0, s + 1] = 1.0
    return SspInstance(cost=np.ones((length, 1)), trans=trans, init_dist=_point_mass(length))


@dataclass
class EpisodeRecord:
    steps: list = field(default_factory=list)  # (s, a, cost, s_next); may be left empty
    total_cost: float = 0.0
    reached_goal: bool = False
    length: int = 0
