"""Online optimistic learners driven one transition at a time.

Each learner exposes ``act(s)`` and ``observe(s, a, cost, s_next)``; the
latter returns True when the optimistic policy was recomputed.  The goal
is the sentinel index ``num_states``.
"""
from __future__ import annotations

import math

import numpy as np

from .confidence import (
    CountTable,
    OptimisticModel,
    extended_value_iteration,
    optimistic_plan_bernstein,
)
from .errors import InvalidArgument, ProtocolViolation
from .model import EpisodeRecord, sample_transition

PLAN_TOL = 1e-8
PLAN_MAX_ITER = 100_000
KNOWN_SCALE = 5000.0
COST_TRIGGER_SCALE = 24.0
KNOWN_ALPHA_BERNSTEIN = 30000.0


class OptimisticLearner:
    kind = "none"

    def __init__(self, num_states: int, num_actions: int, cost, delta: float,
                 tol: float = PLAN_TOL, max_iter: int = PLAN_MAX_ITER):
        if not 0.0 < delta < 1.0:
            raise InvalidArgument(f"delta must lie in (0, 1), got {delta}")
        self.cost = np.array(cost, dtype=np.float64)
        if self.cost.shape != (num_states, num_actions):
            raise InvalidArgument("cost table shape does not match (num_states, num_actions)")
        self.num_states = num_states
        self.num_actions = num_actions
        self.goal = num_states
        self.delta = delta
        self.tol = tol
        self.max_iter = max_iter
        self.counts = CountTable(num_states, num_actions)
        self.t = 0
        self.segment = 1
        self.recomputes = 0
        self.bookkeeping_violations = 0
        self.model = self._plan()
        self.policy = self.model.policy

    def _plan(self) -> OptimisticModel:
        raise NotImplementedError

    def _recompute(self) -> None:
        self.model = self._plan()
        self.policy = self.model.policy
        self.recomputes += 1
        if not self.counts.consistent() or self.counts.total != self.t:
            self.bookkeeping_violations += 1

    def act(self, s: int) -> int:
        return int(self.policy[s])

    def _check(self, s: int, a: int) -> None:
        if a != self.policy[s]:
            raise ProtocolViolation(f"action {a} at state {s} differs from the current policy ({self.policy[s]})")

    def observe(self, s: int, a: int, cost: float, s_next: int) -> bool:
        raise NotImplementedError


class HoeffdingKnownB(OptimisticLearner):
    """L1-ball optimism with a known bound ``b_star`` on the optimal cost-to-go.

    The policy is recomputed whenever the goal is reached or the next state's
    chosen pair has been visited at most 5000 b_star^2 |S| / c_min^2 times.
    """

    kind = "hoeffding"

    def __init__(self, num_states, num_actions, cost, b_star: float, delta: float,
                 c_min: float | None = None, **kw):
        cost = np.asarray(cost, dtype=np.float64)
        self.c_min = float(cost.min()) if c_min is None else float(c_min)
        if self.c_min <= 0:
            raise InvalidArgument("c_min must be positive (perturb the costs first)")
        if b_star <= 0:
            raise InvalidArgument("b_star must be positive")
        self.b_star = float(b_star)
        super().__init__(num_states, num_actions, cost, delta, **kw)

    @property
    def known_threshold(self) -> float:
        return KNOWN_SCALE * self.b_star**2 * self.num_states / self.c_min**2

    def _plan(self):
        return extended_value_iteration(self.counts, self.cost, self.delta, self.tol, self.max_iter,
                                        epoch_id=self.segment)

    def _interval_ends(self, s_next: int) -> bool:
        return s_next == self.goal or self.counts.N[s_next, self.policy[s_next]] <= self.known_threshold

    def observe(self, s, a, cost, s_next):
        self._check(s, a)
        self.counts.add(s, a, s_next)
        self.t += 1
        if self._interval_ends(s_next):
            self.segment += 1
            self._recompute()
            return True
        return False


class HoeffdingUnknownB(HoeffdingKnownB):
    """As ``HoeffdingKnownB`` with a doubling estimate of the bound.

    The estimate starts at ``c_min`` and doubles when the cost accumulated
    in the current interval reaches ``scale * estimate * ln(4 m / delta)``.
    """

    def __init__(self, num_states, num_actions, cost, delta: float, c_min: float | None = None,
                 cost_trigger_scale: float = COST_TRIGGER_SCALE, **kw):
        cost = np.asarray(cost, dtype=np.float64)
        c_min = float(cost.min()) if c_min is None else float(c_min)
        self.cost_trigger_scale = cost_trigger_scale
        self.interval_cost = 0.0
        self.doublings = 0
        super().__init__(num_states, num_actions, cost, b_star=c_min, delta=delta, c_min=c_min, **kw)

    @property
    def b_tilde(self) -> float:
        return self.b_star

    def cost_trigger(self) -> float:
        return self.cost_trigger_scale * self.b_star * math.log(4 * self.segment / self.delta)

    def observe(self, s, a, cost, s_next):
        self._check(s, a)
        self.interval_cost += cost
        self.counts.add(s, a, s_next)
        self.t += 1
        over_budget = self.interval_cost >= self.cost_trigger()
        if over_budget or self._interval_ends(s_next):
            if over_budget:
                self.b_star *= 2.0
                self.doublings += 1
            self.segment += 1
            self.interval_cost = 0.0
            self._recompute()
            return True
        return False


class Bernstein(OptimisticLearner):
    """Per-entry Bernstein optimism, replanning when some pair's visit count doubles."""

    kind = "bernstein"

    def _plan(self):
        return optimistic_plan_bernstein(self.counts, self.cost, self.delta, self.tol, self.max_iter,
                                         epoch_id=self.segment)

    def observe(self, s, a, cost, s_next):
        self._check(s, a)
        c = self.counts
        c.add_delta(s, a, s_next)
        self.t += 1
        if s_next == self.goal:
            return False
        a_next = self.policy[s_next]
        if c.n[s_next, a_next] < c.N[s_next, a_next]:
            return False
        expected_N, expected_N3 = c.N + c.n, c.N3 + c.n3
        c.merge()
        if not (np.array_equal(c.N, expected_N) and np.array_equal(c.N3, expected_N3)):
            self.bookkeeping_violations += 1
        self.segment += 1
        self._recompute()
        return True

    def known_pairs(self, b_star: float, c_min: float, alpha: float = KNOWN_ALPHA_BERNSTEIN) -> np.ndarray:
        """Diagnostic only: pairs past the analysis-side 'known' count."""
        S, A = self.num_states, self.num_actions
        threshold = alpha * b_star * S / c_min * math.log(b_star * S * A / (self.delta * c_min))
        return self.counts.N >= threshold


LEARNERS = {
    "hoeffding-known-b": HoeffdingKnownB,
    "hoeffding": HoeffdingUnknownB,
    "bernstein": Bernstein,
}


def make_learner(name: str, num_states: int, num_actions: int, cost, delta: float,
                 b_star: float | None = None, c_min: float | None = None) -> OptimisticLearner:
    if name == "hoeffding-known-b":
        if b_star is None:
            raise InvalidArgument("hoeffding-known-b requires b_star")
        return HoeffdingKnownB(num_states, num_actions, cost, b_star=b_star, delta=delta, c_min=c_min)
    if name == "hoeffding":
        return HoeffdingUnknownB(num_states, num_actions, cost, delta=delta, c_min=c_min)
    if name == "bernstein":
        return Bernstein(num_states, num_actions, cost, delta)
    raise InvalidArgument(f"unknown learner {name!r}; expected one of {sorted(LEARNERS)}")


def run_episode(learner: OptimisticLearner, instance, rng: np.random.Generator,
                step_cap: int = 1_000_000, on_step=None, keep_steps: bool = True) -> EpisodeRecord:
    """Play one episode from a start drawn from ``instance.init_dist``.

    The learner is charged its own cost table; the record holds the
    instance's costs.  ``on_step(s, a, cost, s_next, recomputed)`` is called
    after every observation.
    """
    if step_cap < 1:
        raise InvalidArgument("step_cap must be >= 1")
    goal = instance.goal
    true_cost = instance.cost
    learner_cost = learner.cost
    record = EpisodeRecord()
    total = 0.0
    length = 0
    s = instance.start_state(rng)
    while length < step_cap:
        a = learner.act(s)
        s_next = sample_transition(instance, s, a, rng)
        recomputed = learner.observe(s, a, float(learner_cost[s, a]), s_next)
        c = float(true_cost[s, a])
        total += c
        length += 1
        if keep_steps:
            record.steps.append((s, a, c, s_next))
        if on_step is not None:
            on_step(s, a, c, s_next, recomputed)
        if s_next == goal:
            record.reached_goal = True
            break
        s = s_next
    record.total_cost = total
    record.length = length
    return record
