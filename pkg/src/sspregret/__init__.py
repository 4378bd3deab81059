"""Regret minimisation for stochastic shortest path: optimistic learners,
exact planning, lower-bound instances, and a seeded experiment harness."""
from .confidence import (
    CountTable,
    OptimisticModel,
    bernstein_optimistic,
    contains_true_bernstein,
    contains_true_hoeffding,
    empirical_transitions,
    extended_value_iteration,
    hoeffding_radius,
    inner_optimistic_distribution,
    optimistic_plan_bernstein,
)
from .harness import ExperimentConfig, RegretLedger, coverage_report, fit_scaling, run_experiment, run_sweep
from .learners import Bernstein, HoeffdingKnownB, HoeffdingUnknownB, make_learner, run_episode
from .model import (
    EpisodeRecord,
    SspInstance,
    make_chain,
    make_multistate_lb,
    make_random_instance,
    make_two_state_lb,
    perturb_costs,
    sample_transition,
)
from .planner import (
    PlanResult,
    bellman_backup,
    evaluate_policy,
    exhaustive_optimal,
    expected_time,
    is_proper,
    proper_policy_exists,
    value_iteration,
)

__version__ = "0.1.0"
