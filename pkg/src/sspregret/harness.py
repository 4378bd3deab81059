"""Seeded regret experiments: run learners for K episodes, track regret
against the best proper policy, monitor confidence/optimism invariants,
aggregate over seeds and fit log-log scaling slopes."""
from __future__ import annotations

import csv
import io
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import planner
from .confidence import contains_true_bernstein, contains_true_hoeffding
from .errors import ImproperInstance, InvalidArgument
from .instance_io import build_instance
from .learners import make_learner, run_episode
from .model import SspInstance, perturb_costs

log = logging.getLogger(__name__)

OPTIMISM_TOL = 1e-6
TRANS_TOL = 1e-12
EPS0 = 1e-8
DEFAULT_STEP_CAP = 1_000_000
MAX_CAPPED = 3
REGRET_COLUMNS = ["seed", "episode", "episode_cost", "cum_cost", "regret", "capped"]
EVENT_COLUMNS = ["episode", "t", "s", "a", "cost", "s_next", "interval_or_epoch", "recompute_flag", "containment_flag"]


def fmt(x: float) -> str:
    return f"{x:.12g}"


def resolve_eps(perturb, num_states: int, num_actions: int, k: int) -> float:
    """Cost floor for a perturbation preset; 0 means no perturbation."""
    if perturb in (None, "none"):
        return 0.0
    base = num_states**2 * num_actions / k
    if perturb == "corollary1":
        eps = float(np.cbrt(base))
    elif perturb == "corollary2":
        eps = float(base)
    else:
        try:
            eps = float(perturb)
        except (TypeError, ValueError):
            raise InvalidArgument(f"unknown perturbation {perturb!r}") from None
        if not 0.0 <= eps <= 1.0:
            raise InvalidArgument(f"perturbation eps must lie in [0, 1], got {eps}")
    return min(eps, 1.0)


@dataclass
class ExperimentConfig:
    instance: dict | SspInstance
    learner: str = "bernstein"
    delta: float = 0.1
    k: int = 1000
    seeds: list = field(default_factory=lambda: [0])
    b_star: float | None = None
    c_min: float | None = None
    perturb: str | float | None = None
    step_cap: int = DEFAULT_STEP_CAP
    max_capped: int = MAX_CAPPED
    monitor: bool = True
    record_events: bool = False
    workers: int = 1
    out_dir: str | None = None

    def validate(self):
        if not 0.0 < self.delta < 1.0:
            raise InvalidArgument(f"delta must lie in (0, 1), got {self.delta}")
        if self.k < 1:
            raise InvalidArgument("k must be >= 1")
        if not self.seeds:
            raise InvalidArgument("at least one seed is required")
        if self.learner == "hoeffding-known-b" and self.b_star is None:
            raise InvalidArgument("hoeffding-known-b requires b_star")


@dataclass
class RegretLedger:
    seed: int
    j_star_init: float
    episode_cost: np.ndarray
    capped: np.ndarray
    containment_flags: list = field(default_factory=list)
    optimism_violations: int = 0
    expensive_action_violations: int = 0
    recomputes: int = 0
    bookkeeping_violations: int = 0
    total_steps: int = 0
    aborted: bool = False
    b_tilde: float | None = None
    events: list = field(default_factory=list)

    @property
    def cum_cost(self) -> np.ndarray:
        return np.cumsum(self.episode_cost)

    @property
    def regret(self) -> np.ndarray:
        k = np.arange(1, len(self.episode_cost) + 1)
        return self.cum_cost - k * self.j_star_init

    def regret_at(self, k: int) -> float:
        return float(self.cum_cost[k - 1] - k * self.j_star_init)

    @property
    def capped_episodes(self) -> int:
        return int(self.capped.sum())

    @property
    def containment_violations(self) -> int:
        return sum(1 for f in self.containment_flags if not f)


@dataclass
class Context:
    """Per-experiment quantities shared by all seed replicas."""

    instance: SspInstance
    learner_cost: np.ndarray
    eps: float
    j_star_init: float
    j_star_learner: np.ndarray


def prepare(config: ExperimentConfig) -> Context:
    config.validate()
    instance = config.instance if isinstance(config.instance, SspInstance) else build_instance(config.instance)
    if not planner.proper_policy_exists(instance):
        raise ImproperInstance("instance has no proper policy")
    eps = resolve_eps(config.perturb, instance.num_states, instance.num_actions, config.k)
    learner_instance = perturb_costs(instance, eps) if eps > 0 else instance
    comparator = planner.optimal_proper(instance, eps0=EPS0)
    j_star_init = float(instance.init_dist @ comparator.values)
    j_star_learner = planner.optimal_proper(learner_instance, eps0=EPS0).values
    return Context(instance, np.array(learner_instance.cost), eps, j_star_init, j_star_learner)


def _check_recompute(learner, ctx: Context, delta: float, ledger: RegretLedger) -> bool:
    true_trans = ctx.instance.trans
    if learner.kind == "bernstein":
        held = contains_true_bernstein(learner.counts, true_trans, delta)
    else:
        held = contains_true_hoeffding(learner.counts, true_trans, delta)
    ledger.containment_flags.append(held)
    if held:
        model = learner.model
        if np.any(model.values > ctx.j_star_learner + OPTIMISM_TOL):
            ledger.optimism_violations += 1
        if learner.kind == "bernstein" and np.any(model.trans_tilde > true_trans + TRANS_TOL):
            ledger.optimism_violations += 1
        if learner.kind == "hoeffding":
            idx = np.arange(learner.num_states)
            chosen = learner.cost[idx, model.policy]
            if np.any(chosen > model.values + OPTIMISM_TOL) or np.any(model.values > ctx.j_star_learner.max() + OPTIMISM_TOL):
                ledger.expensive_action_violations += 1
    return held


def run_seed(config: ExperimentConfig, ctx: Context, seed: int, k: int | None = None) -> RegretLedger:
    k = config.k if k is None else k
    instance = ctx.instance
    learner = make_learner(config.learner, instance.num_states, instance.num_actions, ctx.learner_cost,
                           config.delta, b_star=config.b_star,
                           c_min=config.c_min if config.c_min is not None else (ctx.eps or None))
    rng = np.random.default_rng(seed)
    ledger = RegretLedger(seed, ctx.j_star_init, np.zeros(k), np.zeros(k, dtype=bool))
    if config.monitor:
        _check_recompute(learner, ctx, config.delta, ledger)
    episode = 0

    def on_step(s, a, c, s_next, recomputed):
        flag = ""
        if recomputed and config.monitor:
            flag = int(_check_recompute(learner, ctx, config.delta, ledger))
        if config.record_events:
            ledger.events.append((episode + 1, learner.t, s, a, c, s_next, learner.segment, int(recomputed), flag))

    hook = on_step if (config.monitor or config.record_events) else None
    for episode in range(k):
        record = run_episode(learner, instance, rng, config.step_cap, on_step=hook, keep_steps=False)
        ledger.episode_cost[episode] = record.total_cost
        ledger.capped[episode] = not record.reached_goal
        ledger.total_steps += record.length
        if ledger.capped_episodes >= config.max_capped:
            log.warning("seed %d aborted after %d capped episodes", seed, ledger.capped_episodes)
            ledger.aborted = True
            ledger.episode_cost = ledger.episode_cost[: episode + 1]
            ledger.capped = ledger.capped[: episode + 1]
            break
    ledger.recomputes = learner.recomputes
    ledger.bookkeeping_violations = learner.bookkeeping_violations
    if learner.counts.total != learner.t or ledger.total_steps != learner.t:
        ledger.bookkeeping_violations += 1
    if hasattr(learner, "doublings"):
        ledger.b_tilde = learner.b_star
    return ledger


def _run_seed_job(args):
    config, ctx, seed = args
    return run_seed(config, ctx, seed)


@dataclass
class AggregateRow:
    k: int
    mean: float
    std: float
    min: float
    max: float
    n: int


@dataclass
class ScalingFit:
    slope: float
    intercept: float
    used_k: list
    excluded_k: list


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    ledgers: list
    eps: float
    j_star_init: float
    aggregate: list
    fit: ScalingFit | None = None

    @property
    def aborted(self) -> bool:
        return any(l.aborted for l in self.ledgers)


def default_k_grid(k: int) -> list:
    grid = [2**j for j in range(int(math.log2(k)) + 1) if 2**j <= k]
    if grid[-1] != k:
        grid.append(k)
    return grid


def aggregate(ledgers, k_grid) -> list:
    """Mean/std/min/max of regret at each K over seeds that completed K episodes without capping."""
    rows = []
    for k in k_grid:
        vals = [l.regret_at(k) for l in ledgers if len(l.episode_cost) >= k and not l.capped[:k].any()]
        if not vals:
            continue
        arr = np.array(vals)
        rows.append(AggregateRow(k, float(arr.mean()), float(arr.std()), float(arr.min()), float(arr.max()), len(vals)))
    return rows


def fit_scaling(ks, mean_regret) -> ScalingFit:
    """OLS slope of log(regret) against log(K); non-positive regrets are excluded."""
    ks = np.asarray(ks, dtype=np.float64)
    r = np.asarray(mean_regret, dtype=np.float64)
    keep = r > 0
    used, excluded = ks[keep], ks[~keep]
    if used.size < 2:
        return ScalingFit(float("nan"), float("nan"), used.astype(int).tolist(), excluded.astype(int).tolist())
    slope, intercept = np.polyfit(np.log(used), np.log(r[keep]), 1)
    return ScalingFit(float(slope), float(intercept), used.astype(int).tolist(), excluded.astype(int).tolist())


@dataclass
class CoverageReport:
    per_run: list
    zero_violation_fraction: float


def coverage_report(runs) -> CoverageReport:
    """``runs``: per-run sequences of containment flags (one per recompute)."""
    per_run = [float(np.mean(f)) if len(f) else 1.0 for f in runs]
    clean = [all(f) for f in runs]
    return CoverageReport(per_run, float(np.mean(clean)) if clean else float("nan"))


def run_experiment(config: ExperimentConfig, k_grid=None) -> ExperimentResult:
    ctx = prepare(config)
    seeds = list(config.seeds)
    if config.workers > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            ledgers = list(pool.map(_run_seed_job, [(config, ctx, s) for s in seeds]))
    else:
        ledgers = [run_seed(config, ctx, s) for s in seeds]
    grid = default_k_grid(config.k) if k_grid is None else list(k_grid)
    rows = aggregate(ledgers, grid)
    fit = fit_scaling([r.k for r in rows], [r.mean for r in rows]) if len(rows) >= 2 else None
    result = ExperimentResult(config, ledgers, ctx.eps, ctx.j_star_init, rows, fit)
    if config.out_dir:
        write_outputs(result, config.out_dir)
    return result


def run_sweep(config: ExperimentConfig, k_grid) -> ExperimentResult:
    """Regret over a K grid.

    Learners never look at K, so with a K-independent cost perturbation the
    run at K is an exact prefix of the run at max(K) for the same seed; one
    run is made and read at every grid point.  Presets that tie the
    perturbation to K get a separate run per grid point.
    """
    k_grid = sorted(int(k) for k in k_grid)
    if config.perturb not in ("corollary1", "corollary2"):
        cfg = replace(config, k=k_grid[-1], out_dir=None)
        result = run_experiment(cfg, k_grid)
        result.config = config
    else:
        ledgers, rows = [], []
        eps = None
        for k in k_grid:
            sub = run_experiment(replace(config, k=k, out_dir=None), [k])
            ledgers.extend(sub.ledgers)
            rows.extend(sub.aggregate)
            eps = sub.eps
        result = ExperimentResult(config, ledgers, eps, sub.j_star_init, rows)
    result.fit = fit_scaling([r.k for r in result.aggregate], [r.mean for r in result.aggregate])
    if config.out_dir:
        write_outputs(result, config.out_dir)
    return result


def regret_csv(ledgers) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REGRET_COLUMNS)
    for l in ledgers:
        cum = l.cum_cost
        reg = l.regret
        for i in range(len(l.episode_cost)):
            w.writerow([l.seed, i + 1, fmt(l.episode_cost[i]), fmt(cum[i]), fmt(reg[i]), int(l.capped[i])])
    return buf.getvalue()


def events_csv(ledgers) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["seed"] + EVENT_COLUMNS)
    for l in ledgers:
        for ev in l.events:
            w.writerow([l.seed, *ev[:4], fmt(ev[4]), *ev[5:]])
    return buf.getvalue()


def report_text(result: ExperimentResult) -> str:
    cfg = result.config
    lines = [
        f"learner: {cfg.learner}  delta: {cfg.delta}  seeds: {len(cfg.seeds)}  K: {cfg.k}",
        f"perturbation eps: {fmt(result.eps)}",
        f"J*(start) comparator: {fmt(result.j_star_init)}",
        "",
        f"{'K':>8}  {'mean_regret':>16}  {'std':>14}  {'min':>14}  {'max':>14}  {'n':>3}",
    ]
    for r in result.aggregate:
        lines.append(f"{r.k:>8}  {fmt(r.mean):>16}  {fmt(r.std):>14}  {fmt(r.min):>14}  {fmt(r.max):>14}  {r.n:>3}")
    lines.append("")
    if result.fit is not None:
        lines.append(f"fitted slope: {fmt(result.fit.slope)}")
        if result.fit.excluded_k:
            lines.append(f"excluded K (non-positive mean regret): {result.fit.excluded_k}")
    ls = result.ledgers
    lines += [
        f"capped episodes: {sum(l.capped_episodes for l in ls)}",
        f"aborted runs: {sum(l.aborted for l in ls)}",
        f"recomputes: {sum(l.recomputes for l in ls)}",
        f"containment violations: {sum(l.containment_violations for l in ls)}",
        f"runs with zero containment violations: {coverage_report([l.containment_flags for l in ls]).zero_violation_fraction:.4f}",
        f"optimism violations: {sum(l.optimism_violations for l in ls)}",
        f"bookkeeping violations: {sum(l.bookkeeping_violations for l in ls)}",
    ]
    return "\n".join(lines) + "\n"


def write_outputs(result: ExperimentResult, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "regret.csv"), "w", newline="") as f:
        f.write(regret_csv(result.ledgers))
    if result.config.record_events:
        with open(os.path.join(out_dir, "events.csv"), "w", newline="") as f:
            f.write(events_csv(result.ledgers))
    with open(os.path.join(out_dir, "report.txt"), "w") as f:
        f.write(report_text(result))
