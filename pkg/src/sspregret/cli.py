"""Command-line entry point.

Exit codes: 0 success, 1 usage/validation error, 2 numeric non-convergence,
3 aborted run.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys

import numpy as np

from . import harness, oracles, planner
from .errors import InvalidArgument, SspError
from .instance_io import build_instance

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_ABORTED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def parse_seeds(text: str) -> list[int]:
    """``"0..9"`` (inclusive), ``"1,2,5"``, or a mix such as ``"0..3,7"``."""
    seeds: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            seeds.extend(range(int(lo), int(hi) + 1))
        else:
            seeds.append(int(part))
    if not seeds:
        raise InvalidArgument("no seeds given")
    return seeds


def parse_int_list(text: str) -> list[int]:
    return [int(x) for x in str(text).split(",") if x.strip()]


def _instance_flags(p):
    g = p.add_argument_group("instance")
    g.add_argument("--file", help="instance file (JSON)")
    g.add_argument("--gen", choices=["two-state-lb", "lb-multi", "random", "chain"])
    g.add_argument("--states", type=int, default=None)
    g.add_argument("--actions", type=int, default=None)
    g.add_argument("--b-star", type=float, default=None,
                   help="lower-bound instance parameter; also the known bound for hoeffding-known-b")
    g.add_argument("--eps-gap", type=float, default=None)
    g.add_argument("--special", type=int, default=None)
    g.add_argument("--instance-seed", type=int, default=None)
    g.add_argument("--min-goal-prob", type=float, default=None)
    g.add_argument("--cost-floor", type=float, default=None)
    g.add_argument("--len", type=int, default=None)


def _learner_flags(p, default_gen=None):
    p.add_argument("--learner", choices=["hoeffding-known-b", "hoeffding", "bernstein"], default="bernstein")
    p.add_argument("--k", type=int, default=1000)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--seeds", default="0")
    p.add_argument("--perturb", default="none", help="none | corollary1 | corollary2 | <eps>")
    p.add_argument("--c-min", type=float, default=None)
    p.add_argument("--step-cap", type=int, default=harness.DEFAULT_STEP_CAP)
    p.add_argument("--events", action="store_true", help="also write events.csv")
    p.add_argument("--no-monitor", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sspregret", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("plan", help="solve a known instance")
    _instance_flags(p)
    p.add_argument("--tol", type=float, default=planner.DEFAULT_TOL)
    p.add_argument("--max-iter", type=int, default=planner.DEFAULT_MAX_ITER)
    p.add_argument("--json", action="store_true", help="print structured output")
    p.add_argument("--config")

    for name, helptext in (("run", "run a learner for K episodes"),
                           ("lb", "run a learner on the lower-bound family"),
                           ("sweep", "run over a K grid and fit the regret slope")):
        p = sub.add_parser(name, help=helptext)
        _instance_flags(p)
        _learner_flags(p)
        if name == "sweep":
            p.add_argument("--k-grid", default="128,256,512,1024")
        p.add_argument("--config")

    p = sub.add_parser("oracle-check", help="run the oracle suites")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--points", type=int, default=10_000)
    p.add_argument("--corrupt-greedy", action="store_true", help=argparse.SUPPRESS)
    p.add_argument("--config")
    return parser


def parse_args(argv):
    """Parse flags; values from ``--config`` fill in anything not given explicitly."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        with open(args.config) as f:
            cfg = json.load(f)
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(k.replace("-", "_") for k in cfg) - known)
        if unknown:
            raise UsageError(f"unknown config keys: {unknown}")
        sub.set_defaults(**{k.replace("-", "_"): v for k, v in cfg.items()})
        args = parser.parse_args(argv)
    return args


def _instance_spec(args, default_gen=None) -> dict:
    if args.file:
        return {"file": args.file}
    gen = args.gen or default_gen
    if gen is None:
        raise UsageError("an instance is required: --file or --gen")
    spec = {"gen": gen}
    for key in ("states", "actions", "b_star", "eps_gap", "special", "instance_seed",
                "min_goal_prob", "cost_floor", "len"):
        val = getattr(args, key)
        if val is not None:
            spec[key] = val
    return spec


def _vec(x) -> str:
    return " ".join(f"{v:.12f}" for v in x)


def cmd_plan(args) -> int:
    instance = build_instance(_instance_spec(args))
    res = planner.polish(instance, planner.value_iteration(instance, tol=args.tol, max_iter=args.max_iter), args.tol)
    j_init = float(instance.init_dist @ res.values)
    if args.json:
        print(json.dumps({
            "values": res.values.tolist(), "policy": res.policy.tolist(), "j_init": j_init,
            "residual": res.residual, "iterations": res.iterations, "converged": res.converged,
        }))
    else:
        width = 12
        print(f"J*(s_init)={j_init:.12f}")
        print(f"{'state':>6}  {'J*':>{width + 8}}  {'action':>6}")
        for s, (v, a) in enumerate(zip(res.values, res.policy)):
            print(f"{s:>6}  {v:>{width + 8}.12f}  {a:>6}")
        print(f"residual: {res.residual:.3e}")
        print(f"iterations: {res.iterations}")
        print(f"converged: {res.converged}")
    return EXIT_OK if res.converged else EXIT_NUMERIC


def _config(args, default_gen=None) -> harness.ExperimentConfig:
    perturb = args.perturb
    if perturb not in ("none", "corollary1", "corollary2"):
        try:
            perturb = float(perturb)
        except ValueError:
            raise UsageError(f"--perturb must be none, corollary1, corollary2 or a number, got {perturb!r}") from None
    if args.learner == "hoeffding-known-b" and args.b_star is None:
        raise UsageError("--learner hoeffding-known-b requires --b-star")
    return harness.ExperimentConfig(
        instance=_instance_spec(args, default_gen),
        learner=args.learner,
        delta=args.delta,
        k=args.k,
        seeds=parse_seeds(args.seeds),
        b_star=args.b_star if args.learner == "hoeffding-known-b" else None,
        c_min=args.c_min,
        perturb=perturb,
        step_cap=args.step_cap,
        monitor=not args.no_monitor,
        record_events=args.events,
        workers=args.workers,
        out_dir=args.out,
    )


def _summary(result) -> None:
    sys.stdout.write(harness.report_text(result))


def cmd_run(args) -> int:
    result = harness.run_experiment(_config(args))
    _summary(result)
    return EXIT_ABORTED if result.aborted else EXIT_OK


def cmd_lb(args) -> int:
    config = _config(args, default_gen="lb-multi")
    result = harness.run_experiment(config)
    inst = build_instance(config.instance)
    b_star = float(np.max(planner.value_iteration(inst).values))
    reference = b_star * math.sqrt(inst.num_states * inst.num_actions * config.k) / 1024
    _summary(result)
    print(f"lower-bound reference B*sqrt(|S||A|K)/1024: {harness.fmt(reference)}")
    return EXIT_ABORTED if result.aborted else EXIT_OK


def cmd_sweep(args) -> int:
    config = _config(args)
    grid = parse_int_list(args.k_grid)
    if not grid or min(grid) < 1:
        raise UsageError("--k-grid needs positive integers")
    result = harness.run_sweep(config, grid)
    _summary(result)
    return EXIT_ABORTED if result.aborted else EXIT_OK


def cmd_oracle_check(args) -> int:
    inner = oracles.corrupted_inner if args.corrupt_greedy else None
    suites = [
        oracles.inner_min_suite(args.trials, args.seed, args.points, inner=inner),
        oracles.planner_suite(args.trials, args.seed),
    ]
    for r in suites:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status}  {r.name}: {r.trials - r.failures}/{r.trials} ok, worst gap {r.worst_gap:.3e}")
    return EXIT_OK if all(r.passed for r in suites) else EXIT_USAGE


COMMANDS = {"plan": cmd_plan, "run": cmd_run, "lb": cmd_lb, "sweep": cmd_sweep, "oracle-check": cmd_oracle_check}


def main(argv=None) -> int:
    try:
        args = parse_args(sys.argv[1:] if argv is None else argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (SspError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
