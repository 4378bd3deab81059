#!/usr/bin/env python3
"""Side-by-side timing of the numpy and numba kernel backends.

Usage:
    python benchmarks/bench_kernels.py [--repeats N] [--states S] [--actions A]

Also runs one short Hoeffding learner pass end to end under each backend
(in a subprocess, since the backend is fixed at import time).
"""
from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from sspregret import _kernels_numpy as numpy_backend
from sspregret._accel import HAS_NUMBA
from sspregret.model import make_random_instance


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def kernel_cases(S, A, seed=0):
    inst = make_random_instance(seed, S, A, 0.02)
    cost, trans = np.ascontiguousarray(inst.cost), np.ascontiguousarray(inst.trans)
    radius = np.random.default_rng(seed).uniform(0.0, 0.5, size=(S, A))
    return {
        "value_iteration": lambda b: b.value_iteration(cost, trans, np.zeros(S), 1e-10, 10**6, 1e9),
        "extended_value_iteration": lambda b: b.extended_value_iteration(cost, trans, radius, 1e-8, 10**5, 1e9),
        "policy_evaluation": lambda b: b.policy_evaluation(np.ascontiguousarray(cost[:, 0]),
                                                           np.ascontiguousarray(trans[:, 0]), 1e-10, 10**6),
    }


LEARNER_SNIPPET = """
import time
from sspregret.harness import ExperimentConfig, run_experiment
from sspregret.model import make_random_instance
inst = make_random_instance(0, {S}, {A}, 0.05, 0.1)
cfg = ExperimentConfig(instance=inst, learner="hoeffding", k={K}, seeds=[0], monitor=False)
run_experiment(ExperimentConfig(instance=inst, learner="hoeffding", k=2, seeds=[0], monitor=False))
t0 = time.perf_counter()
run_experiment(cfg)
print(time.perf_counter() - t0)
"""


def learner_time(disable_numba: bool, S, A, K) -> float:
    env = dict(os.environ)
    if disable_numba:
        env["SSPREGRET_DISABLE_NUMBA"] = "1"
    else:
        env.pop("SSPREGRET_DISABLE_NUMBA", None)
    out = subprocess.run([sys.executable, "-c", LEARNER_SNIPPET.format(S=S, A=A, K=K)],
                         env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--states", type=int, default=20)
    p.add_argument("--actions", type=int, default=4)
    p.add_argument("--episodes", type=int, default=1000)
    args = p.parse_args(argv)
    if not HAS_NUMBA:
        print("numba is not installed; nothing to compare")
        return 1
    from sspregret import _kernels_numba as numba_backend

    cases = kernel_cases(args.states, args.actions)
    for fn in cases.values():  # compile outside the timing
        fn(numba_backend)

    print(f"kernels, |S|={args.states} |A|={args.actions}, best of {args.repeats}")
    print(f"{'kernel':<26}  {'numpy (ms)':>11}  {'numba (ms)':>11}  {'speedup':>8}  {'max |diff|':>10}")
    for name, fn in cases.items():
        t_np = best_of(lambda: fn(numpy_backend), args.repeats)
        t_nb = best_of(lambda: fn(numba_backend), args.repeats)
        diff = float(np.max(np.abs(np.asarray(fn(numpy_backend)[0]) - np.asarray(fn(numba_backend)[0]))))
        print(f"{name:<26}  {1e3 * t_np:>11.3f}  {1e3 * t_nb:>11.3f}  {t_np / t_nb:>7.1f}x  {diff:>10.1e}")

    S, A, K = 5, 3, args.episodes
    t_np = learner_time(True, S, A, K)
    t_nb = learner_time(False, S, A, K)
    print(f"\nhoeffding learner, |S|={S} |A|={A} K={K}: numpy {t_np:.2f}s  numba {t_nb:.2f}s  "
          f"speedup {t_np / t_nb:.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
