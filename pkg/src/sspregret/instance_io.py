"""JSON instance files and named generators.

File layout (all arrays flat, row-major)::

    {"num_states": S, "num_actions": A,
     "init_dist": [S floats],
     "cost": [S*A floats],
     "trans": [S*A*S floats]}
"""
from __future__ import annotations

import json

import numpy as np

from .errors import InvalidArgument
from .model import (
    SspInstance,
    make_chain,
    make_multistate_lb,
    make_random_instance,
    make_two_state_lb,
)

REQUIRED = ("num_states", "num_actions", "init_dist", "cost", "trans")


def instance_to_dict(instance: SspInstance) -> dict:
    # float() repr round-trips exactly (17 significant digits)
    return {
        "num_states": instance.num_states,
        "num_actions": instance.num_actions,
        "init_dist": [float(x) for x in instance.init_dist],
        "cost": [float(x) for x in instance.cost.ravel()],
        "trans": [float(x) for x in instance.trans.ravel()],
    }


def instance_from_dict(data: dict) -> SspInstance:
    missing = [k for k in REQUIRED if k not in data]
    if missing:
        raise InvalidArgument(f"instance file missing fields: {missing}")
    S, A = int(data["num_states"]), int(data["num_actions"])
    try:
        init = np.asarray(data["init_dist"], dtype=np.float64)
        cost = np.asarray(data["cost"], dtype=np.float64)
        trans = np.asarray(data["trans"], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise InvalidArgument(f"non-numeric instance data: {exc}") from None
    if init.size != S or cost.size != S * A or trans.size != S * A * S:
        raise InvalidArgument("array lengths do not match num_states/num_actions")
    return SspInstance(cost=cost.reshape(S, A), trans=trans.reshape(S, A, S), init_dist=init)


def save_instance(instance: SspInstance, path) -> None:
    with open(path, "w") as f:
        json.dump(instance_to_dict(instance), f, indent=1)
        f.write("\n")


def load_instance(path) -> SspInstance:
    try:
        with open(path) as f:
            data = json.load(f)
    except json.JSONDecodeError as exc:
        raise InvalidArgument(f"{path}: not a valid instance file ({exc})") from None
    if not isinstance(data, dict):
        raise InvalidArgument(f"{path}: expected a JSON object")
    return instance_from_dict(data)


GENERATORS = {
    "two-state-lb": lambda p: make_two_state_lb(
        int(p.get("actions", 16)), float(p.get("b_star", 4.0)), float(p.get("eps_gap", 0.1)), int(p.get("special", 0))
    ),
    "lb-multi": lambda p: make_multistate_lb(
        int(p.get("states", 2)), int(p.get("actions", 16)), float(p.get("b_star", 4.0)),
        float(p.get("eps_gap", 0.1)), int(p.get("instance_seed", 0)),
    ),
    "random": lambda p: make_random_instance(
        int(p.get("instance_seed", 0)), int(p.get("states", 5)), int(p.get("actions", 3)),
        float(p.get("min_goal_prob", 0.05)), float(p.get("cost_floor", 0.0)),
    ),
    "chain": lambda p: make_chain(int(p.get("len", 3))),
}


def build_instance(spec: dict) -> SspInstance:
    """``{"file": path}`` or ``{"gen": name, **params}``."""
    if spec.get("file"):
        return load_instance(spec["file"])
    gen = spec.get("gen")
    if gen not in GENERATORS:
        raise InvalidArgument(f"unknown generator {gen!r}; expected one of {sorted(GENERATORS)} or a file")
    return GENERATORS[gen](spec)
