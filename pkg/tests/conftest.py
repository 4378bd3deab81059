import numpy as np
import pytest

from sspregret import make_random_instance, make_two_state_lb


@pytest.fixture
def lb4():
    return make_two_state_lb(num_actions=16, b_star=4.0, eps_gap=0.1, special=0)


@pytest.fixture
def small_random():
    return make_random_instance(7, 4, 3, min_goal_prob=0.05)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
