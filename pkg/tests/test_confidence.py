import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sspregret import (
    CountTable,
    bernstein_optimistic,
    contains_true_bernstein,
    contains_true_hoeffding,
    empirical_transitions,
    extended_value_iteration,
    hoeffding_radius,
    inner_optimistic_distribution,
    make_random_instance,
    optimistic_plan_bernstein,
    value_iteration,
)
from sspregret.confidence import bernstein_coverage_monte_carlo, bernstein_width
from sspregret.errors import InvalidArgument
from sspregret.harness import coverage_report
from sspregret.model import sample_transition
from sspregret.oracles import lp_inner_min, random_feasible_points

# 50-digit mpmath evaluations
HOEFFDING_N0 = 13.5810151574061949849077026  # 5 sqrt(2 ln 40)
BERN_A = 0.00128992198260901190389244215163  # ln(4e5) / 1e4
BERN_PTILDE = 0.820220248951663336935360755299  # 1 - 28 A - 4 sqrt(A)


def _counts_from_rows(rows, n, rng):
    """Sample ``n`` transitions from every (s, a) row of a (S, A, S) table."""
    S, A = rows.shape[:2]
    full = np.concatenate([rows, 1 - rows.sum(axis=2, keepdims=True)], axis=2)
    N3 = np.zeros((S, A, S + 1), dtype=np.int64)
    for s in range(S):
        for a in range(A):
            N3[s, a] = rng.multinomial(n, full[s, a] / full[s, a].sum())
    return CountTable.from_transitions(N3)


def test_empirical_zero_counts():
    np.testing.assert_array_equal(empirical_transitions(CountTable(2, 2)), 0.0)


def test_empirical_ratio():
    N3 = np.zeros((2, 1, 3), dtype=np.int64)
    N3[0, 0] = [2, 1, 1]
    p = empirical_transitions(CountTable.from_transitions(N3))
    np.testing.assert_array_equal(p[0, 0], [0.5, 0.25])


def test_hoeffding_radius_frozen():
    assert hoeffding_radius(0, 2, 2, 0.1) == pytest.approx(HOEFFDING_N0, rel=1e-14)
    assert hoeffding_radius(1, 2, 2, 0.1) == hoeffding_radius(0, 2, 2, 0.1)


def test_hoeffding_radius_monotone_and_vanishing():
    N = np.arange(1, 10**6, 997)
    r = hoeffding_radius(N, 5, 3, 0.1)
    assert np.all(np.diff(r) <= 0)
    assert hoeffding_radius(10**15, 5, 3, 0.1) < 1e-5


@pytest.mark.parametrize("delta", [0.0, 1.0, -0.5])
def test_radius_rejects_delta(delta):
    with pytest.raises(InvalidArgument):
        hoeffding_radius(5, 2, 2, delta)


def test_bernstein_frozen():
    assert bernstein_width(10_000, 2, 2, 0.1) == pytest.approx(BERN_A, rel=1e-14)
    N3 = np.zeros((2, 2, 3), dtype=np.int64)
    N3[:, :, 2] = 1  # other pairs visited once
    N3[0, 0] = [0, 10_000, 0]
    P = bernstein_optimistic(CountTable.from_transitions(N3), 0.1)
    assert P[0, 0, 1] == pytest.approx(BERN_PTILDE, rel=1e-13)


def test_bernstein_width_monotone():
    N = np.arange(1, 10**6, 1009)
    assert np.all(np.diff(bernstein_width(N, 5, 3, 0.1)) <= 0)


def test_inner_full_budget():
    p = np.array([0.2, 0.3, 0.1])
    q = inner_optimistic_distribution(p, 0.6, np.array([1.0, 2.0, 3.0]))
    np.testing.assert_array_equal(q, 0.0)


def test_inner_zero_radius():
    p = np.array([0.2, 0.3, 0.1])
    np.testing.assert_array_equal(inner_optimistic_distribution(p, 0.0, np.array([1.0, 2.0, 3.0])), p)


def test_inner_removes_from_highest_value():
    p = np.array([0.2, 0.3, 0.1])
    q = inner_optimistic_distribution(p, 0.15, np.array([1.0, 2.0, 3.0]))
    np.testing.assert_allclose(q, [0.2, 0.25, 0.0], atol=1e-15)


@pytest.mark.parametrize("bad", [
    dict(p_row=[0.6, 0.6], radius=0.1, J=[1, 2]),
    dict(p_row=[-0.1, 0.5], radius=0.1, J=[1, 2]),
    dict(p_row=[0.1, 0.5], radius=-0.1, J=[1, 2]),
    dict(p_row=[0.1, 0.5], radius=0.1, J=[1, 2, 3]),
])
def test_inner_rejects_malformed(bad):
    with pytest.raises(InvalidArgument):
        inner_optimistic_distribution(**bad)


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_inner_matches_lp(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 7))
    p = rng.dirichlet(np.ones(n + 1))[:n]
    J = rng.uniform(0, 10, n)
    radius = float(rng.uniform(0, 2))
    q = inner_optimistic_distribution(p, radius, J)
    lp_obj, _ = lp_inner_min(p, radius, J)
    assert abs(q @ J - lp_obj) <= 1e-9
    assert np.abs(q - p).sum() <= radius + 1e-12
    assert q @ J <= (random_feasible_points(p, radius, 500, rng) @ J).min() + 1e-9


def test_evi_zero_counts():
    inst = make_random_instance(0, 3, 2, 0.1)
    model = extended_value_iteration(CountTable(3, 2), inst.cost, 0.1)
    np.testing.assert_allclose(model.values, inst.cost.min(axis=1), atol=1e-12)
    np.testing.assert_array_equal(model.trans_tilde, 0.0)


def test_evi_optimistic_on_lb(lb4):
    counts = CountTable(1, 16)
    rng = np.random.default_rng(1)
    for t in range(100_000):
        a = t % 16
        counts.add(0, a, sample_transition(lb4, 0, a, rng))
    model = extended_value_iteration(counts, lb4.cost, 0.1)
    assert model.values[0] <= 4.0 + 1e-9


@pytest.mark.parametrize("seed", range(5))
def test_evi_optimistic_when_contained(seed):
    inst = make_random_instance(seed, 4, 3, 0.1, cost_floor=0.1)
    counts = _counts_from_rows(inst.trans, 2000, np.random.default_rng(seed))
    assert contains_true_hoeffding(counts, inst.trans, 0.1)
    model = extended_value_iteration(counts, inst.cost, 0.1)
    assert np.all(model.values <= value_iteration(inst).values + 1e-6)


def test_evi_max_iter_flag(small_random):
    counts = _counts_from_rows(small_random.trans, 10_000, np.random.default_rng(0))
    assert not extended_value_iteration(counts, small_random.cost, 0.1, max_iter=2).converged


def test_bernstein_zero_counts():
    P = bernstein_optimistic(CountTable(3, 2), 0.1)
    np.testing.assert_array_equal(P, 0.0)


@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 10**5))
@settings(max_examples=40, deadline=None)
def test_bernstein_below_empirical(seed, n):
    inst = make_random_instance(seed % 1000, 3, 2, 0.05)
    counts = _counts_from_rows(inst.trans, n, np.random.default_rng(seed))
    P = bernstein_optimistic(counts, 0.1)
    assert np.all(P >= 0) and np.all(P <= empirical_transitions(counts) + 1e-15)


def test_bernstein_plan_zero_counts():
    inst = make_random_instance(4, 3, 2, 0.1)
    model = optimistic_plan_bernstein(CountTable(3, 2), inst.cost, 0.1)
    np.testing.assert_allclose(model.values, inst.cost.min(axis=1), atol=1e-12)


def test_bernstein_plan_lb_long_rollout(lb4):
    counts = CountTable(1, 16)
    rng = np.random.default_rng(3)
    for t in range(200_000):
        a = t % 16
        counts.add(0, a, sample_transition(lb4, 0, a, rng))
    assert contains_true_bernstein(counts, lb4.trans, 0.1)
    model = optimistic_plan_bernstein(counts, lb4.cost, 0.1)
    assert model.values[0] <= 4.0 + 1e-9
    assert np.all(model.trans_tilde <= lb4.trans + 1e-12)


def test_containment_proportional_counts(small_random):
    N3 = np.round(np.concatenate([small_random.trans, small_random.goal_prob[..., None]], axis=2) * 10**8)
    counts = CountTable.from_transitions(N3.astype(np.int64))
    assert contains_true_hoeffding(counts, small_random.trans, 0.1)
    assert contains_true_bernstein(counts, small_random.trans, 0.1)


def test_containment_adversarial(small_random):
    S, A = 4, 3
    N3 = np.zeros((S, A, S + 1), dtype=np.int64)
    N3[..., 0] = 10**7  # everything to state 0
    counts = CountTable.from_transitions(N3)
    assert not contains_true_hoeffding(counts, small_random.trans, 0.1)
    assert not contains_true_bernstein(counts, small_random.trans, 0.1)


def test_coverage_synthetic_true_table():
    assert coverage_report([[True] * 5, [True] * 3]).zero_violation_fraction == 1.0


def test_coverage_monte_carlo_small():
    rows = np.array([[0.5, 0.3, 0.2]])
    ok = bernstein_coverage_monte_carlo(rows, num_runs=20, horizon=2000, delta=0.1, seed=1)
    assert ok.mean() >= 0.9


def test_coverage_monotone_in_delta():
    rows = np.array([[0.5, 0.3, 0.2], [0.05, 0.05, 0.9]])
    kw = dict(num_runs=30, horizon=2000, num_states=2, num_actions=1, seed=4)
    loose = bernstein_coverage_monte_carlo(rows, delta=0.9, **kw).mean()
    tight = bernstein_coverage_monte_carlo(rows, delta=0.01, **kw).mean()
    assert loose <= tight


def test_count_table_merge():
    c = CountTable(2, 1)
    c.add_delta(0, 0, 1)
    c.add_delta(0, 0, 2)
    c.merge()
    assert c.N[0, 0] == 2 and c.n.sum() == 0 and c.consistent() and c.total == 2
