import os
import subprocess
import sys

import numpy as np
import pytest

from sspregret import _kernels_numpy as npk
from sspregret import kernels
from sspregret.model import make_random_instance

numba_backend = pytest.importorskip("sspregret._kernels_numba")


def _tables(seed, S=5, A=3):
    inst = make_random_instance(seed, S, A, 0.05)
    rng = np.random.default_rng(seed)
    radius = rng.uniform(0, 1.5, size=(S, A))
    return np.ascontiguousarray(inst.cost), np.ascontiguousarray(inst.trans), radius


@pytest.mark.parametrize("seed", range(5))
def test_value_iteration_backends_agree(seed):
    cost, trans, _ = _tables(seed)
    a = npk.value_iteration(cost, trans, np.zeros(5), 1e-10, 10**6, 1e9)
    b = numba_backend.value_iteration(cost, trans, np.zeros(5), 1e-10, 10**6, 1e9)
    np.testing.assert_allclose(a[0], b[0], atol=1e-12)
    np.testing.assert_array_equal(a[1], b[1])
    assert a[4] == b[4] == kernels.CONVERGED


@pytest.mark.parametrize("seed", range(5))
def test_evi_backends_agree(seed):
    cost, trans, radius = _tables(seed)
    a = npk.extended_value_iteration(cost, trans, radius, 1e-10, 10**5, 1e9)
    b = numba_backend.extended_value_iteration(cost, trans, radius, 1e-10, 10**5, 1e9)
    np.testing.assert_allclose(a[0], b[0], atol=1e-10)
    np.testing.assert_array_equal(a[1], b[1])
    np.testing.assert_allclose(npk.optimistic_rows(trans, radius, a[0]),
                               numba_backend.optimistic_rows(trans, radius, a[0]), atol=1e-15)


def test_inner_min_ties_use_stable_order():
    p = np.array([0.3, 0.3, 0.2])
    J = np.array([1.0, 1.0, 0.5])
    for backend in (npk, numba_backend):
        q = np.asarray(backend.inner_min_row(p, 0.4, J))
        np.testing.assert_allclose(q, [0.0, 0.2, 0.2], atol=1e-15)


def test_policy_evaluation_backends_agree():
    cost, trans, _ = _tables(3)
    c_pi, P_pi = np.ascontiguousarray(cost[:, 0]), np.ascontiguousarray(trans[:, 0])
    a = npk.policy_evaluation(c_pi, P_pi, 1e-12, 10**6)
    b = numba_backend.policy_evaluation(c_pi, P_pi, 1e-12, 10**6)
    np.testing.assert_allclose(a[0], b[0], atol=1e-12)
    np.testing.assert_allclose(a[0], np.linalg.solve(np.eye(5) - P_pi, c_pi), atol=1e-9)


def test_divergence_flag():
    # single state, no goal edge: values grow without bound
    cost = np.ones((1, 1))
    trans = np.ones((1, 1, 1))
    for backend in (npk, numba_backend):
        status = backend.value_iteration(cost, trans, np.zeros(1), 1e-10, 10**6, 100.0)[4]
        assert status == kernels.DIVERGED


def test_env_flag_selects_numpy():
    env = dict(os.environ, SSPREGRET_DISABLE_NUMBA="1")
    code = "from sspregret import kernels; print(kernels.BACKEND_NAME)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_numpy_fallback_passes_oracle_suites():
    env = dict(os.environ, SSPREGRET_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-m", "sspregret", "oracle-check", "--trials", "30", "--points", "500"],
                         env=env, capture_output=True, text=True)
    assert out.returncode == 0, out.stdout + out.stderr


@pytest.mark.parametrize("seed", range(20))
def test_inner_min_bitwise_equal(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 8))
    p = rng.dirichlet(np.ones(n + 1))[:n]
    J = rng.uniform(0, 5, n)
    radius = float(rng.choice([rng.uniform(0, 2), p.sum()]))
    np.testing.assert_array_equal(npk.inner_min_row(p, radius, J), numba_backend.inner_min_row(p, radius, J))
