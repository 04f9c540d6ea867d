"""Variance-reduced gradient estimator: sizes, transport, error, cost."""

import numpy as np
import pytest

from sosplab._rng import spawn
from sosplab.core.oracle import NoiseParams, StochasticOracle
from sosplab.core.problems import QuadraticProblem
from sosplab.hvp_rvr import (
    estimate,
    estimator_error_suite,
    expected_query_budget,
    make_rvr_params,
)


def quad_instance():
    A = np.diag([1.0, 0.5, 2.0, 0.8])
    return QuadraticProblem(A=A, b=np.ones(4), x0=np.zeros(4))


def test_frozen_sample_sizes():
    p = make_rvr_params(epsilon=0.1, reset_prob=0.5, sigma1=1.0, sigma2=1.0,
                        l2=1.0)
    assert p.n_fresh == 500          # ceil(5 sigma1^2 / eps^2)
    assert p.path_steps(0.0) == 0
    assert p.path_steps(0.1) == 11   # ceil(5 (sigma2^2 + l2 eps) dx^2 / (b eps^2))


def test_frozen_query_budgets():
    p = make_rvr_params(epsilon=0.1, reset_prob=0.5, sigma1=1.0, sigma2=1.0,
                        l2=1.0)
    assert expected_query_budget(p, 0.0) == pytest.approx(306.0)
    assert expected_query_budget(p, 0.1) == pytest.approx(319.2)


def test_noiseless_degenerates_to_single_query():
    p = make_rvr_params(epsilon=0.1, reset_prob=0.25, sigma1=0.0, sigma2=1.0,
                        l2=1.0)
    assert p.reset_prob == 1.0
    assert p.n_fresh == 1


def test_reset_prob_override_threads_into_path_steps():
    p = make_rvr_params(epsilon=0.1, reset_prob=0.5, sigma1=1.0, sigma2=1.0,
                        l2=1.0)
    assert p.path_steps(0.1, reset_prob=0.25) == 22


def test_transport_is_exact_without_noise():
    # reset never fires: the estimate is carried purely by path sums, which
    # telescope exactly on a quadratic with a noiseless oracle
    inst = quad_instance()
    oracle = StochasticOracle(inst, NoiseParams(sigma1=1.0, sigma2=0.0),
                              seed=0)
    params = make_rvr_params(epsilon=0.05, reset_prob=0.5, sigma1=1.0,
                             sigma2=1.0, l2=1.0)
    coins = spawn(1, "coins")
    rng = np.random.default_rng(2)
    x = inst.x0.copy()
    g, state = estimate(oracle, x, None, params, coins)
    drift = g - inst.grad(x)
    for _ in range(10):
        x = x + 0.1 * rng.standard_normal(4)
        g, state = estimate(oracle, x, state, params, coins, reset_prob=0.0)
        np.testing.assert_allclose(g - inst.grad(x), drift, atol=1e-10)


def test_estimate_deterministic(small_lambda, unit_noise):
    params = make_rvr_params(epsilon=0.2, reset_prob=0.3, sigma1=1.0,
                             sigma2=1.0, l2=small_lambda.regularity.l2)

    def one(seed):
        oracle = StochasticOracle(small_lambda, unit_noise, seed=seed)
        g, _ = estimate(oracle, small_lambda.x0, None, params, spawn(seed, "c"))
        return g

    np.testing.assert_array_equal(one(5), one(5))
    assert not np.array_equal(one(5), one(6))


def test_error_suite_mse_within_design_band(small_lambda, unit_noise):
    eps = 0.25
    params = make_rvr_params(epsilon=eps, reset_prob=0.2, sigma1=1.0,
                             sigma2=1.0, l2=small_lambda.regularity.l2)
    res = estimator_error_suite(small_lambda, unit_noise, params,
                                step_size=0.05, steps=150, replications=8,
                                seed=7)
    assert res.mse <= 1.2 * eps**2
    assert res.queries.shape == (8, 150)
    assert res.queries.min() >= 1


def test_mean_queries_within_budget(small_lambda, unit_noise):
    eps = 0.2
    params = make_rvr_params(epsilon=eps, reset_prob=0.4, sigma1=1.0,
                             sigma2=1.0, l2=small_lambda.regularity.l2)
    oracle = StochasticOracle(small_lambda, unit_noise, seed=8)
    coins = spawn(8, "coins")
    rng = np.random.default_rng(9)
    x = small_lambda.x0.copy()
    g, state = estimate(oracle, x, None, params, coins)
    dx = 0.05
    before = oracle.ledger.total
    n_calls = 400
    for _ in range(n_calls):
        step = rng.standard_normal(small_lambda.dim)
        x = x + dx * step / np.linalg.norm(step)
        g, state = estimate(oracle, x, state, params, coins)
    mean_q = (oracle.ledger.total - before) / n_calls
    assert mean_q <= expected_query_budget(params, dx)
