"""Negative-curvature search: exact direction contract and Oja streaming."""

import numpy as np
import pytest

from sosplab.core.oracle import NoiseParams, StochasticOracle
from sosplab.core.problems import QuadraticProblem
from sosplab.subproblems.curvature import (
    curvature_step,
    exact_curvature_direction,
    oja_search,
)


def test_direction_threshold_is_inclusive():
    gamma = 0.25
    H = np.diag([-4 * gamma, 1.0])
    u = exact_curvature_direction(H, gamma)
    assert u is not None
    assert abs(u @ H @ u + 4 * gamma) <= 1e-12
    # a hair above the threshold is rejected
    H2 = np.diag([-4 * gamma + 1e-9, 1.0])
    assert exact_curvature_direction(H2, gamma) is None


def test_direction_orientation_and_norm():
    H = np.diag([1.0, -3.0, 0.5])
    u = exact_curvature_direction(H, 0.5)
    assert np.linalg.norm(u) == pytest.approx(1.0, rel=1e-12)
    # deterministic sign: first nonzero component positive
    assert u[np.nonzero(np.abs(u) > 1e-12)[0][0]] > 0


def test_curvature_step_geometry():
    rng = np.random.default_rng(0)
    x = np.array([1.0, -2.0, 0.5])
    u = np.array([0.0, 1.0, 0.0])
    gamma, l2 = 0.8, 4.0
    seen = set()
    for _ in range(40):
        y = curvature_step(x, u, gamma, l2, rng)
        assert np.linalg.norm(y - x) == pytest.approx(gamma / l2, rel=1e-12)
        seen.add(round(float(y[1] - x[1]), 12))
    # both signs of the step occur
    assert len(seen) == 2


def _oja_problem(diag):
    d = len(diag)
    return QuadraticProblem(A=np.diag(diag), x0=np.zeros(d), delta=10.0)


def test_oja_finds_planted_direction():
    gamma = 0.2
    diag = [-0.9] + [0.1] * 19
    prob = _oja_problem(diag)
    noise = NoiseParams(sigma1=0.0, sigma2=0.5)
    found = 0
    for seed in range(15):
        oracle = StochasticOracle(prob, noise, seed=seed)
        out = oja_search(oracle, prob.x0, gamma, delta=0.05,
                         rng=np.random.default_rng(seed))
        if out.found:
            ray = out.direction @ prob.hess(prob.x0) @ out.direction
            if ray <= -gamma:
                found += 1
    assert found >= 12


def test_oja_certifies_psd():
    prob = _oja_problem([0.5] * 20)
    noise = NoiseParams(sigma1=0.0, sigma2=0.5)
    certified = sum(
        1 for seed in range(15)
        if not oja_search(StochasticOracle(prob, noise, seed=seed), prob.x0,
                          0.2, delta=0.05,
                          rng=np.random.default_rng(seed)).found)
    assert certified >= 12


def test_oja_spends_hvp_queries_only():
    prob = _oja_problem([-0.9] + [0.1] * 9)
    oracle = StochasticOracle(prob, NoiseParams(sigma1=0.0, sigma2=0.5),
                              seed=3)
    out = oja_search(oracle, prob.x0, 0.2, delta=0.05,
                     rng=np.random.default_rng(3))
    assert oracle.ledger.hvp == out.iterations + out.verify_draws
    assert oracle.ledger.grad == 0
    assert oracle.ledger.hess == 0
