"""Problem instances: certificates, derivatives, structure."""

import numpy as np
import pytest

from sosplab.core.problems import (
    LAM_THIRD_MAX,
    FiniteSumProblem,
    LambdaSumProblem,
    QuadraticProblem,
    RegularityParams,
)
from sosplab.errors import ConfigError


def fd_grad(problem, x, h=1e-6):
    g = np.zeros_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (problem.value(x + e) - problem.value(x - e)) / (2 * h)
    return g


@pytest.mark.parametrize("bad", [
    dict(l1=0.0, l2=1.0, delta=1.0),
    dict(l1=1.0, l2=-1.0, delta=1.0),
    dict(l1=1.0, l2=1.0, delta=-0.1),
])
def test_regularity_validation(bad):
    with pytest.raises(ConfigError):
        RegularityParams(**bad)


def test_lambda_sum_certificates():
    prob = LambdaSumProblem(dim=5, scale=0.25)
    assert prob.regularity.l1 == pytest.approx(8 * 0.25)
    assert prob.regularity.l2 == pytest.approx(LAM_THIRD_MAX * 0.25)
    # gap certificate: value at x0 minus the per-coordinate floor
    assert prob.regularity.delta == pytest.approx(
        prob.value(prob.x0) + 8 * 0.25 * 5)


def test_lambda_sum_default_start_is_stationary():
    prob = LambdaSumProblem(dim=4)
    assert np.linalg.norm(prob.grad(prob.x0)) == 0.0


def test_lambda_sum_derivatives(small_lambda):
    rng = np.random.default_rng(0)
    for _ in range(5):
        x = rng.uniform(-2, 2, small_lambda.dim)
        np.testing.assert_allclose(small_lambda.grad(x),
                                   fd_grad(small_lambda, x),
                                   rtol=1e-5, atol=1e-6)
        H = small_lambda.hess(x)
        # separable objective: diagonal Hessian
        np.testing.assert_allclose(H, np.diag(np.diag(H)), atol=1e-14)
        assert small_lambda.lambda_min(x) == pytest.approx(
            np.linalg.eigvalsh(H).min(), rel=1e-12)


def test_lambda_sum_grad_many(small_lambda):
    rng = np.random.default_rng(1)
    X = rng.uniform(-2, 2, (7, small_lambda.dim))
    G = small_lambda.grad_many(X)
    for i in range(7):
        np.testing.assert_allclose(G[i], small_lambda.grad(X[i]), rtol=1e-14)


def test_quadratic_exact_derivatives():
    A = np.array([[2.0, 0.5, 0.0], [0.5, 1.0, 0.0], [0.0, 0.0, 3.0]])
    b = np.array([1.0, -1.0, 0.5])
    prob = QuadraticProblem(A=A, b=b, x0=np.zeros(3))
    x = np.array([0.3, -0.2, 0.7])
    np.testing.assert_allclose(prob.grad(x), A @ x - b, atol=1e-14)
    np.testing.assert_allclose(prob.hess(x), A, atol=1e-14)
    np.testing.assert_allclose(prob.hvp(x, b), A @ b, atol=1e-14)


def test_quadratic_indefinite_needs_gap():
    A = np.diag([1.0, -1.0])
    with pytest.raises(ConfigError):
        QuadraticProblem(A=A, x0=np.zeros(2))
    prob = QuadraticProblem(A=A, x0=np.zeros(2), delta=5.0)
    assert prob.regularity.delta == 5.0


def test_finite_sum_component_mean():
    fs = FiniteSumProblem("quadratic", dim=5, n_components=6, spread=0.4,
                          seed=3)
    x = np.linspace(-1, 1, 5)
    comps = np.array([fs.component_grad(x, i) for i in range(6)])
    np.testing.assert_allclose(comps.mean(axis=0), fs.grad(x), atol=1e-12)
    # spread enters component Hessians in balanced +/- pairs
    devs = np.array([fs.component_hess(x, i) - fs.hess(x) for i in range(6)])
    np.testing.assert_allclose(devs.sum(axis=0), 0.0, atol=1e-12)
    for D in devs:
        np.testing.assert_allclose(np.abs(D), 0.4 * np.eye(5), atol=1e-12)


def test_finite_sum_needs_even_components():
    with pytest.raises(ConfigError):
        FiniteSumProblem("quadratic", dim=4, n_components=5)
