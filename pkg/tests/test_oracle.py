"""Stochastic oracle contracts: noise laws, coupling, accounting."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sosplab.core.oracle import (
    ContractViolation,
    FiniteSumOracle,
    NoiseParams,
    QueryLedger,
    SignRadialOracle,
    StochasticOracle,
    finite_diff_hvp,
    verify_mss_equivalence,
)
from sosplab.core.problems import FiniteSumProblem, QuadraticProblem


def test_rademacher_draw_norms_exact(small_lambda):
    # rank-one noise has per-draw norm exactly sigma, not just in expectation
    oracle = StochasticOracle(small_lambda, NoiseParams(sigma1=0.7, sigma2=1.3),
                              seed=0)
    x = small_lambda.x0
    for _ in range(50):
        g = oracle.grad(x)
        assert np.linalg.norm(g - small_lambda.grad(x)) == pytest.approx(
            0.7, rel=1e-12)
        H = oracle.hess(x)
        E = H - small_lambda.hess(x)
        assert np.linalg.norm(E, "fro") == pytest.approx(1.3, rel=1e-12)
        np.testing.assert_allclose(E, E.T, atol=1e-12)


def test_gaussian_gradient_law_second_moment(small_lambda):
    oracle = StochasticOracle(
        small_lambda, NoiseParams(sigma1=0.5, law="gaussian"), seed=1)
    x = small_lambda.x0
    g_true = small_lambda.grad(x)
    sq = [float(np.sum((oracle.grad(x) - g_true) ** 2)) for _ in range(4000)]
    # E||noise||^2 = sigma1^2; allow a 5-sigma Monte Carlo band
    mean = np.mean(sq)
    band = 5 * np.std(sq) / np.sqrt(len(sq))
    assert abs(mean - 0.25) <= band


def test_grad_unbiased(small_lambda):
    oracle = StochasticOracle(small_lambda, NoiseParams(sigma1=1.0), seed=2)
    x = small_lambda.x0
    draws = np.array([oracle.grad(x) for _ in range(8000)])
    err = draws.mean(axis=0) - small_lambda.grad(x)
    assert np.linalg.norm(err) <= 5.0 / np.sqrt(8000)


def test_shared_draw_coupling(small_lambda):
    noise = NoiseParams(sigma1=1.0, mode="n_point", n_points=2)
    oracle = StochasticOracle(small_lambda, noise, seed=3)
    x = small_lambda.x0
    y = x + 0.1
    gx, gy = oracle.grad_shared([x, y])
    # identical draw at both points: noise cancels in the difference
    diff = (gx - gy) - (small_lambda.grad(x) - small_lambda.grad(y))
    assert np.linalg.norm(diff) <= 1e-12


def test_hvp_path_telescopes_on_quadratic():
    A = np.diag([1.0, 2.0, 0.5])
    prob = QuadraticProblem(A=A, x0=np.array([1.0, -1.0, 2.0]))
    oracle = StochasticOracle(prob, NoiseParams(), seed=4)
    x_prev = prob.x0
    x = x_prev + np.array([0.3, -0.2, 0.1])
    # exact Hessian: the K-segment path sum equals the gradient difference
    path = oracle.hvp_path_sum(x_prev, x, K=7)
    np.testing.assert_allclose(path, prob.grad(x) - prob.grad(x_prev),
                               atol=1e-12)


def test_finite_diff_hvp_exact_on_quadratic():
    # shared draw cancels the noise; on a quadratic the quotient is exact
    A = np.diag([1.0, 2.0, 0.5])
    prob = QuadraticProblem(A=A, x0=np.array([1.0, -1.0, 2.0]))
    noise = NoiseParams(sigma1=1.0, mode="n_point", n_points=2)
    oracle = StochasticOracle(prob, noise, seed=5)
    u = np.array([1.0, 0.0, 0.0])
    np.testing.assert_allclose(finite_diff_hvp(oracle, prob.x0, u, 1e-3),
                               A @ u, rtol=1e-9, atol=1e-9)


def test_ledger_counts_channels(small_lambda):
    oracle = StochasticOracle(small_lambda, NoiseParams(sigma1=1.0, sigma2=1.0),
                              seed=6)
    x = small_lambda.x0
    oracle.grad(x)
    oracle.grad_mean(x, 5)
    oracle.hvp(x, x)
    oracle.hess(x)
    oracle.value(x)
    assert oracle.ledger.as_dict() == {"grad": 6, "hvp": 1, "hess": 1,
                                       "value": 1}
    assert oracle.ledger.total == 9


@given(st.lists(st.integers(0, 10**6), min_size=4, max_size=4),
       st.lists(st.integers(0, 10**6), min_size=4, max_size=4))
@settings(max_examples=50, deadline=None)
def test_ledger_arithmetic(a, b):
    la = QueryLedger(grad=a[0], hvp=a[1], hess=a[2], value=a[3])
    lb = QueryLedger(grad=b[0], hvp=b[1], hess=b[2], value=b[3])
    merged = QueryLedger(*(x + y for x, y in zip(a, b)))
    assert merged.minus(la).as_dict() == lb.as_dict()
    assert la.total == sum(a)


def test_mss_quotient_on_balanced_finite_sum():
    # component Hessians A +/- spread*I in pairs: the quotient is spread^2
    fs = FiniteSumProblem("quadratic", dim=6, n_components=8, spread=0.5,
                          seed=1)
    rep = verify_mss_equivalence(FiniteSumOracle(fs, seed=2), seed=3)
    assert not rep.diverges
    assert max(rep.quotients) == pytest.approx(0.25, rel=1e-9)
    assert rep.sigma_mss_sq == pytest.approx(0.25, rel=1e-9)


def test_mss_counterexample_diverges():
    # sign-radial noise: the quotient grows as the pair is pulled together
    prob = QuadraticProblem(A=np.diag([1.0, 2.0, 3.0]),
                            x0=np.array([1.0, 1.0, 1.0]))
    rep = verify_mss_equivalence(SignRadialOracle(prob, seed=4), seed=5)
    assert rep.diverges
    q = rep.shrink_quotients
    # each 10x shrink of the pair multiplies the quotient by 100, exactly
    for lo, hi in zip(q, q[1:]):
        assert hi / lo == pytest.approx(100.0, rel=1e-9)


def test_mss_needs_shared_draws(small_lambda):
    oracle = StochasticOracle(small_lambda, NoiseParams(sigma1=1.0), seed=7)
    with pytest.raises(ContractViolation):
        verify_mss_equivalence(oracle, seed=8)


def test_oracle_stream_determinism(small_lambda):
    noise = NoiseParams(sigma1=1.0, sigma2=1.0)
    a = StochasticOracle(small_lambda, noise, seed=9)
    b = StochasticOracle(small_lambda, noise, seed=9)
    x = small_lambda.x0
    np.testing.assert_array_equal(a.grad(x), b.grad(x))
    np.testing.assert_array_equal(a.hess(x), b.hess(x))
    c = StochasticOracle(small_lambda, noise, seed=10)
    assert not np.array_equal(a.grad(x), c.grad(x))
