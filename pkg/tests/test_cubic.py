"""Cubic-regularized trust-region subproblem: exactness and optimality."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sosplab.subproblems.cubic import (
    CubicModel,
    brute_force_value,
    model_value,
    solve_cubic_tr,
)

GOLDEN = (1.0 + np.sqrt(5.0)) / 2.0


def random_model(rng, dim=None):
    d = dim if dim is not None else int(rng.integers(1, 4))
    B = rng.standard_normal((d, d))
    H = (B + B.T) / 2
    mode = rng.integers(0, 4)
    if mode == 0:
        g = np.zeros(d)
    elif mode == 1:
        # gradient orthogonal to the bottom eigenvector: hard-case candidates
        w, V = np.linalg.eigh(H)
        g = rng.standard_normal(d)
        g -= (g @ V[:, 0]) * V[:, 0]
    else:
        g = rng.standard_normal(d)
    M = float(rng.uniform(0.5, 5.0))
    radius = float(rng.uniform(0.2, 2.0)) if rng.random() < 0.3 else np.inf
    return CubicModel(g=g, H=H, M=M, radius=radius)


def test_frozen_interior_root():
    # scalar model -s + s^2 = 1: the positive root is the golden ratio
    step = solve_cubic_tr(CubicModel(g=np.array([-1.0]), H=np.array([[-1.0]]),
                                     M=2.0, radius=np.inf))
    assert step.case == "interior"
    assert step.s[0] == pytest.approx(GOLDEN, rel=1e-12)


def test_frozen_hard_case():
    # zero gradient, indefinite Hessian: eigenvector augmentation with the
    # sign tie broken toward +
    step = solve_cubic_tr(CubicModel(g=np.zeros(2), H=np.diag([-1.0, 2.0]),
                                     M=3.0, radius=np.inf))
    assert step.case == "hard_interior"
    np.testing.assert_allclose(step.s, [2.0 / 3.0, 0.0], atol=1e-12)
    assert step.value == pytest.approx(-2.0 / 27.0, rel=1e-12)


def test_boundary_clamp():
    step = solve_cubic_tr(CubicModel(g=np.array([-5.0, 0.0]), H=np.eye(2),
                                     M=1.0, radius=0.5))
    assert step.case == "boundary"
    assert np.linalg.norm(step.s) == pytest.approx(0.5, rel=1e-12)


def test_psd_zero_gradient_stays_put():
    step = solve_cubic_tr(CubicModel(g=np.zeros(3), H=np.eye(3), M=1.0,
                                     radius=1.0))
    np.testing.assert_array_equal(step.s, np.zeros(3))


def test_kkt_residuals_on_corpus():
    rng = np.random.default_rng(100)
    worst = 0.0
    for _ in range(300):
        step = solve_cubic_tr(random_model(rng))
        worst = max(worst, step.kkt_residual)
    assert worst <= 1e-8


def test_value_field_matches_model_value():
    rng = np.random.default_rng(101)
    for _ in range(50):
        model = random_model(rng)
        step = solve_cubic_tr(model)
        assert step.value == pytest.approx(model_value(model, step.s),
                                           abs=1e-12)


def test_beats_brute_force():
    # brute force probes the trust ball, so it needs a finite radius
    rng = np.random.default_rng(102)
    for _ in range(25):
        base = random_model(rng, dim=int(rng.integers(1, 4)))
        model = CubicModel(g=base.g, H=base.H, M=base.M,
                           radius=float(rng.uniform(0.3, 2.0)))
        step = solve_cubic_tr(model)
        ref = brute_force_value(model, n_samples=20000,
                                seed=int(rng.integers(1 << 30)))
        assert step.value <= ref + 1e-6


@given(st.floats(0.1, 10.0), st.floats(0.1, 10.0))
@settings(max_examples=60, deadline=None)
def test_scalar_step_shrinks_with_penalty(gnorm, M):
    # heavier cubic penalty never lengthens the step
    lo = solve_cubic_tr(CubicModel(g=np.array([-gnorm]), H=np.array([[1.0]]),
                                   M=M, radius=np.inf))
    hi = solve_cubic_tr(CubicModel(g=np.array([-gnorm]), H=np.array([[1.0]]),
                                   M=2 * M, radius=np.inf))
    assert np.linalg.norm(hi.s) <= np.linalg.norm(lo.s) + 1e-12
