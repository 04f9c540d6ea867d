"""Backend selection and compiled/fallback agreement.

The two backends share semantics but not instruction streams (libm vs
NumPy SIMD), so agreement is checked at 1e-12 relative tolerance, not
bit-for-bit.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sosplab._kernels import _fallback, backend_name

try:
    from sosplab._kernels import _core
except ImportError:
    _core = None

needs_compiled = pytest.mark.skipif(_core is None,
                                    reason="compiled backend not built")


def test_backend_name_is_known():
    assert backend_name() in ("compiled", "fallback")


@pytest.mark.parametrize("order", [0, 1, 2])
@pytest.mark.parametrize("fn", ["psi_arr", "phi_arr", "lam_arr"])
@needs_compiled
def test_component_parity(fn, order):
    x = np.linspace(-4.0, 4.0, 4001)
    a = getattr(_core, fn)(x, order)
    b = getattr(_fallback, fn)(x, order)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("kind", [0, 1])
@needs_compiled
def test_chain_parity(kind):
    rng = np.random.default_rng(7)
    Y = rng.uniform(-2.5, 2.5, (40, 9))
    np.testing.assert_allclose(_core.chain_value(Y, kind),
                               _fallback.chain_value(Y, kind), rtol=1e-12)
    np.testing.assert_allclose(_core.chain_grad(Y, kind),
                               _fallback.chain_grad(Y, kind),
                               rtol=1e-12, atol=1e-12)
    Dc, Oc = _core.chain_bands(Y, kind)
    Df, Of = _fallback.chain_bands(Y, kind)
    np.testing.assert_allclose(Dc, Df, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(Oc, Of, rtol=1e-12, atol=1e-12)


@needs_compiled
def test_lamsum_parity():
    rng = np.random.default_rng(8)
    X = rng.uniform(-3.0, 3.0, (50, 11))
    c = rng.uniform(-0.5, 0.5, 11)
    for fn in ["lamsum_value", "lamsum_grad", "lamsum_hdiag"]:
        np.testing.assert_allclose(getattr(_core, fn)(X, c, 0.7),
                                   getattr(_fallback, fn)(X, c, 0.7),
                                   rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("kind", [0, 1])
@needs_compiled
def test_single_point_matches_batch(kind):
    rng = np.random.default_rng(9)
    y = rng.uniform(-2.0, 2.0, 7)
    assert _core.chain_value1(y, kind) == pytest.approx(
        float(_core.chain_value(y[None, :], kind)[0]), rel=1e-15)
    np.testing.assert_allclose(_core.chain_grad1(y, kind),
                               _core.chain_grad(y[None, :], kind)[0],
                               rtol=1e-15)


def test_component_frozen_values():
    # pinned closed-form values of the building blocks
    assert float(_fallback.psi_arr(np.array([0.5]), 0)[0]) == 0.0
    assert float(_fallback.psi_arr(np.array([0.75]), 0)[0]) == pytest.approx(
        math.exp(-3.0), rel=1e-13)
    assert float(_fallback.psi_arr(np.array([1.0]), 1)[0]) == pytest.approx(
        4.0, rel=1e-13)
    assert float(_fallback.phi_arr(np.array([0.0]), 0)[0]) == pytest.approx(
        2.066365677061247, rel=1e-13)
    assert float(_fallback.phi_arr(np.array([0.0]), 1)[0]) == pytest.approx(
        math.sqrt(math.e), rel=1e-13)
    assert float(_fallback.lam_arr(np.array([0.0]), 2)[0]) == pytest.approx(
        -8.0, rel=1e-13)


@pytest.mark.parametrize("fn, bound", [("lam_arr", 8.0), ("psi_arr", math.e)])
def test_component_ranges(fn, bound):
    x = np.linspace(-30.0, 30.0, 20001)
    v = getattr(_fallback, fn)(x, 0)
    assert np.abs(v).max() <= bound + 1e-12


@given(st.lists(st.floats(-3.0, 3.0), min_size=2, max_size=8))
@settings(max_examples=60, deadline=None)
def test_chain_grad_is_value_derivative(ys):
    # central differences on the scalar chain value agree with chain_grad
    y = np.array(ys)
    g = _fallback.chain_grad1(y, 0)
    h = 1e-6
    for i in range(len(y)):
        e = np.zeros_like(y)
        e[i] = h
        fd = (_fallback.chain_value1(y + e, 0)
              - _fallback.chain_value1(y - e, 0)) / (2 * h)
        assert g[i] == pytest.approx(fd, abs=5e-5)
