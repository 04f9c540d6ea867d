"""NumPy reference kernels.

This module is the semantic reference for the compiled backend in
``_core.pyx``: same functions, same conventions, results equal up to
floating-point rounding.  All array arguments are float64; chain inputs are
the unscaled coordinates, with the virtual anchor coordinate fixed at 1.

Chain kinds:
    0  smooth ramp * Gaussian-integral link (unbounded below per coordinate)
    1  smooth ramp * Gaussian-bump link (bounded, saddle at the origin)
"""

from __future__ import annotations

import numpy as np
from scipy.special import erf

SQRT_E = 1.6487212707001282
SQRT_HALF_PI = 1.2533141373155003
INV_SQRT2 = 0.7071067811865476

# Below s = 2x-1 = 0.0366 the ramp underflows to exactly 0.0 in float64;
# clamping s keeps t**6 finite so 0 * t**6 never produces NaN.
_S_FLOOR = 1e-40


def _psi(x: np.ndarray, order: int) -> np.ndarray:
    out = np.zeros_like(x)
    mask = x > 0.5
    if not mask.any():
        return out
    s = np.maximum(2.0 * x[mask] - 1.0, _S_FLOOR)
    t = 1.0 / s
    e = np.exp(1.0 - t * t)
    if order == 0:
        out[mask] = e
    elif order == 1:
        out[mask] = 4.0 * e * t**3
    else:
        out[mask] = e * (16.0 * t**6 - 24.0 * t**4)
    return out


def _phi(x: np.ndarray, order: int) -> np.ndarray:
    if order == 0:
        return SQRT_E * SQRT_HALF_PI * (1.0 + erf(x * INV_SQRT2))
    d = SQRT_E * np.exp(-0.5 * x * x)
    return d if order == 1 else -x * d


def _lam(x: np.ndarray, order: int) -> np.ndarray:
    e = np.exp(-0.5 * x * x)
    if order == 0:
        return 8.0 * (e - 1.0)
    if order == 1:
        return -8.0 * x * e
    return 8.0 * (x * x - 1.0) * e


def psi_arr(x: np.ndarray, order: int) -> np.ndarray:
    return _psi(np.asarray(x, dtype=np.float64), order)


def phi_arr(x: np.ndarray, order: int) -> np.ndarray:
    return _phi(np.asarray(x, dtype=np.float64), order)


def lam_arr(x: np.ndarray, order: int) -> np.ndarray:
    return _lam(np.asarray(x, dtype=np.float64), order)


def _link(kind: int, x: np.ndarray, order: int) -> np.ndarray:
    return _phi(x, order) if kind == 0 else _lam(x, order)


def _pair_sum(kind: int, pa: np.ndarray, pb: np.ndarray) -> np.ndarray:
    # h(a, b) = psi(-a) link(-b) -/+ psi(a) link(b); kind 0 subtracts.
    if kind == 0:
        return pa - pb
    return pa + pb


def chain_value(Y: np.ndarray, kind: int) -> np.ndarray:
    K, T = Y.shape
    A = np.concatenate([np.ones((K, 1)), Y[:, :-1]], axis=1)
    terms = _pair_sum(kind, _psi(-A, 0) * _link(kind, -Y, 0), _psi(A, 0) * _link(kind, Y, 0))
    return terms.sum(axis=1)


def _dh_db(kind: int, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return _pair_sum(kind, -_psi(-a, 0) * _link(kind, -b, 1), _psi(a, 0) * _link(kind, b, 1))


def _dh_da(kind: int, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return _pair_sum(kind, -_psi(-a, 1) * _link(kind, -b, 0), _psi(a, 1) * _link(kind, b, 0))


def _d2h_db2(kind: int, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return _pair_sum(kind, _psi(-a, 0) * _link(kind, -b, 2), _psi(a, 0) * _link(kind, b, 2))


def _d2h_da2(kind: int, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return _pair_sum(kind, _psi(-a, 2) * _link(kind, -b, 0), _psi(a, 2) * _link(kind, b, 0))


def _d2h_dadb(kind: int, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return _pair_sum(kind, _psi(-a, 1) * _link(kind, -b, 1), _psi(a, 1) * _link(kind, b, 1))


def chain_grad(Y: np.ndarray, kind: int) -> np.ndarray:
    K, T = Y.shape
    A = np.concatenate([np.ones((K, 1)), Y[:, :-1]], axis=1)
    g = _dh_db(kind, A, Y)
    if T > 1:
        g[:, :-1] += _dh_da(kind, Y[:, :-1], Y[:, 1:])
    return g


def chain_bands(Y: np.ndarray, kind: int) -> tuple[np.ndarray, np.ndarray]:
    K, T = Y.shape
    A = np.concatenate([np.ones((K, 1)), Y[:, :-1]], axis=1)
    diag = _d2h_db2(kind, A, Y)
    if T > 1:
        diag[:, :-1] += _d2h_da2(kind, Y[:, :-1], Y[:, 1:])
        off = _d2h_dadb(kind, Y[:, :-1], Y[:, 1:])
    else:
        off = np.zeros((K, 0))
    return diag, off


def chain_value1(y: np.ndarray, kind: int) -> float:
    return float(chain_value(y[None, :], kind)[0])


def chain_grad1(y: np.ndarray, kind: int) -> np.ndarray:
    return chain_grad(y[None, :], kind)[0]


def chain_bands1(y: np.ndarray, kind: int) -> tuple[np.ndarray, np.ndarray]:
    diag, off = chain_bands(y[None, :], kind)
    return diag[0], off[0]


def lamsum_value(X: np.ndarray, c: np.ndarray, scale: float) -> np.ndarray:
    return scale * _lam(X - c, 0).sum(axis=1)


def lamsum_grad(X: np.ndarray, c: np.ndarray, scale: float) -> np.ndarray:
    return scale * _lam(X - c, 1)


def lamsum_hdiag(X: np.ndarray, c: np.ndarray, scale: float) -> np.ndarray:
    return scale * _lam(X - c, 2)


def lamsum_value1(x: np.ndarray, c: np.ndarray, scale: float) -> float:
    return float(scale * _lam(x - c, 0).sum())


def lamsum_grad1(x: np.ndarray, c: np.ndarray, scale: float) -> np.ndarray:
    return scale * _lam(x - c, 1)


def lamsum_hdiag1(x: np.ndarray, c: np.ndarray, scale: float) -> np.ndarray:
    return scale * _lam(x - c, 2)
