# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels.

Mirror of ``_fallback``: same functions, same clamping conventions, results
equal up to libm-vs-NumPy rounding.  The fallback module is the semantic
reference; any behavioral change must land there first.
"""

from libc.math cimport erf, exp

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef double SQRT_E = 1.6487212707001282
cdef double SQRT_HALF_PI = 1.2533141373155003
cdef double INV_SQRT2 = 0.7071067811865476
cdef double S_FLOOR = 1e-40


cdef inline double _psi0(double x) noexcept nogil:
    cdef double s, t
    if x <= 0.5:
        return 0.0
    s = 2.0 * x - 1.0
    if s < S_FLOOR:
        s = S_FLOOR
    t = 1.0 / s
    return exp(1.0 - t * t)


cdef inline double _psi1(double x) noexcept nogil:
    cdef double s, t
    if x <= 0.5:
        return 0.0
    s = 2.0 * x - 1.0
    if s < S_FLOOR:
        s = S_FLOOR
    t = 1.0 / s
    return 4.0 * exp(1.0 - t * t) * t * t * t


cdef inline double _psi2(double x) noexcept nogil:
    cdef double s, t, t2
    if x <= 0.5:
        return 0.0
    s = 2.0 * x - 1.0
    if s < S_FLOOR:
        s = S_FLOOR
    t = 1.0 / s
    t2 = t * t
    return exp(1.0 - t2) * (16.0 * t2 * t2 * t2 - 24.0 * t2 * t2)


cdef inline double _phi0(double x) noexcept nogil:
    return SQRT_E * SQRT_HALF_PI * (1.0 + erf(x * INV_SQRT2))


cdef inline double _phi1(double x) noexcept nogil:
    return SQRT_E * exp(-0.5 * x * x)


cdef inline double _phi2(double x) noexcept nogil:
    return -x * SQRT_E * exp(-0.5 * x * x)


cdef inline double _lam0(double x) noexcept nogil:
    return 8.0 * (exp(-0.5 * x * x) - 1.0)


cdef inline double _lam1(double x) noexcept nogil:
    return -8.0 * x * exp(-0.5 * x * x)


cdef inline double _lam2(double x) noexcept nogil:
    return 8.0 * (x * x - 1.0) * exp(-0.5 * x * x)


cdef inline double _psi(double x, int order) noexcept nogil:
    if order == 0:
        return _psi0(x)
    if order == 1:
        return _psi1(x)
    return _psi2(x)


cdef inline double _link(int kind, double x, int order) noexcept nogil:
    if kind == 0:
        if order == 0:
            return _phi0(x)
        if order == 1:
            return _phi1(x)
        return _phi2(x)
    if order == 0:
        return _lam0(x)
    if order == 1:
        return _lam1(x)
    return _lam2(x)


def psi_arr(x, int order):
    cdef cnp.ndarray[double, ndim=1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] out = np.empty(xv.shape[0], dtype=np.float64)
    cdef Py_ssize_t i
    for i in range(xv.shape[0]):
        out[i] = _psi(xv[i], order)
    return out


def phi_arr(x, int order):
    cdef cnp.ndarray[double, ndim=1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] out = np.empty(xv.shape[0], dtype=np.float64)
    cdef Py_ssize_t i
    for i in range(xv.shape[0]):
        out[i] = _link(0, xv[i], order)
    return out


def lam_arr(x, int order):
    cdef cnp.ndarray[double, ndim=1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] out = np.empty(xv.shape[0], dtype=np.float64)
    cdef Py_ssize_t i
    for i in range(xv.shape[0]):
        out[i] = _link(1, xv[i], order)
    return out


cdef inline double _pair(int kind, double pa, double pb) noexcept nogil:
    if kind == 0:
        return pa - pb
    return pa + pb


cdef double _value_row(const double* y, Py_ssize_t T, int kind) noexcept nogil:
    cdef double acc = 0.0
    cdef double a = 1.0
    cdef double b
    cdef Py_ssize_t j
    for j in range(T):
        b = y[j]
        acc += _pair(kind, _psi0(-a) * _link(kind, -b, 0), _psi0(a) * _link(kind, b, 0))
        a = b
    return acc


cdef void _grad_row(const double* y, Py_ssize_t T, int kind, double* out) noexcept nogil:
    cdef double a = 1.0
    cdef double b, g
    cdef Py_ssize_t j
    for j in range(T):
        b = y[j]
        g = _pair(kind, -_psi0(-a) * _link(kind, -b, 1), _psi0(a) * _link(kind, b, 1))
        if j + 1 < T:
            g += _pair(kind, -_psi1(-b) * _link(kind, -y[j + 1], 0),
                       _psi1(b) * _link(kind, y[j + 1], 0))
        out[j] = g
        a = b


cdef void _bands_row(const double* y, Py_ssize_t T, int kind,
                     double* diag, double* off) noexcept nogil:
    cdef double a = 1.0
    cdef double b, d
    cdef Py_ssize_t j
    for j in range(T):
        b = y[j]
        d = _pair(kind, _psi0(-a) * _link(kind, -b, 2), _psi0(a) * _link(kind, b, 2))
        if j + 1 < T:
            d += _pair(kind, _psi2(-b) * _link(kind, -y[j + 1], 0),
                       _psi2(b) * _link(kind, y[j + 1], 0))
            off[j] = _pair(kind, _psi1(-b) * _link(kind, -y[j + 1], 1),
                           _psi1(b) * _link(kind, y[j + 1], 1))
        diag[j] = d
        a = b


def chain_value(Y, int kind):
    cdef cnp.ndarray[double, ndim=2] Yv = np.ascontiguousarray(Y, dtype=np.float64)
    cdef Py_ssize_t K = Yv.shape[0], T = Yv.shape[1]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(K, dtype=np.float64)
    cdef Py_ssize_t k
    for k in range(K):
        out[k] = _value_row(&Yv[k, 0], T, kind)
    return out


def chain_grad(Y, int kind):
    cdef cnp.ndarray[double, ndim=2] Yv = np.ascontiguousarray(Y, dtype=np.float64)
    cdef Py_ssize_t K = Yv.shape[0], T = Yv.shape[1]
    cdef cnp.ndarray[double, ndim=2] out = np.empty((K, T), dtype=np.float64)
    cdef Py_ssize_t k
    for k in range(K):
        _grad_row(&Yv[k, 0], T, kind, &out[k, 0])
    return out


def chain_bands(Y, int kind):
    cdef cnp.ndarray[double, ndim=2] Yv = np.ascontiguousarray(Y, dtype=np.float64)
    cdef Py_ssize_t K = Yv.shape[0], T = Yv.shape[1]
    cdef cnp.ndarray[double, ndim=2] diag = np.empty((K, T), dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] off = np.empty((K, T - 1 if T > 1 else 0), dtype=np.float64)
    cdef Py_ssize_t k
    cdef double dummy = 0.0
    for k in range(K):
        _bands_row(&Yv[k, 0], T, kind, &diag[k, 0], &off[k, 0] if T > 1 else &dummy)
    return diag, off


def chain_value1(y, int kind):
    cdef cnp.ndarray[double, ndim=1] yv = np.ascontiguousarray(y, dtype=np.float64)
    return _value_row(&yv[0], yv.shape[0], kind)


def chain_grad1(y, int kind):
    cdef cnp.ndarray[double, ndim=1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] out = np.empty(yv.shape[0], dtype=np.float64)
    _grad_row(&yv[0], yv.shape[0], kind, &out[0])
    return out


def chain_bands1(y, int kind):
    cdef cnp.ndarray[double, ndim=1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t T = yv.shape[0]
    cdef cnp.ndarray[double, ndim=1] diag = np.empty(T, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] off = np.empty(T - 1 if T > 1 else 0, dtype=np.float64)
    cdef double dummy = 0.0
    _bands_row(&yv[0], T, kind, &diag[0], &off[0] if T > 1 else &dummy)
    return diag, off


def lamsum_value(X, c, double scale):
    cdef cnp.ndarray[double, ndim=2] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] cv = np.ascontiguousarray(c, dtype=np.float64)
    cdef Py_ssize_t K = Xv.shape[0], d = Xv.shape[1]
    cdef cnp.ndarray[double, ndim=1] out = np.zeros(K, dtype=np.float64)
    cdef Py_ssize_t k, i
    cdef double acc
    for k in range(K):
        acc = 0.0
        for i in range(d):
            acc += _lam0(Xv[k, i] - cv[i])
        out[k] = scale * acc
    return out


def lamsum_grad(X, c, double scale):
    cdef cnp.ndarray[double, ndim=2] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] cv = np.ascontiguousarray(c, dtype=np.float64)
    cdef Py_ssize_t K = Xv.shape[0], d = Xv.shape[1]
    cdef cnp.ndarray[double, ndim=2] out = np.empty((K, d), dtype=np.float64)
    cdef Py_ssize_t k, i
    for k in range(K):
        for i in range(d):
            out[k, i] = scale * _lam1(Xv[k, i] - cv[i])
    return out


def lamsum_hdiag(X, c, double scale):
    cdef cnp.ndarray[double, ndim=2] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] cv = np.ascontiguousarray(c, dtype=np.float64)
    cdef Py_ssize_t K = Xv.shape[0], d = Xv.shape[1]
    cdef cnp.ndarray[double, ndim=2] out = np.empty((K, d), dtype=np.float64)
    cdef Py_ssize_t k, i
    for k in range(K):
        for i in range(d):
            out[k, i] = scale * _lam2(Xv[k, i] - cv[i])
    return out


def lamsum_value1(x, c, double scale):
    cdef cnp.ndarray[double, ndim=1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] cv = np.ascontiguousarray(c, dtype=np.float64)
    cdef Py_ssize_t i
    cdef double acc = 0.0
    for i in range(xv.shape[0]):
        acc += _lam0(xv[i] - cv[i])
    return scale * acc


def lamsum_grad1(x, c, double scale):
    cdef cnp.ndarray[double, ndim=1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] cv = np.ascontiguousarray(c, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] out = np.empty(xv.shape[0], dtype=np.float64)
    cdef Py_ssize_t i
    for i in range(xv.shape[0]):
        out[i] = scale * _lam1(xv[i] - cv[i])
    return out


def lamsum_hdiag1(x, c, double scale):
    cdef cnp.ndarray[double, ndim=1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] cv = np.ascontiguousarray(c, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] out = np.empty(xv.shape[0], dtype=np.float64)
    cdef Py_ssize_t i
    for i in range(xv.shape[0]):
        out[i] = scale * _lam2(xv[i] - cv[i])
    return out
