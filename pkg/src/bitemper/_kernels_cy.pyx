# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled versions of the hot sampler kernels (see _kernels_py for docs)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, fabs

cnp.import_array()

BACKEND = "cython"

KIND_MIN = 0
KIND_SQRT = 1
KIND_BOUNDED_SQRT = 2
KIND_MAX = 3


cdef inline double _lse2(const double* a, Py_ssize_t m) noexcept nogil:
    cdef double amax = a[0]
    cdef double s = 0.0
    cdef Py_ssize_t j
    for j in range(1, m):
        if a[j] > amax:
            amax = a[j]
    for j in range(m):
        s += exp(a[j] - amax)
    return amax + log(s)


cdef inline double _single_lr(const cnp.uint8_t* bits, const long long* dists,
                              const cnp.uint8_t* modes, Py_ssize_t m,
                              Py_ssize_t p, double theta, double beta,
                              Py_ssize_t i, double base) noexcept nogil:
    # modes is row-major (m, p); flipping bit i moves d_j by +1 when the
    # current bit matches mode j's bit, else -1.
    cdef double buf[64]
    cdef Py_ssize_t j
    cdef double d
    for j in range(m):
        d = <double>dists[j]
        if modes[j * p + i] == bits[i]:
            d += 1.0
        else:
            d -= 1.0
        buf[j] = -theta * d
    return beta * (_lse2(buf, m) - base)


cdef inline double _base_lse(const long long* dists, Py_ssize_t m,
                             double theta) noexcept nogil:
    cdef double buf[64]
    cdef Py_ssize_t j
    for j in range(m):
        buf[j] = -theta * <double>dists[j]
    return _lse2(buf, m)


def log_ratios(cnp.uint8_t[::1] bits, long long[::1] dists,
               cnp.uint8_t[:, ::1] modes, double theta, double beta,
               double[::1] out):
    cdef Py_ssize_t p = bits.shape[0]
    cdef Py_ssize_t m = dists.shape[0]
    if m > 64:
        raise ValueError("compiled kernel supports at most 64 modes")
    cdef double base = _base_lse(&dists[0], m, theta)
    cdef Py_ssize_t i
    with nogil:
        for i in range(p):
            out[i] = _single_lr(&bits[0], &dists[0], &modes[0, 0], m, p,
                                theta, beta, i, base)
    return np.asarray(out)


def single_log_ratio(cnp.uint8_t[::1] bits, long long[::1] dists,
                     cnp.uint8_t[:, ::1] modes, double theta, double beta,
                     Py_ssize_t i):
    cdef Py_ssize_t m = dists.shape[0]
    if m > 64:
        raise ValueError("compiled kernel supports at most 64 modes")
    cdef double base = _base_lse(&dists[0], m, theta)
    return _single_lr(&bits[0], &dists[0], &modes[0, 0], m, bits.shape[0],
                      theta, beta, i, base)


cdef inline double _log_h1(double lr, int kind, double log_gamma) noexcept nogil:
    cdef double v
    if kind == 0:      # min
        return lr if lr < 0.0 else 0.0
    elif kind == 3:    # max
        return lr if lr > 0.0 else 0.0
    elif kind == 1:    # sqrt
        return 0.5 * lr
    else:              # bounded sqrt
        v = lr if lr < 0.0 else 0.0
        if 0.5 * lr - log_gamma < v:
            v = 0.5 * lr - log_gamma
        return v


def log_h(log_r, int kind, double log_gamma):
    arr = np.asarray(log_r, dtype=np.float64)
    flat = np.atleast_1d(arr).ravel().copy()
    cdef double[::1] a = flat
    cdef Py_ssize_t i
    for i in range(a.shape[0]):
        a[i] = _log_h1(a[i], kind, log_gamma)
    if arr.ndim == 0:
        return float(flat[0])
    return flat.reshape(arr.shape)


def informed_step(double[::1] log_r, int kind, double log_gamma, double u):
    cdef Py_ssize_t p = log_r.shape[0]
    cdef double total = 0.0
    cdef double max_abs = 0.0
    cdef double a
    cdef Py_ssize_t i
    h_arr = np.empty(p, dtype=np.float64)
    cdef double[::1] h = h_arr
    for i in range(p):
        a = fabs(log_r[i])
        if a > max_abs:
            max_abs = a
        h[i] = exp(_log_h1(log_r[i], kind, log_gamma))
        total += h[i]
    cdef double z = total / p
    if not (total > 0.0) or total != total:
        return -1, z, max_abs
    cdef double target = u * total
    cdef double acc = 0.0
    cdef Py_ssize_t choice = p - 1
    for i in range(p):
        acc += h[i]
        if target < acc:
            choice = i
            break
    return choice, z, max_abs


def ssiit_advance(cnp.uint8_t[::1] bits, long long[::1] dists,
                  cnp.uint8_t[:, ::1] modes, double theta, double beta,
                  double log_gamma, int adapt, double stat_coeff,
                  double[::1] u_prop, double[::1] u_acc, int kind):
    cdef Py_ssize_t p = bits.shape[0]
    cdef Py_ssize_t m = dists.shape[0]
    if m > 64:
        raise ValueError("compiled kernel supports at most 64 modes")
    cdef Py_ssize_t n = u_prop.shape[0]
    cdef long n_accept = 0
    cdef Py_ssize_t k, i, j
    cdef double base, lr, cand
    with nogil:
        for k in range(n):
            i = <Py_ssize_t>(u_prop[k] * p)
            if i >= p:
                i = p - 1
            base = _base_lse(&dists[0], m, theta)
            lr = _single_lr(&bits[0], &dists[0], &modes[0, 0], m, p,
                            theta, beta, i, base)
            if adapt:
                cand = stat_coeff * fabs(lr)
                if cand > log_gamma:
                    log_gamma = cand
            if log(u_acc[k]) < _log_h1(lr, kind, log_gamma):
                for j in range(m):
                    if modes[j, i] == bits[i]:
                        dists[j] += 1
                    else:
                        dists[j] -= 1
                bits[i] ^= 1
                n_accept += 1
    return log_gamma, n_accept
