# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: log I0 and phase-averaged kernel matrices.

Must stay numerically interchangeable with ``_kernels_py``; the test suite
runs both backends against each other.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, log1p, sqrt, cos, fabs, M_PI, INFINITY

cnp.import_array()

DEF SERIES_SWITCH = 30.0
DEF LOG_2PI = 1.8378770664093453


cdef inline double _log_i0(double z) noexcept nogil:
    cdef double t, term, total, corr
    cdef int k
    if z < SERIES_SWITCH:
        t = 0.25 * z * z
        term = 1.0
        total = 1.0
        k = 0
        while term > 1e-17 * total:
            k += 1
            term *= t / (<double>k * k)
            total += term
        return log(total)
    term = 1.0
    corr = 0.0
    k = 0
    while k < 40:
        k += 1
        term *= (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * z)
        corr += term
        if term < 1e-17:
            break
    return z - 0.5 * (LOG_2PI + log(z)) + log1p(corr)


def log_i0(double[::1] z):
    cdef Py_ssize_t i, n = z.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _log_i0(z[i])
    return out


def log_kernel_matrix(double[::1] x, double[::1] y, double inr, int n_theta,
                      bint alternative=False):
    """Return (log K[i, j], max relative error estimate) on a trapezoid grid.

    ``n_theta`` must be a multiple of 4; the error estimate compares the
    n_theta-point rule with its nested n_theta/2-point subset.
    """
    cdef Py_ssize_t nx = x.shape[0], ny = y.shape[0]
    cdef int half = n_theta // 2
    cdef int k
    cdef Py_ssize_t i, j
    cdef double sx, sy, sxy, xi, u, lmax, fine, coarse, w, e, err = 0.0
    cdef double sinr = sqrt(inr)
    out = np.empty((nx, ny))
    cdef double[:, ::1] o = out
    cosv = np.cos(2.0 * M_PI * np.arange(half + 1) / n_theta)
    cdef double[::1] c = cosv
    buf_arr = np.empty(half + 1)
    cdef double[::1] buf = buf_arr
    with nogil:
        for i in range(nx):
            sx = sqrt(x[i])
            for j in range(ny):
                sy = sqrt(y[j])
                lmax = -INFINITY
                for k in range(half + 1):
                    if alternative:
                        u = x[i] + inr + 2.0 * sx * sinr * c[k]
                        if u < 0.0:
                            u = 0.0
                        buf[k] = -(y[j] + u) + _log_i0(2.0 * sy * sqrt(u))
                    else:
                        xi = y[j] + x[i] - 2.0 * sx * sy * c[k]
                        if xi < 0.0:
                            xi = 0.0
                        buf[k] = -inr - xi + _log_i0(2.0 * sqrt(inr * xi))
                    if buf[k] > lmax:
                        lmax = buf[k]
                fine = 0.0
                coarse = 0.0
                for k in range(half + 1):
                    w = 1.0 if (k == 0 or k == half) else 2.0
                    e = exp(buf[k] - lmax)
                    fine += w * e
                    if k % 2 == 0:
                        coarse += w * e
                fine /= n_theta
                coarse *= 2.0 / n_theta
                o[i, j] = lmax + log(fine)
                e = fabs(coarse / fine - 1.0)
                if e > err:
                    err = e
    return out, err


cdef void _simplex(double* v, double* work, double* out, int n) noexcept nogil:
    # Euclidean projection of v onto the probability simplex (sort-based)
    cdef int i, j, rho = 0
    cdef double tmp, css = 0.0, theta = 0.0
    for i in range(n):
        work[i] = v[i]
    for i in range(1, n):  # insertion sort, descending; n is small
        tmp = work[i]
        j = i - 1
        while j >= 0 and work[j] < tmp:
            work[j + 1] = work[j]
            j -= 1
        work[j + 1] = tmp
    for i in range(n):
        css += work[i]
        if work[i] - (css - 1.0) / (i + 1) > 0:
            rho = i
            theta = (css - 1.0) / (i + 1)
    for i in range(n):
        out[i] = v[i] - theta if v[i] > theta else 0.0


cdef double _power_at(double* v, double* x, double nu, double* shifted, double* work,
                      double* out, int n) noexcept nogil:
    cdef int i
    cdef double pw = 0.0
    for i in range(n):
        shifted[i] = v[i] - nu * x[i]
    _simplex(shifted, work, out, n)
    for i in range(n):
        pw += out[i] * x[i]
    return pw


def project_power_simplex(double[::1] v, double[::1] x, double snr):
    """Projection onto {p >= 0, sum p = 1, x . p <= snr}; assumes min(x) <= snr."""
    cdef int n = v.shape[0]
    out_arr = np.empty(n)
    scratch = np.empty(2 * n)
    cdef double[::1] out = out_arr
    cdef double[::1] sc = scratch
    cdef double lo = 0.0, hi = 1.0, mid
    cdef int it
    if _power_at(&v[0], &x[0], 0.0, &sc[0], &sc[n], &out[0], n) <= snr:
        return out_arr
    with nogil:
        while _power_at(&v[0], &x[0], hi, &sc[0], &sc[n], &out[0], n) > snr and hi < 1e300:
            hi *= 4.0
        for it in range(400):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if _power_at(&v[0], &x[0], mid, &sc[0], &sc[n], &out[0], n) > snr:
                lo = mid
            else:
                hi = mid
        _power_at(&v[0], &x[0], hi, &sc[0], &sc[n], &out[0], n)
    return out_arr
