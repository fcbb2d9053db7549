"""Pure-numpy twin of the compiled ``_kernels`` extension."""

import numpy as np
from scipy.optimize import brentq

SERIES_SWITCH = 30.0
_LOG_2PI = np.log(2.0 * np.pi)
_SERIES_TERMS = 70
_ASYMPTOTIC_TERMS = 40
# keeps the (nx, ny, n_theta) temporaries around 64 MB
_CHUNK_ELEMENTS = 1 << 23


def log_i0(z):
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = z < SERIES_SWITCH
    if small.any():
        t = 0.25 * z[small] ** 2
        term = np.ones_like(t)
        total = np.ones_like(t)
        for k in range(1, _SERIES_TERMS):
            term = term * t / (k * k)
            total += term
        out[small] = np.log(total)
    big = ~small
    if big.any():
        zb = z[big]
        term = np.ones_like(zb)
        corr = np.zeros_like(zb)
        for k in range(1, _ASYMPTOTIC_TERMS + 1):
            term = term * (2.0 * k - 1.0) ** 2 / (8.0 * k * zb)
            corr += term
            if term.max() < 1e-17:
                break
        out[big] = zb - 0.5 * (_LOG_2PI + np.log(zb)) + np.log1p(corr)
    return out


def log_kernel_matrix(x, y, inr, n_theta, alternative=False):
    x = np.ascontiguousarray(x, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    half = n_theta // 2
    cosv = np.cos(2.0 * np.pi * np.arange(half + 1) / n_theta)
    w = np.full(half + 1, 2.0)
    w[0] = w[-1] = 1.0
    even = np.arange(half + 1) % 2 == 0
    out = np.empty((x.size, y.size))
    err = 0.0
    step = max(1, _CHUNK_ELEMENTS // max(1, y.size * (half + 1)))
    for start in range(0, x.size, step):
        xs = x[start:start + step, None, None]
        yy = y[None, :, None]
        if alternative:
            u = np.maximum(xs + inr + 2.0 * np.sqrt(xs * inr) * cosv, 0.0)
            L = -(yy + u) + log_i0(2.0 * np.sqrt(yy * u))
        else:
            xi = np.maximum(yy + xs - 2.0 * np.sqrt(xs * yy) * cosv, 0.0)
            L = -inr - xi + log_i0(2.0 * np.sqrt(inr * xi))
        lmax = L.max(axis=-1, keepdims=True)
        e = np.exp(L - lmax)
        fine = (e * w).sum(-1) / n_theta
        coarse = (e * w * even).sum(-1) * 2.0 / n_theta
        out[start:start + step] = lmax[..., 0] + np.log(fine)
        err = max(err, float(np.abs(coarse / fine - 1.0).max(initial=0.0)))
    return out, err


def _simplex(v):
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / ind > 0)[0][-1]
    return np.maximum(v - css[rho] / (rho + 1.0), 0.0)


def project_power_simplex(v, x, snr):
    """Projection onto {p >= 0, sum p = 1, x . p <= snr}; assumes min(x) <= snr.

    The answer is the simplex projection of v - nu x, with nu the root of the
    continuous, decreasing power excess.
    """
    p = _simplex(v)
    if p @ x <= snr:
        return p

    def excess(nu):
        return _simplex(v - nu * x) @ x - snr

    hi = 1.0
    while excess(hi) > 0 and hi < 1e300:
        hi *= 4.0
    nu = brentq(excess, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps)
    p = _simplex(v - nu * x)
    while p @ x > snr:  # step to the feasible side of the root
        nu = np.nextafter(nu, np.inf)
        p = _simplex(v - nu * x)
    return p
