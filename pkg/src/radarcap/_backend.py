"""Pick the compiled kernel core when it is importable.

Set ``RADARCAP_PURE_PYTHON=1`` to force the numpy fallback.
"""

import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
if os.environ.get("RADARCAP_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py
else:
    _impl = _kernels_py


def _vec(a):
    return np.ascontiguousarray(np.atleast_1d(a), dtype=np.float64)


def log_i0(z):
    z = np.asarray(z, dtype=np.float64)
    return _impl.log_i0(_vec(z).ravel()).reshape(z.shape)


def log_kernel_matrix(x, y, inr, n_theta, alternative=False):
    """log K(x_i, y_j) for 1-d ``x`` and ``y`` plus the trapezoid error estimate."""
    if n_theta % 4:
        n_theta += 4 - n_theta % 4
    return _impl.log_kernel_matrix(_vec(x), _vec(y), float(inr), int(n_theta), bool(alternative))


def project_power_simplex(v, x, snr):
    """Euclidean projection of ``v`` onto {p >= 0, sum p = 1, x . p <= snr}."""
    return _impl.project_power_simplex(_vec(v), _vec(x), float(snr))
