"""Zero-order modified Bessel function of the first kind.

Power series below ``SERIES_SWITCH``, Hankel asymptotic expansion above it.
Everything downstream works with :func:`log_bessel_i0`; the plain value is
only available while ``e**x`` is representable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend

SERIES_SWITCH = 30.0
# ln(I0(x)) at which I0(x) leaves the float64 range
_LOG_MAX = math.log(np.finfo(np.float64).max)


@dataclass(frozen=True)
class BesselEvalResult:
    value: float
    log_value: float


def _series(x: float) -> float:
    t = 0.25 * x * x
    term = total = 1.0
    k = 0
    while term > 1e-17 * total:
        k += 1
        term *= t / (k * k)
        total += term
    return total


def _log_asymptotic(x: float) -> float:
    # a_k = ((2k-1)!!)^2 / (k! 8^k); terms shrink monotonically while k < 2x
    term = 1.0
    corr = 0.0
    for k in range(1, 41):
        term *= (2 * k - 1) ** 2 / (8.0 * k * x)
        corr += term
        if term < 1e-17:
            break
    return x - 0.5 * math.log(2.0 * math.pi * x) + math.log1p(corr)


def log_bessel_i0(x):
    """Natural log of I0(x) for x >= 0; accepts scalars or arrays."""
    if np.ndim(x) == 0:
        x = float(x)
        if x < 0 or math.isnan(x):
            raise ValueError(f"log_bessel_i0 needs x >= 0, got {x}")
        if x < SERIES_SWITCH:
            return math.log(_series(x))
        return _log_asymptotic(x)
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError("log_bessel_i0 needs x >= 0")
    return _backend.log_i0(arr)


def bessel_i0(x):
    """I0(x) for x >= 0.

    Raises
    ------
    OverflowError
        If I0(x) exceeds the float64 range (x above roughly 713.98); use
        :func:`log_bessel_i0` there.
    """
    if np.ndim(x) == 0:
        x = float(x)
        if x < 0 or math.isnan(x):
            raise ValueError(f"bessel_i0 needs x >= 0, got {x}")
        if x < SERIES_SWITCH:
            return _series(x)
        lv = _log_asymptotic(x)
        if lv > _LOG_MAX:
            raise OverflowError(f"I0({x}) overflows float64; use log_bessel_i0")
        return math.exp(lv)
    lv = log_bessel_i0(x)
    if np.any(lv > _LOG_MAX):
        raise OverflowError("I0 overflows float64; use log_bessel_i0")
    return np.exp(lv)


def eval_bessel_i0(x: float) -> BesselEvalResult:
    """Both forms at once; ``value`` is ``inf`` where it would overflow."""
    lv = log_bessel_i0(float(x))
    return BesselEvalResult(value=math.exp(lv) if lv <= _LOG_MAX else math.inf, log_value=lv)
