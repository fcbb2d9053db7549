"""One-dimensional integration: periodic theta-integrals and half-line y-integrals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

TWO_PI = 2.0 * math.pi
GL_ORDER = 16
# periodic rule gives up after this many doublings of theta_nodes
_MAX_DOUBLINGS = 10


class QuadratureError(ArithmeticError):
    """Raised when an integral does not reach its tolerance within the node/panel cap."""


@dataclass(frozen=True)
class QuadratureConfig:
    theta_nodes: int = 256
    y_rel_tol: float = 1e-9
    y_max_panels: int = 4096
    tail_epsilon: float = 1e-10

    def __post_init__(self):
        if self.theta_nodes < 16 or self.theta_nodes % 2:
            raise ValueError(f"theta_nodes must be even and >= 16, got {self.theta_nodes}")
        if not 0 < self.y_rel_tol < 1e-3:
            raise ValueError(f"y_rel_tol must lie in (0, 1e-3), got {self.y_rel_tol}")
        if not 0 < self.tail_epsilon < 1e-8:
            raise ValueError(f"tail_epsilon must lie in (0, 1e-8), got {self.tail_epsilon}")
        if self.y_max_panels < 1:
            raise ValueError("y_max_panels must be positive")


DEFAULT_CONFIG = QuadratureConfig()


def _trapezoid(f, n):
    # offset nodes keep theta=0 and theta=pi off the grid (log-singular integrands)
    theta = TWO_PI * (np.arange(n) + 0.5) / n
    vals = np.asarray(f(theta), dtype=float)
    h = TWO_PI / n
    return h * vals.sum(), h * np.abs(vals).sum()


def integrate_periodic(f: Callable, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Raw integral of a 2*pi-periodic function over [0, 2*pi].

    ``f`` is called with an array of angles. The node count doubles from
    ``cfg.theta_nodes`` until successive trapezoid sums agree to ``y_rel_tol``
    (relative to the integral of ``|f|``). Integrands with an integrable
    singularity converge only algebraically; for those the sequence is
    Richardson-extrapolated with an order estimated from three successive sums.
    """
    n = cfg.theta_nodes
    estimates = []
    extrapolated = []
    scale = 0.0
    for _ in range(_MAX_DOUBLINGS + 1):
        value, absval = _trapezoid(f, n)
        scale = max(scale, absval)
        estimates.append(value)
        tol = cfg.y_rel_tol * max(scale, 1e-300)
        if len(estimates) >= 2 and abs(estimates[-1] - estimates[-2]) <= tol:
            return estimates[-1]
        if len(estimates) >= 3:
            d_prev = estimates[-2] - estimates[-3]
            d_last = estimates[-1] - estimates[-2]
            if d_last != 0.0 and d_prev / d_last > 1.0:
                ratio = d_prev / d_last
                extrapolated.append(estimates[-1] + d_last / (ratio - 1.0))
                if len(extrapolated) >= 2 and abs(extrapolated[-1] - extrapolated[-2]) <= tol:
                    return extrapolated[-1]
        n *= 2
    raise QuadratureError(
        f"periodic integral not converged at {n // 2} nodes "
        f"(last change {abs(estimates[-1] - estimates[-2]):.3e})"
    )


@lru_cache(maxsize=None)
def _legendre(order):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return nodes, weights


def panel_rule(y_lower: float, y_upper: float, n_panels: int, order: int = GL_ORDER):
    """Nodes and weights of composite Gauss-Legendre on equal panels."""
    g, w = _legendre(order)
    edges = np.linspace(y_lower, y_upper, n_panels + 1)
    a = edges[:-1, None]
    b = edges[1:, None]
    half = 0.5 * (b - a)
    return (a + half * (g + 1.0)).ravel(), (half * w).ravel()


def integrate_halfline(
    f: Callable,
    y_upper: float,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    *,
    y_lower: float = 0.0,
    min_panels: int = 8,
) -> float:
    """Integral of a vectorized ``f`` over [y_lower, y_upper].

    Composite 16-point Gauss-Legendre; the panel count doubles until two
    successive estimates agree to ``cfg.y_rel_tol`` relative to the integral of
    ``|f|``. The caller is responsible for choosing ``y_upper`` past the tail.
    """
    if not y_upper > 0:
        raise ValueError(f"y_upper must be positive, got {y_upper}")
    if not 0 <= y_lower < y_upper:
        raise ValueError(f"need 0 <= y_lower < y_upper, got {y_lower}, {y_upper}")
    n = max(1, min(min_panels, cfg.y_max_panels))
    previous = None
    while True:
        nodes, weights = panel_rule(y_lower, y_upper, n)
        vals = np.asarray(f(nodes), dtype=float)
        value = float(weights @ vals)
        scale = float(weights @ np.abs(vals))
        if previous is not None and abs(value - previous) <= cfg.y_rel_tol * max(scale, 1e-300):
            return value
        if 2 * n > cfg.y_max_panels:
            raise QuadratureError(
                f"half-line integral not converged at {n} panels "
                f"(last change {abs(value - previous) if previous is not None else float('nan'):.3e})"
            )
        previous = value
        n *= 2


def _tail_margin(center: float, eps: float) -> float:
    # solve (center + c) * exp(-c^2) / c <= eps for the envelope exp(-(sqrt(y) - center)^2),
    # then double the exponent budget
    c2 = math.log(1.0 / eps) + math.log1p(center)
    c = math.sqrt(c2)
    c2 = math.log(1.0 / eps) + math.log((center + c) / c + 1.0)
    return math.sqrt(2.0 * c2)


def y_window(inr: float, x_low: float, x_high: float, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """(lower, upper) outside which every K(x, .) with x in [x_low, x_high] has mass < tail_epsilon.

    Given x, sqrt(Y) is the modulus of a Gaussian shifted by an amplitude in
    [|sqrt(x) - sqrt(I)|, sqrt(x) + sqrt(I)], whose density is bounded by
    exp(-(sqrt(y) - amplitude)^2).
    """
    s_inr = math.sqrt(inr)
    top = math.sqrt(x_high) + s_inr
    upper = (top + _tail_margin(top, cfg.tail_epsilon)) ** 2
    # smallest attainable amplitude over the x range
    if math.sqrt(x_low) > s_inr:
        bottom = math.sqrt(x_low) - s_inr
    elif math.sqrt(x_high) < s_inr:
        bottom = s_inr - math.sqrt(x_high)
    else:
        bottom = 0.0
    margin = _tail_margin(bottom, cfg.tail_epsilon)
    lower = (bottom - margin) ** 2 if bottom > margin else 0.0
    return lower, upper


def y_truncation(params, input_upper_x: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Upper truncation point y* for kernels with x <= ``input_upper_x``."""
    return y_window(params.inr, 0.0, input_upper_x, cfg)[1]


def initial_panels(lower: float, upper: float, inr: float, x_high: float = 0.0) -> int:
    """Starting panel count so a panel is no wider than the narrowest output spread."""
    spread = math.sqrt(1.0 + 2.0 * (inr + x_high))
    return max(8, int(math.ceil((upper - lower) / (2.0 * spread))))


@dataclass
class CheckResult:
    check: str
    passed: bool
    max_err: float
    detail: str = ""


@dataclass
class SelftestReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def max_err(self) -> float:
        return max((c.max_err for c in self.checks), default=0.0)

    def as_dicts(self):
        return [
            {"check": c.check, "status": "pass" if c.passed else "fail", "max_err": c.max_err}
            for c in self.checks
        ]


def log_identity_integral(r: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Integral of ln(1 + 2 r cos t + r^2) over [0, 2*pi]; zero for 0 <= r <= 1."""
    return integrate_periodic(lambda t: np.log(1.0 + 2.0 * r * np.cos(t) + r * r), cfg)


def selftest(cfg: QuadratureConfig = DEFAULT_CONFIG) -> SelftestReport:
    """Known-value integrals; failures are reported, never raised."""
    report = SelftestReport()
    for r, tol in ((0.0, 1e-9), (0.3, 1e-9), (0.7, 1e-9), (0.99, 1e-9), (1.0, 1e-6)):
        try:
            err = abs(log_identity_integral(r, cfg))
            report.checks.append(CheckResult(f"log_identity r={r}", err < tol, err))
        except QuadratureError as exc:
            report.checks.append(CheckResult(f"log_identity r={r}", False, math.inf, str(exc)))
    for k, upper in ((0, 60.0), (1, 80.0), (2, 90.0)):
        try:
            val = integrate_halfline(lambda y, k=k: y**k * np.exp(-y), upper, cfg)
            err = abs(val - math.factorial(k))
            report.checks.append(CheckResult(f"gamma({k + 1})", err < 1e-9 * math.factorial(k), err))
        except QuadratureError as exc:
            report.checks.append(CheckResult(f"gamma({k + 1})", False, math.inf, str(exc)))
    return report
