"""Channel model: noise law, phase-averaged kernel K(x, y), discrete inputs, sampler.

Everything is expressed in modulus-squared variables: an input mass at ``x``
means |X|^2 = x with a uniform, independent phase.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import logsumexp

from . import _backend
from .quadrature import (
    DEFAULT_CONFIG,
    QuadratureConfig,
    QuadratureError,
    TWO_PI,
    initial_panels,
    integrate_halfline,
    integrate_periodic,
    panel_rule,
    y_window,
)
from .specfun import log_bessel_i0

# relative trapezoid error accepted per kernel-matrix entry
_MATRIX_THETA_TOL = 1e-9
_MATRIX_MAX_DOUBLINGS = 4


class InfeasibleInputError(ValueError):
    """The input violates the average power constraint."""


@dataclass(frozen=True)
class ChannelParams:
    snr: float
    inr: float

    def __post_init__(self):
        for name in ("snr", "inr"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        object.__setattr__(self, "snr", float(self.snr))
        object.__setattr__(self, "inr", float(self.inr))


@dataclass(frozen=True)
class DiscreteInput:
    """Finite law of |X|^2: strictly increasing ``locations`` with ``probs`` summing to one."""

    locations: tuple
    probs: tuple

    def __post_init__(self):
        x = tuple(float(v) for v in self.locations)
        p = tuple(float(v) for v in self.probs)
        if not x or len(x) != len(p):
            raise ValueError("locations and probs must be non-empty and of equal length")
        if x[0] < 0 or any(b <= a for a, b in zip(x, x[1:])):
            raise ValueError(f"locations must be >= 0 and strictly increasing: {x}")
        if any(not (0 < q <= 1) for q in p):
            raise ValueError(f"probabilities must lie in (0, 1]: {p}")
        if abs(math.fsum(p) - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {math.fsum(p)!r}, not 1")
        object.__setattr__(self, "locations", x)
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_arrays(cls, locations, probs, *, drop_below: float = 0.0) -> "DiscreteInput":
        """Sort, drop masses at or below ``drop_below``, merge duplicates, renormalize."""
        x = np.asarray(locations, dtype=float)
        p = np.asarray(probs, dtype=float)
        keep = p > drop_below
        x, p = x[keep], p[keep]
        order = np.argsort(x, kind="stable")
        x, p = x[order], p[order]
        merged_x, merged_p = [], []
        for xi, pi in zip(x, p):
            if merged_x and xi == merged_x[-1]:
                merged_p[-1] += pi
            else:
                merged_x.append(float(xi))
                merged_p.append(float(pi))
        total = math.fsum(merged_p)
        return cls(tuple(merged_x), tuple(q / total for q in merged_p))

    @classmethod
    def single(cls, x: float) -> "DiscreteInput":
        return cls((float(x),), (1.0,))

    @property
    def size(self) -> int:
        return len(self.locations)

    @property
    def x(self) -> np.ndarray:
        return np.array(self.locations)

    @property
    def p(self) -> np.ndarray:
        return np.array(self.probs)

    @property
    def power(self) -> float:
        return math.fsum(a * b for a, b in zip(self.locations, self.probs))

    def check_power(self, params: ChannelParams, slack: float = 1e-9) -> None:
        if self.power > params.snr + slack:
            raise InfeasibleInputError(
                f"input power {self.power:.9g} exceeds SNR {params.snr:.9g}"
            )

    def to_dict(self) -> dict:
        return {"points": [{"x": a, "p": b} for a, b in zip(self.locations, self.probs)]}

    @classmethod
    def from_dict(cls, data: dict) -> "DiscreteInput":
        try:
            pts = data["points"]
            xs = [float(pt["x"]) for pt in pts]
            ps = [float(pt["p"]) for pt in pts]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed input distribution: {exc}") from None
        if abs(math.fsum(ps) - 1.0) > 1e-6:
            raise ValueError(f"probabilities sum to {math.fsum(ps)}, not 1")
        if any(q <= 0 for q in ps):
            raise ValueError("probabilities must be positive")
        total = math.fsum(ps)
        if abs(total - 1.0) > 1e-12:
            ps = [q / total for q in ps]
        return cls(tuple(xs), tuple(ps))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "DiscreteInput":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class SampleBatch:
    values: np.ndarray
    seed: int
    count: int


def _check_nonneg(name, v):
    if np.any(np.asarray(v) < 0):
        raise ValueError(f"{name} must be >= 0")


def noise_modsq_logpdf(t, params: ChannelParams):
    """log of exp(-(t + I)) I0(2 sqrt(t I)), the law of |W|^2."""
    _check_nonneg("t", t)
    t = np.asarray(t, dtype=float)
    out = -t - params.inr + log_bessel_i0(2.0 * np.sqrt(t * params.inr))
    return float(out) if out.ndim == 0 else out


def noise_modsq_pdf(t, params: ChannelParams):
    """Density of |W|^2: noncentral chi-square with 2 degrees of freedom."""
    return np.exp(noise_modsq_logpdf(t, params))


def _kernel_integrand(x, y, inr):
    sxy = 2.0 * math.sqrt(x * y)

    def f(theta):
        xi = np.maximum(y + x - sxy * np.cos(theta), 0.0)
        return np.exp(-inr - xi + log_bessel_i0(2.0 * np.sqrt(inr * xi))) / TWO_PI

    return f


def _kernel_alt_integrand(x, y, inr):
    sxi = 2.0 * math.sqrt(x * inr)

    def f(theta):
        u = np.maximum(x + inr + sxi * np.cos(theta), 0.0)
        return np.exp(-(y + u) + log_bessel_i0(2.0 * np.sqrt(y * u))) / TWO_PI

    return f


def kernel(x: float, y: float, params: ChannelParams, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """K(x, y): density of |Y|^2 at y given |X|^2 = x, averaged over the radar phase."""
    _check_nonneg("x", x)
    _check_nonneg("y", y)
    return integrate_periodic(_kernel_integrand(float(x), float(y), params.inr), cfg)


def kernel_alt(x: float, y: float, params: ChannelParams, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """K(x, y) with the phase integral taken in the other order (averaging the noncentrality)."""
    _check_nonneg("x", x)
    _check_nonneg("y", y)
    return integrate_periodic(_kernel_alt_integrand(float(x), float(y), params.inr), cfg)


def log_kernel_matrix(x, y, params: ChannelParams, cfg: QuadratureConfig = DEFAULT_CONFIG,
                      *, alternative: bool = False) -> np.ndarray:
    """log K(x_i, y_j) for vectors of locations and outputs.

    Uses the compiled core; the node count doubles until the nested
    trapezoid error estimate is below 1e-9 relative.
    """
    n = cfg.theta_nodes
    for _ in range(_MATRIX_MAX_DOUBLINGS + 1):
        out, err = _backend.log_kernel_matrix(x, y, params.inr, n, alternative)
        if err <= _MATRIX_THETA_TOL:
            return out
        n *= 2
    raise QuadratureError(f"kernel theta-average not converged at {n // 2} nodes (err {err:.2e})")


def output_logpdf(y, inp: DiscreteInput, params: ChannelParams, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """log f_Y(y; F) computed as a log-sum-exp over the masses."""
    _check_nonneg("y", y)
    ys = np.atleast_1d(np.asarray(y, dtype=float))
    L = log_kernel_matrix(inp.x, ys, params, cfg)
    out = logsumexp(L + np.log(inp.p)[:, None], axis=0)
    return float(out[0]) if np.ndim(y) == 0 else out


def output_pdf(y, inp: DiscreteInput, params: ChannelParams, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """f_Y(y; F) = sum_i p_i K(x_i, y)."""
    return np.exp(output_logpdf(y, inp, params, cfg))


def beta_of_input(inp: DiscreteInput) -> float:
    """-ln E[exp(-X)], the offset in the output-pdf lower bound."""
    return -float(logsumexp(-inp.x, b=inp.p))


def output_window(params: ChannelParams, x_low: float, x_high: float,
                  cfg: QuadratureConfig = DEFAULT_CONFIG):
    """Integration window and starting panel count for kernels with x in [x_low, x_high]."""
    lo, hi = y_window(params.inr, x_low, x_high, cfg)
    return lo, hi, initial_panels(lo, hi, params.inr, x_low)


def integrate_against_kernel(g, x: float, params: ChannelParams,
                             cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Integral of g(y) K(x, y) dy over the window where K(x, .) lives."""
    lo, hi, n0 = output_window(params, x, x, cfg)
    xs = np.array([float(x)])

    def integrand(y):
        return np.exp(log_kernel_matrix(xs, y, params, cfg)[0]) * g(y)

    return integrate_halfline(integrand, hi, cfg, y_lower=lo, min_panels=n0)


def kernel_mass(x: float, params: ChannelParams, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Integral of K(x, y) over y; one up to the tail budget."""
    return integrate_against_kernel(np.ones_like, x, params, cfg)


def conditional_mean_quadrature(x: float, params: ChannelParams,
                                cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    return integrate_against_kernel(lambda y: y, x, params, cfg)


def conditional_mean(x: float, params: ChannelParams, *, verify: bool = False,
                     cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """E[|Y|^2 | |X|^2 = x] = x + I + 1.

    With ``verify=True`` the moment is also integrated numerically and an
    ``ArithmeticError`` is raised if the two disagree by more than 1e-7 relative.
    """
    _check_nonneg("x", x)
    mean = float(x) + params.inr + 1.0
    if verify:
        q = conditional_mean_quadrature(x, params, cfg)
        if abs(q - mean) > 1e-7 * mean:
            raise ArithmeticError(f"conditional mean quadrature {q!r} != {mean!r}")
    return mean


def sample_output_modsq(x: float, n: int, seed: int, params: ChannelParams) -> SampleBatch:
    """Draw n values of |sqrt(x) + sqrt(I) e^{j Theta} + Z|^2."""
    _check_nonneg("x", x)
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, TWO_PI, n)
    z = rng.normal(scale=math.sqrt(0.5), size=(2, n))
    re = math.sqrt(x) + math.sqrt(params.inr) * np.cos(theta) + z[0]
    im = math.sqrt(params.inr) * np.sin(theta) + z[1]
    return SampleBatch(values=re * re + im * im, seed=seed, count=n)


def kernel_cdf(x: float, params: ChannelParams, cfg: QuadratureConfig = DEFAULT_CONFIG,
               n_edges: int = 2048) -> PchipInterpolator:
    """CDF of K(x, .) as a monotone interpolant through exact panel integrals."""
    lo, hi = y_window(params.inr, x, x, cfg)
    edges = np.linspace(lo, hi, n_edges + 1)
    nodes, weights = panel_rule(lo, hi, n_edges)
    dens = np.exp(log_kernel_matrix(np.array([float(x)]), nodes, params, cfg)[0])
    panel_mass = (weights * dens).reshape(n_edges, -1).sum(axis=1)
    cdf = np.concatenate([[0.0], np.cumsum(panel_mass)])
    return PchipInterpolator(edges, cdf, extrapolate=False)


def ks_distance(samples: np.ndarray, cdf: PchipInterpolator) -> float:
    """Kolmogorov-Smirnov distance between an empirical sample and a CDF."""
    s = np.sort(np.asarray(samples, dtype=float))
    lo, hi = cdf.x[0], cdf.x[-1]
    F = np.where(s < lo, 0.0, np.where(s > hi, 1.0, np.nan_to_num(cdf(np.clip(s, lo, hi)))))
    n = s.size
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))
