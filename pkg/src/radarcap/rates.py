"""Differential entropies of modulus-squared laws and the rates built from them.

Entropies are computed in nats; rates are reported in bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import logsumexp

from .channel import (
    ChannelParams,
    DiscreteInput,
    log_kernel_matrix,
    noise_modsq_logpdf,
    output_window,
)
from .quadrature import DEFAULT_CONFIG, QuadratureConfig, initial_panels, integrate_halfline, y_window

LN2 = math.log(2.0)


@dataclass(frozen=True)
class RateBreakdown:
    h_y: float
    h_w: float
    mi_bits: float
    params: ChannelParams
    input_descriptor: Union[DiscreteInput, str]

    def to_dict(self) -> dict:
        desc = self.input_descriptor
        return {
            "S": self.params.snr,
            "I": self.params.inr,
            "h_y_nats": self.h_y,
            "h_w_nats": self.h_w,
            "rate_bits": self.mi_bits,
            "input": desc if isinstance(desc, str) else desc.to_dict(),
        }


def _neg_entropy_density(logf):
    # -f ln f with the f -> 0 limit taken as 0
    f = np.exp(logf)
    return np.where(f > 0.0, -f * logf, 0.0)


def noise_modsq_entropy(params: ChannelParams, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """h(|W|^2) in nats."""
    lo, hi, n0 = output_window(params, 0.0, 0.0, cfg)
    return integrate_halfline(
        lambda t: _neg_entropy_density(noise_modsq_logpdf(t, params)), hi, cfg, y_lower=lo, min_panels=n0
    )


def _mixture_logpdf(inp: DiscreteInput, params, cfg):
    logp = np.log(inp.p)[:, None]

    def logf(y):
        return logsumexp(log_kernel_matrix(inp.x, y, params, cfg) + logp, axis=0)

    return logf


def output_entropy(inp: DiscreteInput, params: ChannelParams, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """h(|Y|^2; F) in nats."""
    lo, hi, n0 = output_window(params, min(inp.locations), max(inp.locations), cfg)
    logf = _mixture_logpdf(inp, params, cfg)
    return integrate_halfline(lambda y: _neg_entropy_density(logf(y)), hi, cfg, y_lower=lo, min_panels=n0)


def marginal_entropy(x: float, inp: DiscreteInput, params: ChannelParams,
                     cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """h(x; F) = -int K(x, y) ln f_Y(y; F) dy in nats."""
    if x < 0:
        raise ValueError("x must be >= 0")
    lo, hi, n0 = output_window(params, x, x, cfg)
    logf = _mixture_logpdf(inp, params, cfg)
    xs = np.array([float(x)])

    def integrand(y):
        return -np.exp(log_kernel_matrix(xs, y, params, cfg)[0]) * logf(y)

    return integrate_halfline(integrand, hi, cfg, y_lower=lo, min_panels=n0)


def mutual_information(inp: DiscreteInput, params: ChannelParams,
                       cfg: QuadratureConfig = DEFAULT_CONFIG) -> RateBreakdown:
    inp.check_power(params)
    h_y = output_entropy(inp, params, cfg)
    h_w = noise_modsq_entropy(params, cfg)
    return RateBreakdown(h_y, h_w, (h_y - h_w) / LN2, params, inp)


def gaussian_output_logpdf(y, params: ChannelParams):
    """log R(y): the |Y|^2 law induced by a proper-complex Gaussian input of power S."""
    s1 = params.snr + 1.0
    scaled = ChannelParams(0.0, params.inr / s1)
    return noise_modsq_logpdf(np.asarray(y, dtype=float) / s1, scaled) - math.log(s1)


def _gaussian_window(params, cfg):
    s1 = params.snr + 1.0
    lo, hi = y_window(params.inr / s1, 0.0, 0.0, cfg)
    return s1 * lo, s1 * hi, initial_panels(lo, hi, params.inr / s1)


def gaussian_output_entropy(params: ChannelParams, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """h(|Y_G|^2) by direct quadrature of R(y)."""
    lo, hi, n0 = _gaussian_window(params, cfg)
    return integrate_halfline(
        lambda y: _neg_entropy_density(gaussian_output_logpdf(y, params)), hi, cfg, y_lower=lo, min_panels=n0
    )


def gaussian_output_entropy_scaled(params: ChannelParams, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Same entropy via |Y_G|^2 = (S+1) |W'|^2 with W' at INR I/(S+1)."""
    s1 = params.snr + 1.0
    return math.log(s1) + noise_modsq_entropy(ChannelParams(0.0, params.inr / s1), cfg)


def gaussian_input_rate(params: ChannelParams, cfg: QuadratureConfig = DEFAULT_CONFIG) -> RateBreakdown:
    h_y = gaussian_output_entropy(params, cfg)
    h_w = noise_modsq_entropy(params, cfg)
    return RateBreakdown(h_y, h_w, (h_y - h_w) / LN2, params, "gaussian")


def cross_entropy_upper(inp: DiscreteInput, params: ChannelParams,
                        cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Upper bound on I(X;Y) in bits from -int f_Y ln R - h(|W|^2)."""
    lo, hi, n0 = output_window(params, min(inp.locations), max(inp.locations), cfg)
    logf = _mixture_logpdf(inp, params, cfg)

    def integrand(y):
        return -np.exp(logf(y)) * gaussian_output_logpdf(y, params)

    cross = integrate_halfline(integrand, hi, cfg, y_lower=lo, min_panels=n0)
    return (cross - noise_modsq_entropy(params, cfg)) / LN2


@dataclass(frozen=True)
class AsymptoticReport:
    mean_sqrt: float
    mean_sqrt_reference: float
    mean_log: float
    mean_log_reference: float

    @property
    def sqrt_deviation(self) -> float:
        return abs(self.mean_sqrt - self.mean_sqrt_reference)

    @property
    def log_deviation(self) -> float:
        return abs(self.mean_log - self.mean_log_reference)


def output_expectation(g, inp: DiscreteInput, params: ChannelParams,
                       cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """E[g(|Y|^2)] under the output law of ``inp``.

    Integrated in u = sqrt(y) so that g with a square-root cusp at 0 stays smooth.
    """
    lo, hi, n0 = output_window(params, min(inp.locations), max(inp.locations), cfg)
    logf = _mixture_logpdf(inp, params, cfg)

    def integrand(u):
        y = u * u
        return 2.0 * u * np.exp(logf(y)) * g(y)

    return integrate_halfline(integrand, math.sqrt(hi), cfg, y_lower=math.sqrt(lo), min_panels=n0)


def _output_log_expectation(inp, params, cfg):
    # y = u^4 turns the ln y singularity at 0 into the smooth-enough 16 u^3 ln u
    lo, hi, n0 = output_window(params, min(inp.locations), max(inp.locations), cfg)
    logf = _mixture_logpdf(inp, params, cfg)

    def integrand(u):
        u = np.maximum(u, 1e-300)
        return 16.0 * u**3 * np.log(u) * np.exp(logf(u**4))

    return integrate_halfline(integrand, hi**0.25, cfg, y_lower=lo**0.25, min_panels=n0)


def asymptotic_diagnostics(inp: DiscreteInput, params: ChannelParams,
                           cfg: QuadratureConfig = DEFAULT_CONFIG) -> AsymptoticReport:
    """E[sqrt(|Y|^2)] and E[ln |Y|^2] against their large-INR expansions.

    The references are sqrt(I) + (S+1)/(4 sqrt(I)) and ln I; they are only
    meaningful for a power-tight input with I well above S+1.
    """
    inr = params.inr
    mean_sqrt = output_expectation(np.sqrt, inp, params, cfg)
    mean_log = _output_log_expectation(inp, params, cfg)
    ref_sqrt = math.sqrt(inr) + (params.snr + 1.0) / (4.0 * math.sqrt(inr)) if inr > 0 else math.nan
    ref_log = math.log(inr) if inr > 0 else math.nan
    return AsymptoticReport(mean_sqrt, ref_sqrt, mean_log, ref_log)
