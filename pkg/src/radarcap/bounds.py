"""Closed-form and single-integral bounds on capacity, all in bits per channel use."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass

from .channel import ChannelParams
from .quadrature import DEFAULT_CONFIG, QuadratureConfig
from .rates import LN2, gaussian_input_rate, noise_modsq_entropy

BOUND_CSV_FIELDS = ("S", "I", "lower_tin", "upper_genie", "upper_ihara", "upper_ze", "gauss_rate", "high_inr_limit")

# slack allowed in the envelope ordering checks, in bits
_ORDER_TOL = 1e-9


class BoundOrderingError(ArithmeticError):
    """Computed bounds contradict each other beyond numerical slack."""


def lower_treat_as_noise(params: ChannelParams) -> float:
    """Gaussian codebook decoded with the interference lumped into the noise."""
    return math.log2(1.0 + params.snr / (1.0 + params.inr))


def upper_genie(params: ChannelParams) -> float:
    """Interference-free capacity."""
    return math.log2(1.0 + params.snr)


def noise_entropy_complex(params: ChannelParams, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """h(W) of the complex noise-plus-interference in nats.

    A circularly symmetric variable has h(W) = h(|W|^2) + ln(pi).
    """
    return noise_modsq_entropy(params, cfg) + math.log(math.pi)


def upper_ihara(params: ChannelParams, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Gaussian maximum output entropy at power 1 + S + I minus h(W)."""
    h_max = math.log(math.pi * math.e * (1.0 + params.snr + params.inr))
    return (h_max - noise_entropy_complex(params, cfg)) / LN2


def upper_zamir_erez(params: ChannelParams, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Gaussian-input rate plus one bit."""
    return gaussian_input_rate(params, cfg).mi_bits + 1.0


def high_inr_limit(params: ChannelParams) -> float:
    """Capacity as the interference power grows without bound: half the genie rate."""
    return 0.5 * math.log2(1.0 + params.snr)


@dataclass(frozen=True)
class BoundSet:
    S: float
    I: float
    lower_tin: float
    upper_genie: float
    upper_ihara: float
    upper_ze: float
    gauss_rate: float
    high_inr_limit: float

    @property
    def best_upper(self) -> float:
        return min(self.upper_genie, self.upper_ihara, self.upper_ze)

    @property
    def best_lower(self) -> float:
        return max(self.lower_tin, self.gauss_rate)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def bound_envelope(params: ChannelParams, cfg: QuadratureConfig = DEFAULT_CONFIG) -> BoundSet:
    """Every bound at one operating point.

    Raises ``BoundOrderingError`` if the Gaussian rate falls below the
    treat-as-noise rate or above any upper bound.
    """
    gauss = gaussian_input_rate(params, cfg).mi_bits
    b = BoundSet(
        S=params.snr,
        I=params.inr,
        lower_tin=lower_treat_as_noise(params),
        upper_genie=upper_genie(params),
        upper_ihara=upper_ihara(params, cfg),
        upper_ze=gauss + 1.0,
        gauss_rate=gauss,
        high_inr_limit=high_inr_limit(params),
    )
    if b.gauss_rate < b.lower_tin - _ORDER_TOL or b.gauss_rate > b.best_upper + _ORDER_TOL:
        raise BoundOrderingError(f"inconsistent bounds at S={params.snr}, I={params.inr}: {b}")
    return b


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def bounds_to_csv(rows) -> str:
    """CSV text with one line per BoundSet, six significant digits."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BOUND_CSV_FIELDS)
    for b in rows:
        w.writerow([_fmt(getattr(b, k)) for k in BOUND_CSV_FIELDS])
    return buf.getvalue()
