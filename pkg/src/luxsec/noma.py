"""Two-user NOMA link budget: SINRs, rate lower bounds and secrecy capacity.

The untrusted user always takes the higher power and decodes first; the
trusted user removes that signal by SIC before decoding its own.

All formula functions broadcast over numpy arrays so the power search can
score a whole population at once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import OpticalParams

E_OVER_2PI = math.e / (2 * math.pi)
LN2 = math.log(2.0)


@dataclass(frozen=True)
class PowerSplit:
    p_t: float
    p_u: float
    p_led: float = 1.0

    def __post_init__(self):
        if not self.p_t > 0:
            raise ValueError(f"p_t must be positive, got {self.p_t}")
        if not self.p_u > self.p_t:
            raise ValueError(f"p_u must exceed p_t, got p_t={self.p_t}, p_u={self.p_u}")
        if self.p_t + self.p_u > self.p_led:
            raise ValueError(f"p_t + p_u = {self.p_t + self.p_u} exceeds the budget {self.p_led}")


@dataclass(frozen=True)
class NoiseModel:
    sigma_t: float
    sigma_u: float

    def __post_init__(self):
        if not (self.sigma_t > 0 and self.sigma_u > 0):
            raise ValueError("noise standard deviations must be positive")

    @classmethod
    def from_snr_db(cls, snr_db: float, params: OpticalParams, p_led: float = 1.0) -> "NoiseModel":
        """Equal noise at both users for a transmit SNR of 20 log10(rho P_LED / sigma)."""
        sigma = params.responsivity * p_led / 10 ** (snr_db / 20)
        return cls(sigma, sigma)


@dataclass(frozen=True)
class RateRequirements:
    r_min_t: float
    r_min_u: float

    def __post_init__(self):
        if self.r_min_t < 0 or self.r_min_u < 0:
            raise ValueError("minimum rates must be non-negative")


def rho_terms(params: OpticalParams) -> tuple[float, float]:
    """(rho factor of the secrecy bound, coefficient of the interference term)."""
    rho = params.responsivity
    return (rho**2 if params.secrecy_rho_squared else rho,
            rho**2 if params.interference_rho_squared else 1.0)


def sinr_trusted_raw(h_t, p_t, sigma_t, params: OpticalParams):
    rho = params.responsivity
    return (rho * p_t * h_t) ** 2 / sigma_t**2


def sinr_untrusted_raw(h_u, p_t, p_u, sigma_u, params: OpticalParams):
    rho = params.responsivity
    _, kappa = rho_terms(params)
    h2 = np.square(h_u)
    return rho**2 * np.square(p_u) * h2 / (kappa * np.square(p_t) * h2 + sigma_u**2)


def rate(sinr, bandwidth: float):
    """Achievable-rate lower bound 0.5 W log2(1 + e/(2 pi) sinr) in bit/s."""
    r = 0.5 * bandwidth / LN2 * np.log1p(E_OVER_2PI * np.asarray(sinr, dtype=float))
    return float(r) if np.ndim(r) == 0 else r


def secrecy_capacity_raw(h_t, h_u, p_t, p_u, sigma_t, sigma_u, params: OpticalParams):
    """Secrecy bound for raw arrays; broadcasts.

    Evaluated as the difference of two log1p terms, which equals the single
    logarithm of the ratio but keeps full precision when either SNR is small.
    """
    rho_s, _ = rho_terms(params)
    legit = E_OVER_2PI * rho_s * np.square(p_t) * np.square(h_t) / sigma_t**2
    leak = rho_s * np.square(p_u) * np.square(h_u) / sigma_u**2
    c = 0.5 * params.bandwidth / LN2 * (np.log1p(legit) - np.log1p(leak))
    return float(c) if np.ndim(c) == 0 else c


def sinr_trusted(h_t: float, p: PowerSplit, noise: NoiseModel, params: OpticalParams) -> float:
    return float(sinr_trusted_raw(h_t, p.p_t, noise.sigma_t, params))


def sinr_untrusted(h_u: float, p: PowerSplit, noise: NoiseModel, params: OpticalParams) -> float:
    return float(sinr_untrusted_raw(h_u, p.p_t, p.p_u, noise.sigma_u, params))


def secrecy_capacity(h_t: float, h_u: float, p: PowerSplit, noise: NoiseModel,
                     params: OpticalParams) -> float:
    """Secrecy-capacity lower bound of the trusted user in bit/s.

    Can be negative; callers that report it clamp at zero.
    """
    return secrecy_capacity_raw(h_t, h_u, p.p_t, p.p_u, noise.sigma_t, noise.sigma_u, params)


def user_rates(h_t, h_u, p_t, p_u, noise: NoiseModel, params: OpticalParams):
    """(R_t, R_u) for effective gains and powers; broadcasts."""
    w = params.bandwidth
    r_t = rate(sinr_trusted_raw(h_t, p_t, noise.sigma_t, params), w)
    r_u = rate(sinr_untrusted_raw(h_u, p_t, p_u, noise.sigma_u, params), w)
    return r_t, r_u


def snr_threshold(r_min: float, bandwidth: float) -> float:
    """SINR needed for ``rate`` to reach ``r_min``."""
    try:
        return (2 * math.pi / math.e) * math.expm1(2 * r_min / bandwidth * LN2)
    except OverflowError:
        return math.inf
