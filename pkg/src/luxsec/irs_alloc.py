"""Reflecting-element allocation for a fixed power split.

The binary assignment is relaxed to the unit box. Because the secrecy
capacity rises with the trusted gain and falls with the untrusted gain, the
relaxed optimum gives the untrusted user the cheapest fractional coverage
that lifts it to its rate floor (a fractional covering knapsack) and every
remaining fraction to the trusted user. The fractional solution is then
rounded element by element and repaired if rounding broke the rate floor.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .channel import TRUSTED, UNTRUSTED, ChannelState, OpticalParams
from .errors import (PowerSplitInfeasible, RoundingInfeasible, ShapeMismatch,
                     TrustedUnreachable, UntrustedUnreachable)
from .noma import NoiseModel, PowerSplit, RateRequirements, rho_terms, snr_threshold

# thresholds are inflated by this relative margin so that the exact rate
# check downstream never fails on the last ulp
GAIN_MARGIN = 1e-9


@dataclass(frozen=True)
class Allocation:
    g_t: np.ndarray
    g_u: np.ndarray

    def __post_init__(self):
        g_t = np.asarray(self.g_t, dtype=np.int8)
        g_u = np.asarray(self.g_u, dtype=np.int8)
        if g_t.shape != g_u.shape or g_t.ndim != 1:
            raise ShapeMismatch("g_t and g_u must be equal-length vectors")
        if not (np.array_equal(g_t, self.g_t) and np.array_equal(g_u, self.g_u)):
            raise ValueError("allocation entries must be binary")
        if np.any((g_t < 0) | (g_t > 1) | (g_u < 0) | (g_u > 1)):
            raise ValueError("allocation entries must be binary")
        if np.any(g_t + g_u > 1):
            raise ValueError("an element can serve at most one user")
        g_t.setflags(write=False)
        g_u.setflags(write=False)
        object.__setattr__(self, "g_t", g_t)
        object.__setattr__(self, "g_u", g_u)

    @property
    def n_elements(self) -> int:
        return len(self.g_t)

    @classmethod
    def all_to(cls, n: int, user: int) -> "Allocation":
        ones, zeros = np.ones(n, np.int8), np.zeros(n, np.int8)
        return cls(ones, zeros) if user == TRUSTED else cls(zeros, ones)

    def gains(self, state: ChannelState) -> tuple[float, float]:
        """Effective (H_t, H_u) under this allocation."""
        h_t = state.h_los[TRUSTED] + state.h_tilde[TRUSTED] @ self.g_t
        h_u = state.h_los[UNTRUSTED] + state.h_tilde[UNTRUSTED] @ self.g_u
        return float(h_t), float(h_u)


@dataclass(frozen=True)
class RelaxedAllocation:
    g_t: np.ndarray
    g_u: np.ndarray

    def __post_init__(self):
        g_t = np.asarray(self.g_t, dtype=float)
        g_u = np.asarray(self.g_u, dtype=float)
        tol = 1e-12
        if g_t.shape != g_u.shape:
            raise ShapeMismatch("g_t and g_u must be equal-length vectors")
        if np.any(g_t < -tol) or np.any(g_u < -tol) or np.any(g_t + g_u > 1 + tol):
            raise ValueError("relaxed allocation outside the unit box")
        object.__setattr__(self, "g_t", g_t)
        object.__setattr__(self, "g_u", g_u)

    def gains(self, state: ChannelState) -> tuple[float, float]:
        h_t = state.h_los[TRUSTED] + state.h_tilde[TRUSTED] @ self.g_t
        h_u = state.h_los[UNTRUSTED] + state.h_tilde[UNTRUSTED] @ self.g_u
        return float(h_t), float(h_u)


class GainThresholds(NamedTuple):
    tau_t: float
    tau_u: float


def gain_thresholds(p: PowerSplit, noise: NoiseModel, req: RateRequirements,
                    params: OpticalParams) -> GainThresholds:
    """Smallest effective gains at which each user meets its minimum rate.

    Raises PowerSplitInfeasible when the interference from the trusted
    user's signal caps the untrusted SINR below the required level.
    """
    rho = params.responsivity
    w = params.bandwidth
    gam_t = snr_threshold(req.r_min_t, w)
    gam_u = snr_threshold(req.r_min_u, w)
    tau_t = noise.sigma_t / (rho * p.p_t) * math.sqrt(gam_t)
    if gam_u == 0.0:
        return GainThresholds(tau_t, 0.0)
    _, kappa = rho_terms(params)
    margin = rho**2 * p.p_u**2 - gam_u * kappa * p.p_t**2
    if margin <= 0:
        raise PowerSplitInfeasible(
            f"untrusted SINR ceiling {rho**2 * p.p_u**2 / (kappa * p.p_t**2):.4g} "
            f"below required {gam_u:.4g}"
        )
    return GainThresholds(tau_t, math.sqrt(gam_u * noise.sigma_u**2 / margin))


def _coverage_order(h_t: np.ndarray, h_u: np.ndarray) -> np.ndarray:
    """Elements useful to the untrusted user, best coverage-per-cost first.

    Zero trusted cost sorts first (infinite ratio); ties keep index order.
    """
    useful = np.flatnonzero(h_u > 0)
    with np.errstate(divide="ignore"):
        ratio = np.where(h_t[useful] > 0, h_u[useful] / np.where(h_t[useful] > 0, h_t[useful], 1.0), np.inf)
    return useful[np.argsort(-ratio, kind="stable")]


def solve_relaxed(state: ChannelState, thresholds: GainThresholds) -> RelaxedAllocation:
    """Exact optimum of the relaxed allocation problem for fixed powers."""
    h_t, h_u = state.h_tilde
    n = state.n_elements
    g_u = np.zeros(n)
    deficit = thresholds.tau_u * (1 + GAIN_MARGIN) - state.h_los[UNTRUSTED]
    if deficit > 0:
        if h_u.sum() < deficit:
            raise UntrustedUnreachable(
                f"all elements give the untrusted user {h_u.sum():.4g}, need {deficit:.4g}"
            )
        remaining = deficit
        for k in _coverage_order(h_t, h_u):
            if h_u[k] >= remaining:
                g_u[k] = remaining / h_u[k]
                break
            g_u[k] = 1.0
            remaining -= h_u[k]
    relaxed = RelaxedAllocation(1.0 - g_u, g_u)
    H_t, _ = relaxed.gains(state)
    if H_t < thresholds.tau_t * (1 + GAIN_MARGIN):
        raise TrustedUnreachable(f"trusted gain {H_t:.4g} below required {thresholds.tau_t:.4g}")
    return relaxed


def round_greedy(relaxed: RelaxedAllocation, state: ChannelState,
                 thresholds: GainThresholds) -> Allocation:
    """Round each element to the user holding the larger fraction, then repair.

    Ties, including elements nobody uses, go to the trusted user. If the
    untrusted user falls below its floor, trusted elements with the best
    untrusted/trusted gain ratio are handed over one at a time.
    """
    to_u = relaxed.g_u > relaxed.g_t
    h_t, h_u = state.h_tilde
    need_u = thresholds.tau_u * (1 + GAIN_MARGIN)
    H_u = state.h_los[UNTRUSTED] + h_u[to_u].sum()
    if H_u < need_u:
        for k in _coverage_order(h_t, h_u):
            if to_u[k]:
                continue
            to_u[k] = True
            H_u += h_u[k]
            if H_u >= need_u:
                break
    g_u = to_u.astype(np.int8)
    alloc = Allocation(1 - g_u, g_u)
    H_t, H_u = alloc.gains(state)
    if H_u < need_u:
        raise RoundingInfeasible("repair ran out of elements for the untrusted user")
    if H_t < thresholds.tau_t * (1 + GAIN_MARGIN):
        raise RoundingInfeasible("rounding left the trusted user below its minimum rate")
    return alloc


def allocate(state: ChannelState, p: PowerSplit, noise: NoiseModel, req: RateRequirements,
             params: OpticalParams) -> Allocation:
    """Relax, solve and round in one call."""
    thresholds = gain_thresholds(p, noise, req, params)
    return round_greedy(solve_relaxed(state, thresholds), state, thresholds)
