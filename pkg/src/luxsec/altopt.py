"""Alternating optimisation of the IRS allocation and the NOMA power split."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import UNTRUSTED, ChannelState, OpticalParams
from .errors import LuxsecError
from .irs_alloc import Allocation, allocate
from .noma import NoiseModel, PowerSplit, RateRequirements, secrecy_capacity, user_rates
from .power_ga import GaConfig, PowerProblem, random_population, run_adaptive_restart

INIT_SPLIT = (0.3, 0.7)
INIT_RETRIES = 50


@dataclass(frozen=True)
class AltOptConfig:
    delta1: float | None = None  # bit/s; None means 1e-3 * bandwidth
    max_iters: int = 20
    ga: GaConfig = GaConfig()

    def __post_init__(self):
        if self.delta1 is not None and self.delta1 <= 0:
            raise ValueError("delta1 must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")

    def tolerance(self, bandwidth: float) -> float:
        return self.delta1 if self.delta1 is not None else 1e-3 * bandwidth


@dataclass
class SecrecyReport:
    c_t: float
    r_t: float
    r_u: float
    allocation: Allocation | None
    power: PowerSplit | None
    feasible: bool
    iterations: int = 0
    trace: list[float] = field(default_factory=list)
    c_t_raw: float = 0.0

    @classmethod
    def infeasible(cls, n_elements: int, iterations: int = 0) -> "SecrecyReport":
        return cls(0.0, 0.0, 0.0, None, None, False, iterations, [], 0.0)


def evaluate(state: ChannelState, G: Allocation, p: PowerSplit, noise: NoiseModel,
             req: RateRequirements, params: OpticalParams) -> tuple[float, float, float, bool]:
    """(C_t raw, R_t, R_u, feasible) for a candidate pair."""
    h_t, h_u = G.gains(state)
    c = secrecy_capacity(h_t, h_u, p, noise, params)
    r_t, r_u = user_rates(h_t, h_u, p.p_t, p.p_u, noise, params)
    ok = r_t >= req.r_min_t and r_u >= req.r_min_u and p.p_t + p.p_u <= p.p_led
    return c, float(r_t), float(r_u), bool(ok)


def make_report(state, G, p, noise, req, params, iterations, trace) -> SecrecyReport:
    c, r_t, r_u, ok = evaluate(state, G, p, noise, req, params)
    return SecrecyReport(max(c, 0.0), r_t, r_u, G, p, ok, iterations, list(trace), c)


def _initial_point(state, noise, req, params, p_led, rng):
    """First feasible (G, P): the fixed split, then uniform resamples.

    Each candidate split is tried with every element on the untrusted user
    and, failing that, with the allocation step's own answer.
    """
    n = state.n_elements
    splits = [INIT_SPLIT]
    splits += [tuple(x / p_led) for x in random_population(INIT_RETRIES, p_led, rng)]
    for frac_t, frac_u in splits:
        p = PowerSplit(frac_t * p_led, frac_u * p_led, p_led)
        G = Allocation.all_to(n, UNTRUSTED)
        if evaluate(state, G, p, noise, req, params)[3]:
            return G, p
        try:
            G = allocate(state, p, noise, req, params)
        except LuxsecError:
            continue
        if evaluate(state, G, p, noise, req, params)[3]:
            return G, p
    return None


def optimize(state: ChannelState, noise: NoiseModel, req: RateRequirements, params: OpticalParams,
             cfg: AltOptConfig = AltOptConfig(), rng: np.random.Generator | None = None,
             p_led: float = 1.0) -> SecrecyReport:
    """Alternate allocation and power steps until C_t stops improving.

    An iterate is accepted only when it does not lower C_t; a rejected iterate
    or a change below the tolerance ends the loop.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.ga.seed)
    start = _initial_point(state, noise, req, params, p_led, rng)
    if start is None:
        return SecrecyReport.infeasible(state.n_elements)
    G, p = start
    c_best = evaluate(state, G, p, noise, req, params)[0]
    trace = [c_best]
    tol = cfg.tolerance(params.bandwidth)
    iterations = 0
    for _ in range(cfg.max_iters):
        iterations += 1
        G_new = G
        if state.n_elements:
            try:
                G_new = allocate(state, p, noise, req, params)
            except LuxsecError:
                G_new = G
        problem = PowerProblem.from_allocation(G_new, state, noise, req, params, p_led)
        try:
            p_new = run_adaptive_restart(problem, cfg.ga, rng, initial=[[p.p_t, p.p_u]])
        except LuxsecError:
            break
        c_new, _, _, ok = evaluate(state, G_new, p_new, noise, req, params)
        if not ok or c_new < c_best:
            break
        gain = c_new - c_best
        G, p, c_best = G_new, p_new, c_new
        trace.append(c_best)
        if gain < tol:
            break
    return make_report(state, G, p, noise, req, params, iterations, trace)
