"""Adaptive-restart genetic algorithm for the NOMA power pair.

A chromosome is the raw pair (p_t, p_u). Crossover and mutation operate on
an equivalent unit-box encoding (total power share, trusted share of the
total) so that offspring can slide along the budget edge and the ordering
edge p_u = p_t, where the optimum usually sits. Decoded offspring are
repaired back onto the feasible triangle; the two rate floors are handled by
a penalty that ranks every infeasible chromosome below every feasible one.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .channel import OpticalParams
from .errors import NoFeasiblePower
from .irs_alloc import Allocation
from .noma import NoiseModel, PowerSplit, RateRequirements, rho_terms, secrecy_capacity_raw, user_rates

MUTATION_SCALE = 0.1  # gene units; 0.1 p_led on the total power
REPAIR_EPS = 1e-6  # fraction of p_led


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 40
    n_generations: int = 50
    max_time: float = 5.0
    crossover_prob: float = 0.8
    mutation_prob: float = 0.1
    elite_count: int = 2
    restart_rounds: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if not 0 <= self.elite_count < self.population_size:
            raise ValueError("elite_count must be smaller than population_size")
        for name in ("crossover_prob", "mutation_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.n_generations < 1 or self.restart_rounds < 1:
            raise ValueError("n_generations and restart_rounds must be at least 1")
        if self.max_time <= 0:
            raise ValueError("max_time must be positive")


class Chromosome(NamedTuple):
    p_t: float
    p_u: float


@dataclass(frozen=True)
class PowerProblem:
    """Power subproblem for a fixed allocation: effective gains plus link budget."""

    h_t: float
    h_u: float
    noise: NoiseModel
    req: RateRequirements
    params: OpticalParams
    p_led: float = 1.0

    @classmethod
    def from_allocation(cls, G: Allocation, state, noise, req, params, p_led=1.0) -> "PowerProblem":
        h_t, h_u = G.gains(state)
        return cls(h_t, h_u, noise, req, params, p_led)

    def objective(self, p_t, p_u):
        n = self.noise
        return secrecy_capacity_raw(self.h_t, self.h_u, p_t, p_u, n.sigma_t, n.sigma_u, self.params)

    def rates(self, p_t, p_u):
        return user_rates(self.h_t, self.h_u, p_t, p_u, self.noise, self.params)

    def violation(self, p_t, p_u):
        """Total rate shortfall in bit/s (zero when both floors hold)."""
        r_t, r_u = self.rates(p_t, p_u)
        return np.maximum(self.req.r_min_t - r_t, 0.0) + np.maximum(self.req.r_min_u - r_u, 0.0)

    @property
    def objective_floor(self) -> float:
        """Lower bound of the objective over the whole power budget."""
        n = self.noise
        rho_s, _ = rho_terms(self.params)
        worst = rho_s * self.p_led**2 * self.h_u**2 / n.sigma_u**2
        return -0.5 * self.params.bandwidth * math.log2(1.0 + worst)


def fitness(pop: np.ndarray, problem: PowerProblem) -> np.ndarray:
    """Secrecy capacity for feasible chromosomes, a dominated penalty otherwise.

    ``pop`` has shape (S, 2) with columns (p_t, p_u).
    """
    pop = np.atleast_2d(pop)
    p_t, p_u = pop[:, 0], pop[:, 1]
    viol = problem.violation(p_t, p_u)
    w = problem.params.bandwidth
    penalised = problem.objective_floor - w * (1.0 + viol / w)
    return np.where(viol > 0, penalised, problem.objective(p_t, p_u))


def repair(pop, p_led: float) -> np.ndarray:
    """Project chromosomes onto the budget with strict ordering p_u > p_t.

    Clamps to [eps, p_led - eps], scales the pair down when the budget is
    exceeded, swaps reversed pairs and separates equal ones by eps, with
    eps = 1e-6 p_led. Idempotent.
    """
    pop = np.array(pop, dtype=float, ndmin=2)
    eps = REPAIR_EPS * p_led
    pop = np.clip(pop, eps, p_led - eps)
    total = pop.sum(axis=1)
    over = total > p_led
    pop[over] *= (p_led / total[over])[:, None]
    # scaling can overshoot the budget by an ulp
    for _ in range(4):
        over = pop.sum(axis=1) > p_led
        if not over.any():
            break
        pop[over, 1] = np.nextafter(pop[over, 1], 0.0)
    pop.sort(axis=1)
    close = pop[:, 1] - pop[:, 0] < eps / 2
    if close.any():
        mid = pop[close].mean(axis=1)
        lo = mid - eps / 2
        low = lo < eps
        pop[close, 0] = np.where(low, eps, lo)
        pop[close, 1] = np.where(low, 2 * eps, mid + eps / 2)
    return pop


def random_population(size: int, p_led: float, rng: np.random.Generator) -> np.ndarray:
    """Uniform samples over {0 < p_t < p_u, p_t + p_u <= p_led}, repaired."""
    u = rng.uniform(size=(size, 2))
    flip = u.sum(axis=1) > 1
    u[flip] = 1 - u[flip]
    # triangle (0,0), (0,1), (1/2,1/2) in barycentric form
    p_t = 0.5 * u[:, 1]
    p_u = u[:, 0] + 0.5 * u[:, 1]
    return repair(np.column_stack([p_t, p_u]) * p_led, p_led)


def _tournament(fit: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    a, b = rng.integers(len(fit), size=(2, n))
    return np.where(fit[b] > fit[a], b, a)


def _elite_order(fit: np.ndarray) -> np.ndarray:
    return np.argsort(-fit, kind="stable")


def to_genes(pop: np.ndarray, p_led: float) -> np.ndarray:
    """Map (p_t, p_u) to unit-box genes (total / p_led, 2 p_t / total)."""
    total = pop.sum(axis=1)
    return np.column_stack([total / p_led, 2 * pop[:, 0] / total])


def from_genes(genes: np.ndarray, p_led: float) -> np.ndarray:
    genes = np.clip(genes, 0.0, 1.0)
    total = genes[:, 0] * p_led
    p_t = 0.5 * genes[:, 1] * total
    return np.column_stack([p_t, total - p_t])


def evolve_generation(pop: np.ndarray, fit: np.ndarray, cfg: GaConfig, rng: np.random.Generator,
                      problem: PowerProblem) -> tuple[np.ndarray, np.ndarray]:
    """One generation: selection, crossover, mutation, repair, elitism.

    Variation acts on the (total power, trusted share) genes, whose box
    bounds are exactly the budget and the NOMA ordering, so the search can
    settle on those limits. Returns the new population and its fitness.
    """
    size = len(pop)
    p_led = problem.p_led
    n_off = size - cfg.elite_count
    n_pairs = -(-n_off // 2)
    idx = _tournament(fit, 2 * n_pairs, rng)
    i1, i2 = idx[:n_pairs], idx[n_pairs:]
    genes = to_genes(pop, p_led)
    g1, g2 = genes[i1], genes[i2]
    beta = rng.uniform(size=(n_pairs, 2))
    cross = rng.uniform(size=n_pairs) < cfg.crossover_prob
    beta[~cross] = 1.0
    k1 = beta * g1 + (1 - beta) * g2
    k2 = (1 - beta) * g1 + beta * g2
    kid_genes = np.concatenate([k1, k2])[:n_off]
    parents = pop[np.concatenate([i1, i2])[:n_off]]
    mutate = rng.uniform(size=kid_genes.shape) < cfg.mutation_prob
    step = rng.normal(0.0, MUTATION_SCALE, size=kid_genes.shape)
    kid_genes = kid_genes + np.where(mutate, step, 0.0)
    changed = mutate.any(axis=1) | np.concatenate([cross, cross])[:n_off]
    # untouched offspring stay bit-identical copies of their parent
    kids = parents.copy()
    if changed.any():
        kids[changed] = repair(from_genes(kid_genes[changed], p_led), p_led)
    kid_fit = fitness(kids, problem)
    elite = _elite_order(fit)[: cfg.elite_count]
    new_pop = np.concatenate([pop[elite], kids])
    new_fit = np.concatenate([fit[elite], kid_fit])
    return new_pop, new_fit


def run_adaptive_restart(problem: PowerProblem, cfg: GaConfig = GaConfig(),
                         rng: np.random.Generator | None = None,
                         initial=None) -> PowerSplit:
    """Best feasible power split found over all restart rounds.

    Each round runs ``n_generations`` generations; later rounds start from the
    previous round's elite plus fresh random chromosomes. ``initial``
    optionally injects known chromosomes into the first population. The wall
    clock limit is checked between generations only.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    size = cfg.population_size
    start = time.monotonic()
    best_x, best_f = None, -np.inf
    pop = random_population(size, problem.p_led, rng)
    if initial is not None:
        seeds = repair(initial, problem.p_led)[:size]
        pop[: len(seeds)] = seeds
    fit = fitness(pop, problem)
    out_of_time = False
    for round_ in range(cfg.restart_rounds):
        if round_ > 0:
            keep = max(cfg.elite_count, 1)
            elite = _elite_order(fit)[:keep]
            fresh = random_population(size - keep, problem.p_led, rng)
            pop = np.concatenate([pop[elite], fresh])
            fit = np.concatenate([fit[elite], fitness(fresh, problem)])
        for _ in range(cfg.n_generations):
            i = int(np.argmax(fit))
            if fit[i] > best_f and problem.violation(*pop[i]) == 0:
                best_x, best_f = pop[i].copy(), float(fit[i])
            if time.monotonic() - start >= cfg.max_time:
                out_of_time = True
                break
            pop, fit = evolve_generation(pop, fit, cfg, rng, problem)
        i = int(np.argmax(fit))
        if fit[i] > best_f and problem.violation(*pop[i]) == 0:
            best_x, best_f = pop[i].copy(), float(fit[i])
        if out_of_time:
            break
    if best_x is None:
        raise NoFeasiblePower("no chromosome met both minimum rates")
    return PowerSplit(float(best_x[0]), float(best_x[1]), problem.p_led)
