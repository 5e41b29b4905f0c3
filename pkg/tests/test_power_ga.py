import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import PARAMS, W, room_state
from luxsec.errors import NoFeasiblePower
from luxsec.irs_alloc import allocate
from luxsec.noma import PowerSplit, RateRequirements, secrecy_capacity
from luxsec.power_ga import (REPAIR_EPS, GaConfig, PowerProblem, evolve_generation, fitness,
                             from_genes, random_population, repair, run_adaptive_restart, to_genes)

FLOOR = RateRequirements(1e-7 * W, 1e-7 * W)


def make_problem(trial=0, n=8, mode="combined", snr=80.0, req=FLOOR):
    state, scn = room_state(n, trial, mode, snr)
    G = allocate(state, PowerSplit(0.3, 0.7), scn.noise, req, PARAMS)
    return PowerProblem.from_allocation(G, state, scn.noise, req, PARAMS)


def test_fitness_equals_secrecy_when_feasible():
    prob = make_problem()
    pop = np.array([[0.2, 0.7], [0.1, 0.85]])
    f = fitness(pop, prob)
    for row, val in zip(pop, f):
        expected = secrecy_capacity(prob.h_t, prob.h_u, PowerSplit(*row), prob.noise, PARAMS)
        assert val == expected


def test_penalty_dominated_by_every_feasible_chromosome():
    prob = make_problem()
    r_t, r_u = prob.rates(0.2, 0.7)
    tight = PowerProblem(prob.h_t, prob.h_u, prob.noise, RateRequirements(0.0, r_u * 1.01), PARAMS)
    feasible = random_population(500, 1.0, np.random.default_rng(1))
    feasible = feasible[tight.violation(feasible[:, 0], feasible[:, 1]) == 0]
    assert len(feasible) > 10
    f_bad = fitness(np.array([[0.2, 0.7]]), tight)[0]
    assert tight.violation(0.2, 0.7) > 0
    assert np.all(fitness(feasible, tight) > f_bad)
    assert f_bad < tight.objective_floor


def test_penalty_grows_with_violation():
    prob = make_problem()
    strict = PowerProblem(prob.h_t, prob.h_u, prob.noise, RateRequirements(0.0, 1e9), PARAMS)
    f = fitness(np.array([[0.3, 0.6], [0.45, 0.5]]), strict)
    assert f[0] > f[1]


def test_fitness_ordering_matches_direct_comparison():
    prob = make_problem(3)
    a, b = np.array([[0.15, 0.8]]), np.array([[0.3, 0.6]])
    ca = secrecy_capacity(prob.h_t, prob.h_u, PowerSplit(0.15, 0.8), prob.noise, PARAMS)
    cb = secrecy_capacity(prob.h_t, prob.h_u, PowerSplit(0.3, 0.6), prob.noise, PARAMS)
    assert (fitness(a, prob)[0] > fitness(b, prob)[0]) == (ca > cb)


def test_repair_examples():
    eps = REPAIR_EPS
    out = repair([[0.6, 0.6]], 1.0)[0]
    assert out[0] == pytest.approx(0.5 - eps / 2, abs=1e-15)
    assert out[1] == pytest.approx(0.5 + eps / 2, abs=1e-15)
    assert out.sum() <= 1.0 and out[1] > out[0]
    np.testing.assert_array_equal(repair([[0.2, 0.5]], 1.0), [[0.2, 0.5]])
    np.testing.assert_array_equal(repair([[0.5, 0.2]], 1.0), [[0.2, 0.5]])


@settings(max_examples=1000)
@given(st.floats(-2, 3), st.floats(-2, 3), st.sampled_from([1.0, 0.5, 2.0]))
def test_repair_idempotent_and_feasible(a, b, p_led):
    once = repair([[a, b]], p_led)
    twice = repair(once, p_led)
    np.testing.assert_array_equal(once, twice)
    p_t, p_u = once[0]
    assert p_t > 0 and p_u > p_t and p_t + p_u <= p_led
    PowerSplit(p_t, p_u, p_led)


def test_gene_encoding_round_trip():
    pop = random_population(200, 1.0, np.random.default_rng(0))
    genes = to_genes(pop, 1.0)
    assert np.all((genes >= 0) & (genes <= 1))
    np.testing.assert_allclose(from_genes(genes, 1.0), pop, rtol=1e-12)


def test_random_population_feasible():
    pop = random_population(1000, 2.0, np.random.default_rng(4))
    assert np.all(pop[:, 0] > 0) and np.all(pop[:, 1] > pop[:, 0]) and np.all(pop.sum(axis=1) <= 2.0)


def test_no_operators_keeps_population():
    prob = make_problem()
    rng = np.random.default_rng(2)
    pop = random_population(20, 1.0, rng)
    fit = fitness(pop, prob)
    cfg = GaConfig(population_size=20, crossover_prob=0.0, mutation_prob=0.0)
    new, new_fit = evolve_generation(pop, fit, cfg, rng, prob)
    assert new.shape == pop.shape
    rows = {tuple(r) for r in pop}
    assert all(tuple(r) in rows for r in new)
    np.testing.assert_array_equal(new_fit, fitness(new, prob))


def test_elitism_and_monotone_best():
    prob = make_problem(5)
    cfg = GaConfig(population_size=12)
    for seed in range(1000):
        rng = np.random.default_rng(seed)
        pop = random_population(12, 1.0, rng)
        fit = fitness(pop, prob)
        new, new_fit = evolve_generation(pop, fit, cfg, rng, prob)
        best = pop[np.argmax(fit)]
        assert any(np.array_equal(best, r) for r in new)
        assert new_fit.max() >= fit.max()
        assert np.all(new[:, 1] > new[:, 0]) and np.all(new.sum(axis=1) <= 1.0)


@pytest.mark.parametrize("trial", range(5))
def test_ga_matches_budget_edge_grid(trial):
    prob = make_problem(trial)
    p_t = np.linspace(1e-4, 0.5 - 1e-4, 10_001)
    p_u = 1.0 - p_t
    grid = np.where(prob.violation(p_t, p_u) == 0, prob.objective(p_t, p_u), -np.inf).max()
    got = run_adaptive_restart(prob, GaConfig(), np.random.default_rng(trial))
    assert prob.objective(got.p_t, got.p_u) >= grid - 0.01 * abs(grid)


def test_ga_deterministic():
    prob = make_problem(2)
    a = run_adaptive_restart(prob, GaConfig(seed=11))
    b = run_adaptive_restart(prob, GaConfig(seed=11))
    assert (a.p_t, a.p_u) == (b.p_t, b.p_u)


def test_restarts_help_over_seed_family():
    prob = make_problem(7, mode="irs_only")
    plain, restarted = [], []
    for seed in range(50):
        base = dict(population_size=10, n_generations=5, seed=seed)
        p1 = run_adaptive_restart(prob, GaConfig(restart_rounds=1, **base))
        p5 = run_adaptive_restart(prob, GaConfig(restart_rounds=5, **base))
        plain.append(prob.objective(p1.p_t, p1.p_u))
        restarted.append(prob.objective(p5.p_t, p5.p_u))
    assert np.median(plain) <= np.median(restarted)
    assert all(b >= a for a, b in zip(plain, restarted))


def test_returned_split_respects_constraints():
    for trial in range(5):
        prob = make_problem(trial, mode="irs_only")
        p = run_adaptive_restart(prob, GaConfig(), np.random.default_rng(trial))
        assert 0 < p.p_t < p.p_u and p.p_t + p.p_u <= 1.0
        assert prob.violation(p.p_t, p.p_u) == 0


def test_no_feasible_power():
    prob = make_problem()
    impossible = PowerProblem(prob.h_t, prob.h_u, prob.noise, RateRequirements(1e12, 1e12), PARAMS)
    with pytest.raises(NoFeasiblePower):
        run_adaptive_restart(impossible, GaConfig(n_generations=3, restart_rounds=1))


def test_time_limit_stops_early():
    prob = make_problem()
    p = run_adaptive_restart(prob, GaConfig(max_time=1e-9, n_generations=10_000, restart_rounds=10))
    assert p.p_t + p.p_u <= 1.0


def test_config_validation():
    with pytest.raises(ValueError):
        GaConfig(elite_count=40)
    with pytest.raises(ValueError):
        GaConfig(crossover_prob=1.5)
