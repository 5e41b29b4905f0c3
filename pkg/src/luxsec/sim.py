"""Monte Carlo campaigns over random user placements, plus a brute-force oracle."""
from __future__ import annotations

import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .altopt import AltOptConfig, SecrecyReport, make_report, optimize
from .channel import ChannelState, LinkMode, OpticalParams, channel_state
from .errors import CampaignInfeasible, OracleTooLarge
from .geom import IrsGrid, RoomConfig, place_irs_grid, sample_user_position
from .irs_alloc import Allocation
from .noma import NoiseModel, PowerSplit, RateRequirements, secrecy_capacity_raw, user_rates

DEFAULT_RATE_FLOOR = 1e-7  # bit/s/Hz, both users
ORACLE_MAX_ELEMENTS = 8


@dataclass(frozen=True)
class Scenario:
    room: RoomConfig = RoomConfig()
    n_elements: int = 40
    element_pitch: float = 0.1
    optical: OpticalParams = OpticalParams()
    p_led: float = 1.0
    snr_tx_db: float = 80.0
    req: RateRequirements | None = None  # None: DEFAULT_RATE_FLOOR * bandwidth each
    mode: LinkMode = LinkMode.COMBINED
    trials: int = 1000
    seed: int = 0
    altopt: AltOptConfig = AltOptConfig()

    def __post_init__(self):
        object.__setattr__(self, "mode", LinkMode(self.mode))
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.p_led <= 0:
            raise ValueError("p_led must be positive")
        if self.req is None:
            floor = DEFAULT_RATE_FLOOR * self.optical.bandwidth
            object.__setattr__(self, "req", RateRequirements(floor, floor))

    @property
    def grid(self) -> IrsGrid:
        return place_irs_grid(self.room, self.n_elements, self.element_pitch)

    @property
    def noise(self) -> NoiseModel:
        return NoiseModel.from_snr_db(self.snr_tx_db, self.optical, self.p_led)


def _trial_streams(seed: int, trial_index: int):
    placement, search = np.random.SeedSequence([seed, trial_index]).spawn(2)
    return np.random.default_rng(placement), np.random.default_rng(search)


def trial_state(scn: Scenario, trial_index: int, grid: IrsGrid | None = None) -> ChannelState:
    """Channel state of one trial before the link mode is applied.

    Placements depend only on (seed, trial_index), so every mode and every
    element count sees the same users. The first sampled user is trusted.
    """
    placement, _ = _trial_streams(scn.seed, trial_index)
    trusted = sample_user_position(scn.room, placement)
    untrusted = sample_user_position(scn.room, placement)
    return channel_state(trusted, untrusted, grid if grid is not None else scn.grid,
                         scn.room, scn.optical)


def run_trial(scn: Scenario, trial_index: int, grid: IrsGrid | None = None) -> SecrecyReport:
    """Optimise one placement under the scenario's link mode.

    In los_only mode the elements carry no signal, so they are left out of the
    search and the report's allocation switches every element off.
    """
    state = trial_state(scn, trial_index, grid).for_mode(scn.mode)
    _, search = _trial_streams(scn.seed, trial_index)
    if scn.mode is LinkMode.LOS_ONLY:
        n = state.n_elements
        bare = ChannelState(state.h_los, np.zeros((2, 0)))
        rep = optimize(bare, scn.noise, scn.req, scn.optical, scn.altopt, search, scn.p_led)
        if rep.allocation is not None:
            rep.allocation = Allocation(np.zeros(n, np.int8), np.zeros(n, np.int8))
        return rep
    return optimize(state, scn.noise, scn.req, scn.optical, scn.altopt, search, scn.p_led)


def _run_chunk(args):
    scn, indices = args
    grid = scn.grid
    return [run_trial(scn, i, grid) for i in indices]


def worker_count() -> int:
    """Parallelism from LUXSEC_THREADS (0 or unset: one per CPU)."""
    raw = os.environ.get("LUXSEC_THREADS", "0").strip() or "0"
    n = int(raw)
    return n if n > 0 else (os.cpu_count() or 1)


def run_trials(scn: Scenario, workers: int | None = None) -> list[SecrecyReport]:
    """All trial reports in trial order; identical for any worker count."""
    workers = worker_count() if workers is None else max(1, workers)
    indices = list(range(scn.trials))
    if workers == 1 or scn.trials == 1:
        return _run_chunk((scn, indices))
    chunks = [indices[k::workers] for k in range(workers) if indices[k::workers]]
    with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
        parts = list(pool.map(_run_chunk, [(scn, c) for c in chunks]))
    reports: list[SecrecyReport | None] = [None] * scn.trials
    for chunk, part in zip(chunks, parts):
        for i, rep in zip(chunk, part):
            reports[i] = rep
    return reports


def summarize(reports: list[SecrecyReport]) -> dict:
    ok = [r for r in reports if r.feasible]
    if not ok:
        raise CampaignInfeasible(f"all {len(reports)} trials infeasible")
    c = np.array([r.c_t for r in ok])
    r_t = np.array([r.r_t for r in ok])
    r_u = np.array([r.r_u for r in ok])
    return {
        "median_c_t": float(np.median(c)),
        "mean_c_t": float(np.mean(c)),
        "median_r_t": float(np.median(r_t)),
        "mean_r_t": float(np.mean(r_t)),
        "median_r_u": float(np.median(r_u)),
        "mean_r_u": float(np.mean(r_u)),
        "min_r_u": float(np.min(r_u)),
        "feasible": len(ok),
    }


def _paired(reports, baseline):
    pairs = [(r.c_t, b.c_t) for r, b in zip(reports, baseline) if r.feasible and b.feasible]
    return np.array(pairs, dtype=float).reshape(-1, 2).T


def improvement_pct(reports: list[SecrecyReport], baseline: list[SecrecyReport]) -> float | None:
    """Median over paired trials of the percent gain in C_t over the baseline.

    Pairs are trials feasible in both campaigns. Undefined (None) unless the
    baseline's median C_t is positive; trials whose own baseline C_t is zero
    carry no ratio and are skipped.
    """
    mode_c, base_c = _paired(reports, baseline)
    if base_c.size == 0 or np.median(base_c) <= 0:
        return None
    pos = base_c > 0
    return float(100.0 * np.median(mode_c[pos] / base_c[pos] - 1.0))


def mean_improvement_pct(reports: list[SecrecyReport], baseline: list[SecrecyReport]) -> float | None:
    """Percent gain of the mean C_t over the baseline mean on paired trials."""
    mode_c, base_c = _paired(reports, baseline)
    if base_c.size == 0 or base_c.mean() <= 0:
        return None
    return float(100.0 * (mode_c.mean() / base_c.mean() - 1.0))


@dataclass
class CampaignResult:
    scenario: Scenario
    reports: list[SecrecyReport]
    summary: dict
    improvement_pct: float | None
    infeasible_count: int
    baseline: list[SecrecyReport] | None = field(default=None, repr=False)


def campaign_from_reports(scn: Scenario, reports: list[SecrecyReport],
                          baseline: list[SecrecyReport]) -> CampaignResult:
    if len(baseline) != len(reports):
        raise ValueError("baseline must cover the same trials")
    summary = summarize(reports)
    summary["mean_improvement_pct"] = mean_improvement_pct(reports, baseline)
    return CampaignResult(scn, reports, summary, improvement_pct(reports, baseline),
                          sum(not r.feasible for r in reports), baseline)


def run_campaign(scn: Scenario, workers: int | None = None,
                 baseline: list[SecrecyReport] | None = None) -> CampaignResult:
    """Run every trial and compare against a LoS-only campaign on the same placements.

    ``baseline`` reuses an existing LoS-only run of the same seed and trials.
    """
    reports = run_trials(scn, workers)
    if scn.mode is LinkMode.LOS_ONLY:
        baseline = reports
    elif baseline is None:
        baseline = run_trials(replace(scn, mode=LinkMode.LOS_ONLY), workers)
    return campaign_from_reports(scn, reports, baseline)


def power_grid(n_grid: int, p_led: float = 1.0) -> np.ndarray:
    """Triangular grid (p_t, p_u) with step p_led/(n_grid-1), 0 < p_t < p_u, p_t + p_u <= p_led."""
    k = np.arange(n_grid)
    i, j = np.meshgrid(k, k, indexing="ij")
    keep = (i >= 1) & (j > i) & (i + j <= n_grid - 1)
    step = p_led / (n_grid - 1)
    return np.column_stack([i[keep] * step, j[keep] * step])


def brute_force_oracle(state: ChannelState, noise: NoiseModel, req: RateRequirements,
                       params: OpticalParams, n_grid: int = 101, p_led: float = 1.0) -> SecrecyReport:
    """Exhaustive search over element assignments and a power grid.

    Each element goes to the trusted user, the untrusted user, or nobody
    (3**N assignments); powers range over ``power_grid(n_grid)``.
    """
    n = state.n_elements
    if n > ORACLE_MAX_ELEMENTS:
        raise OracleTooLarge(f"N={n} exceeds the oracle limit of {ORACLE_MAX_ELEMENTS}")
    if not 2 <= n_grid <= 201:
        raise ValueError("n_grid must lie in [2, 201]")
    assign = np.array(list(itertools.product((0, 1, 2), repeat=n)), dtype=np.int8).reshape(3**n, n)
    g_t = (assign == 1).astype(np.int8)
    g_u = (assign == 2).astype(np.int8)
    h_t = state.h_los[0] + g_t @ state.h_tilde[0]
    h_u = state.h_los[1] + g_u @ state.h_tilde[1]
    grid = power_grid(n_grid, p_led)
    p_t, p_u = grid[:, 0][None, :], grid[:, 1][None, :]
    H_t, H_u = h_t[:, None], h_u[:, None]
    c = secrecy_capacity_raw(H_t, H_u, p_t, p_u, noise.sigma_t, noise.sigma_u, params)
    r_t, r_u = user_rates(H_t, H_u, p_t, p_u, noise, params)
    c = np.where((r_t >= req.r_min_t) & (r_u >= req.r_min_u), c, -np.inf)
    best = int(np.argmax(c))
    a, q = np.unravel_index(best, c.shape)
    if not np.isfinite(c[a, q]):
        return SecrecyReport.infeasible(n)
    G = Allocation(g_t[a], g_u[a])
    p = PowerSplit(float(grid[q, 0]), float(grid[q, 1]), p_led)
    return make_report(state, G, p, noise, req, params, 0, [])
