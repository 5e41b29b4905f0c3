"""Command-line front end: JSON scenario files in, plot-ready CSV out.

Subcommands:
    run     execute a campaign (optionally swept over N or SNR)
    check   validate a configuration file and print the resolved scenario
    oracle  brute-force one small instance and compare with the optimiser

Exit codes: 0 success, 2 configuration error, 3 infeasible campaign, 4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from .altopt import AltOptConfig, SecrecyReport
from .channel import LinkMode, OpticalParams
from .errors import CampaignInfeasible, ConfigInvalid, ConfigNotFound, LuxsecError, OutputError
from .geom import RoomConfig, Vec3
from .noma import RateRequirements
from .power_ga import GaConfig
from .sim import (ORACLE_MAX_ELEMENTS, Scenario, brute_force_oracle, campaign_from_reports,
                  run_campaign, run_trial, run_trials, trial_state)

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_IO = 0, 2, 3, 4
SWEEP_DEFAULTS = {"n": [10, 20, 40, 80], "snr": [60.0, 80.0, 100.0, 120.0]}
MODES = [m.value for m in LinkMode]
TRIAL_HEADER = ["trial", "mode", "n_elements", "snr_db", "c_t", "r_t", "r_u", "feasible", "iters"]


@dataclass(frozen=True)
class RunManifest:
    config_path: str | None = None
    sweep_axis: str | None = None  # "n" | "snr" | None
    sweep_values: tuple = ()
    out_dir: str = "results"
    seed: int = 0
    trials: int | None = None

    def __post_init__(self):
        if self.sweep_axis is not None:
            if self.sweep_axis not in SWEEP_DEFAULTS:
                raise ConfigInvalid("sweep.axis", "must be 'n' or 'snr'")
            vals = list(self.sweep_values)
            if not vals:
                raise ConfigInvalid("sweep.values", "must be non-empty")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ConfigInvalid("sweep.values", "must be strictly increasing")

    def points(self, scn: Scenario) -> list[Scenario]:
        if self.sweep_axis is None:
            return [scn]
        key = "n_elements" if self.sweep_axis == "n" else "snr_tx_db"
        cast = int if self.sweep_axis == "n" else float
        return [replace(scn, **{key: cast(v)}) for v in self.sweep_values]


def fmt(x) -> str:
    """Nine significant digits, the precision of every emitted float."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    return f"{x:.9g}"


# --- configuration -------------------------------------------------------

def _number(obj: dict, key: str, path: str, default, *, check=None, why="", integer=False):
    if key not in obj or obj[key] is None:
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or (integer and not isinstance(v, int)):
        raise ConfigInvalid(path + key, "must be an integer" if integer else "must be a number")
    if not math.isfinite(v):
        raise ConfigInvalid(path + key, "must be finite")
    if check is not None and not check(v):
        raise ConfigInvalid(path + key, why)
    return int(v) if integer else float(v)


def _section(cfg: dict, key: str) -> dict:
    sec = cfg.get(key, {})
    if not isinstance(sec, dict):
        raise ConfigInvalid(key, "must be an object")
    return sec


def _vec(obj, key, path, default):
    if key not in obj or obj[key] is None:
        return default
    v = obj[key]
    if not (isinstance(v, list) and len(v) == 3 and all(isinstance(c, (int, float)) for c in v)):
        raise ConfigInvalid(path + key, "must be a list of three numbers")
    return Vec3(*map(float, v))


def scenario_from_dict(cfg: dict) -> Scenario:
    """Build a Scenario from a parsed config; omitted fields take defaults."""
    if not isinstance(cfg, dict):
        raise ConfigInvalid("<root>", "must be a JSON object")
    d_room, d_opt, d_ga, d_alt = RoomConfig(), OpticalParams(), GaConfig(), AltOptConfig()

    r = _section(cfg, "room")
    dims = _vec(r, "dims", "room.", d_room.dims)
    if min(dims) <= 0:
        raise ConfigInvalid("room.dims", "all dimensions must be positive")
    try:
        room = RoomConfig(
            dims=dims,
            led_pos=_vec(r, "led_pos", "room.", None),
            led_normal=_vec(r, "led_normal", "room.", d_room.led_normal),
            receiver_height=_number(r, "receiver_height", "room.", d_room.receiver_height,
                                    check=lambda h: 0 <= h < dims.z, why="must satisfy 0 <= h < dims.z"),
            pd_normal=_vec(r, "pd_normal", "room.", d_room.pd_normal),
        )
    except ConfigInvalid:
        raise
    except ValueError as e:
        raise ConfigInvalid("room", str(e)) from None

    o = _section(cfg, "optical")
    deg = math.degrees
    flags = {}
    for key in ("secrecy_rho_squared", "interference_rho_squared"):
        flags[key] = o.get(key, getattr(d_opt, key))
        if not isinstance(flags[key], bool):
            raise ConfigInvalid("optical." + key, "must be true or false")
    optical = OpticalParams(
        pd_area=_number(o, "pd_area", "optical.", d_opt.pd_area, check=lambda v: v > 0, why="must be > 0"),
        fov=math.radians(_number(o, "fov_deg", "optical.", deg(d_opt.fov),
                                 check=lambda v: 0 < v <= 90, why="must lie in (0, 90]")),
        half_intensity=math.radians(_number(o, "half_intensity_deg", "optical.", deg(d_opt.half_intensity),
                                            check=lambda v: 0 < v < 90, why="must lie in (0, 90)")),
        filter_gain=_number(o, "filter_gain", "optical.", d_opt.filter_gain, check=lambda v: v > 0,
                            why="must be > 0"),
        refractive_index=_number(o, "refractive_index", "optical.", d_opt.refractive_index,
                                 check=lambda v: v >= 1, why="must be >= 1"),
        responsivity=_number(o, "responsivity", "optical.", d_opt.responsivity, check=lambda v: v > 0,
                             why="must be > 0"),
        bandwidth=_number(o, "bandwidth", "optical.", d_opt.bandwidth, check=lambda v: v > 0, why="must be > 0"),
        **flags,
    )

    g = _section(cfg, "ga")
    a = _section(cfg, "altopt")
    try:
        ga = GaConfig(
            population_size=_number(g, "population_size", "ga.", d_ga.population_size, integer=True,
                                    check=lambda v: v >= 2, why="must be >= 2"),
            n_generations=_number(g, "n_generations", "ga.", d_ga.n_generations, integer=True,
                                  check=lambda v: v >= 1, why="must be >= 1"),
            max_time=_number(g, "max_time", "ga.", d_ga.max_time, check=lambda v: v > 0, why="must be > 0"),
            crossover_prob=_number(g, "crossover_prob", "ga.", d_ga.crossover_prob,
                                   check=lambda v: 0 <= v <= 1, why="must lie in [0, 1]"),
            mutation_prob=_number(g, "mutation_prob", "ga.", d_ga.mutation_prob,
                                  check=lambda v: 0 <= v <= 1, why="must lie in [0, 1]"),
            elite_count=_number(g, "elite_count", "ga.", d_ga.elite_count, integer=True,
                                check=lambda v: v >= 0, why="must be >= 0"),
            restart_rounds=_number(g, "restart_rounds", "ga.", d_ga.restart_rounds, integer=True,
                                   check=lambda v: v >= 1, why="must be >= 1"),
            seed=_number(g, "seed", "ga.", d_ga.seed, integer=True),
        )
    except ConfigInvalid:
        raise
    except ValueError as e:
        raise ConfigInvalid("ga.elite_count", str(e)) from None
    altopt = AltOptConfig(
        delta1=_number(a, "delta1", "altopt.", d_alt.delta1, check=lambda v: v > 0, why="must be > 0"),
        max_iters=_number(a, "max_iters", "altopt.", d_alt.max_iters, integer=True,
                          check=lambda v: v >= 1, why="must be >= 1"),
        ga=ga,
    )

    mode = cfg.get("mode", LinkMode.COMBINED.value)
    if mode not in MODES:
        raise ConfigInvalid("mode", f"must be one of {MODES}")
    req = None
    if "r_min_t" in cfg or "r_min_u" in cfg:
        default = Scenario(optical=optical).req
        req = RateRequirements(
            _number(cfg, "r_min_t", "", default.r_min_t, check=lambda v: v >= 0, why="must be >= 0"),
            _number(cfg, "r_min_u", "", default.r_min_u, check=lambda v: v >= 0, why="must be >= 0"),
        )
    d = Scenario()
    return Scenario(
        room=room,
        n_elements=_number(cfg, "n_elements", "", d.n_elements, integer=True,
                           check=lambda v: v >= 0, why="must be >= 0"),
        element_pitch=_number(cfg, "element_pitch", "", d.element_pitch, check=lambda v: v > 0,
                              why="must be > 0"),
        optical=optical,
        p_led=_number(cfg, "p_led", "", d.p_led, check=lambda v: v > 0, why="must be > 0"),
        snr_tx_db=_number(cfg, "snr_tx_db", "", d.snr_tx_db),
        req=req,
        mode=mode,
        trials=_number(cfg, "trials", "", d.trials, integer=True, check=lambda v: v >= 1, why="must be >= 1"),
        seed=_number(cfg, "seed", "", d.seed, integer=True),
        altopt=altopt,
    )


def _degrees(rad: float) -> float:
    """Degrees for display, tidied only when that keeps the round trip exact."""
    d = math.degrees(rad)
    tidy = round(d, 9)
    return tidy if math.radians(tidy) == rad else d


def scenario_to_dict(scn: Scenario) -> dict:
    o = scn.optical
    return {
        "room": {
            "dims": list(scn.room.dims),
            "led_pos": list(scn.room.led_pos),
            "led_normal": list(scn.room.led_normal),
            "receiver_height": scn.room.receiver_height,
            "pd_normal": list(scn.room.pd_normal),
        },
        "n_elements": scn.n_elements,
        "element_pitch": scn.element_pitch,
        "optical": {
            "pd_area": o.pd_area,
            "fov_deg": _degrees(o.fov),
            "half_intensity_deg": _degrees(o.half_intensity),
            "filter_gain": o.filter_gain,
            "refractive_index": o.refractive_index,
            "responsivity": o.responsivity,
            "bandwidth": o.bandwidth,
            "secrecy_rho_squared": o.secrecy_rho_squared,
            "interference_rho_squared": o.interference_rho_squared,
        },
        "p_led": scn.p_led,
        "snr_tx_db": scn.snr_tx_db,
        "r_min_t": scn.req.r_min_t,
        "r_min_u": scn.req.r_min_u,
        "mode": scn.mode.value,
        "trials": scn.trials,
        "seed": scn.seed,
        "altopt": {"delta1": scn.altopt.delta1, "max_iters": scn.altopt.max_iters},
        "ga": asdict(scn.altopt.ga),
    }


def parse_config(path) -> tuple[Scenario, RunManifest]:
    """Read a JSON config file into a Scenario and RunManifest."""
    if path is None:
        cfg = {}
    else:
        p = Path(path)
        if not p.is_file():
            raise ConfigNotFound(f"config file not found: {p}")
        try:
            cfg = json.loads(p.read_text())
        except json.JSONDecodeError as e:
            raise ConfigInvalid("<root>", f"invalid JSON: {e}") from None
    scn = scenario_from_dict(cfg)
    sweep = _section(cfg, "sweep")
    axis = sweep.get("axis")
    values = sweep.get("values", SWEEP_DEFAULTS.get(axis, []) if axis else [])
    if not isinstance(values, list) or not all(isinstance(v, (int, float)) for v in values):
        raise ConfigInvalid("sweep.values", "must be a list of numbers")
    out = cfg.get("out", "results")
    if not isinstance(out, str):
        raise ConfigInvalid("out", "must be a string")
    manifest = RunManifest(str(path) if path is not None else None, axis, tuple(values), out, scn.seed)
    return scn, manifest


# --- output --------------------------------------------------------------

@dataclass
class SweepPoint:
    value: float | int | None
    results: dict  # mode -> CampaignResult
    oracle: list | None = None  # per-trial oracle SecrecyReport (or None)


def _trial_rows(point: SweepPoint, with_oracle: bool):
    for mode, res in point.results.items():
        scn = res.scenario
        for i, rep in enumerate(res.reports):
            row = [i, mode, scn.n_elements, fmt(scn.snr_tx_db), fmt(rep.c_t), fmt(rep.r_t),
                   fmt(rep.r_u), int(rep.feasible), rep.iterations]
            if with_oracle:
                orc = point.oracle.get(mode) if point.oracle else None
                o = orc[i] if orc else None
                row += [fmt(o.c_t) if o else "", fmt(o.c_t - rep.c_t) if o else ""]
            yield row


def _summary_rows(points: list[SweepPoint], axis: str | None):
    modes = [m for m in MODES if any(m in p.results for p in points)]
    header = ["axis", "value"]
    for m in modes:
        header += [f"{m}_median_c_t", f"{m}_mean_c_t", f"{m}_median_r_t", f"{m}_median_r_u",
                   f"{m}_infeasible"]
    for m in modes:
        if m != LinkMode.LOS_ONLY.value:
            header += [f"{m}_improvement_pct", f"{m}_mean_improvement_pct"]
    rows = [header]
    for p in points:
        row = [axis or "none", fmt(p.value)]
        for m in modes:
            res = p.results.get(m)
            s = res.summary if res else {}
            row += [fmt(s.get("median_c_t")), fmt(s.get("mean_c_t")), fmt(s.get("median_r_t")),
                    fmt(s.get("median_r_u")), res.infeasible_count if res else ""]
        for m in modes:
            if m != LinkMode.LOS_ONLY.value:
                res = p.results.get(m)
                row += [fmt(res.improvement_pct) if res else "",
                        fmt(res.summary.get("mean_improvement_pct")) if res else ""]
        rows.append(row)
    return rows


def emit_results(points: list[SweepPoint], out_dir, manifest: RunManifest, scenario: Scenario,
                 with_oracle: bool = False) -> list[Path]:
    """Write trials.csv, summary.csv and manifest.json into ``out_dir``."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        trial_buf = io.StringIO()
        w = csv.writer(trial_buf, lineterminator="\n")
        w.writerow(TRIAL_HEADER + (["oracle_c_t", "oracle_gap"] if with_oracle else []))
        for p in points:
            w.writerows(_trial_rows(p, with_oracle))
        summary_buf = io.StringIO()
        csv.writer(summary_buf, lineterminator="\n").writerows(_summary_rows(points, manifest.sweep_axis))
        echo = {
            "config_path": manifest.config_path,
            "sweep": {"axis": manifest.sweep_axis, "values": list(manifest.sweep_values)},
            "seed": scenario.seed,
            "trials": scenario.trials,
            "scenario": scenario_to_dict(scenario),
        }
        paths = [out / "trials.csv", out / "summary.csv", out / "manifest.json"]
        paths[0].write_text(trial_buf.getvalue())
        paths[1].write_text(summary_buf.getvalue())
        paths[2].write_text(json.dumps(echo, indent=2, sort_keys=True) + "\n")
    except OSError as e:
        raise OutputError(f"cannot write results to {out}: {e}") from e
    return paths


# --- commands ------------------------------------------------------------

def _oracle_reports(scn: Scenario) -> list[SecrecyReport] | None:
    if scn.n_elements > ORACLE_MAX_ELEMENTS:
        return None
    grid = scn.grid
    return [brute_force_oracle(trial_state(scn, i, grid).for_mode(scn.mode), scn.noise, scn.req,
                               scn.optical, 101, scn.p_led) for i in range(scn.trials)]


def run_sweep(scn: Scenario, manifest: RunManifest, modes: list[str], with_oracle=False,
              workers=None) -> list[SweepPoint]:
    points = []
    los_cache = None
    for point_scn in manifest.points(scn):
        value = None
        if manifest.sweep_axis == "n":
            value = point_scn.n_elements
        elif manifest.sweep_axis == "snr":
            value = point_scn.snr_tx_db
        # the LoS-only campaign ignores the IRS, so an N sweep reuses it
        if los_cache is None or manifest.sweep_axis != "n":
            los_cache = run_trials(replace(point_scn, mode=LinkMode.LOS_ONLY), workers)
        results = {}
        for m in modes:
            if m == LinkMode.LOS_ONLY.value:
                results[m] = campaign_from_reports(replace(point_scn, mode=m), los_cache, los_cache)
            else:
                results[m] = run_campaign(replace(point_scn, mode=m), workers, baseline=los_cache)
        oracle = None
        if with_oracle:
            oracle = {m: _oracle_reports(replace(point_scn, mode=m)) for m in modes}
        points.append(SweepPoint(value, results, oracle))
    return points


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="luxsec", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON scenario file (defaults apply when omitted)")
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--mode", choices=MODES + ["all"])

    run = sub.add_parser("run", help="run a Monte Carlo campaign")
    common(run)
    run.add_argument("--sweep", choices=["n", "snr"])
    run.add_argument("--values", type=float, nargs="+", help="sweep points (default per axis)")
    run.add_argument("--out", help="output directory")
    run.add_argument("--oracle", action="store_true", help="add a brute-force column for N <= 8")

    check = sub.add_parser("check", help="validate a configuration file")
    common(check)

    orc = sub.add_parser("oracle", help="brute-force a single small instance")
    common(orc)
    orc.add_argument("--trial", type=int, default=0)
    orc.add_argument("--grid", type=int, default=101)
    orc.add_argument("--n", type=int, help=f"element count override (at most {ORACLE_MAX_ELEMENTS})")
    return ap


def _resolve(args) -> tuple[Scenario, RunManifest, list[str]]:
    scn, manifest = parse_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        if args.trials < 1:
            raise ConfigInvalid("trials", "must be >= 1")
        overrides["trials"] = args.trials
    mode = args.mode or scn.mode.value
    if mode != "all":
        overrides["mode"] = mode
    scn = replace(scn, **overrides)
    sweep = getattr(args, "sweep", None)
    if sweep is not None or getattr(args, "values", None):
        axis = sweep or manifest.sweep_axis
        if axis is None:
            raise ConfigInvalid("sweep.axis", "--values needs --sweep n|snr")
        values = args.values if getattr(args, "values", None) else SWEEP_DEFAULTS[axis]
        if axis == "n":
            values = [int(v) for v in values]
        manifest = replace(manifest, sweep_axis=axis, sweep_values=tuple(values))
    manifest = replace(manifest, seed=scn.seed, trials=args.trials,
                       out_dir=getattr(args, "out", None) or manifest.out_dir)
    modes = MODES if mode == "all" else [mode]
    return scn, manifest, modes


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scn, manifest, modes = _resolve(args)
        if args.command == "check":
            print(json.dumps(scenario_to_dict(scn), indent=2, sort_keys=True))
            return EXIT_OK
        if args.command == "oracle":
            if args.n is not None:
                scn = replace(scn, n_elements=args.n)
            if scn.n_elements > ORACLE_MAX_ELEMENTS:
                raise ConfigInvalid("n_elements", f"oracle needs at most {ORACLE_MAX_ELEMENTS} elements")
            st = trial_state(scn, args.trial).for_mode(scn.mode)
            orc = brute_force_oracle(st, scn.noise, scn.req, scn.optical, args.grid, scn.p_led)
            rep = run_trial(scn, args.trial)
            print(json.dumps({"oracle_c_t": orc.c_t, "optimize_c_t": rep.c_t,
                              "oracle_feasible": orc.feasible, "optimize_feasible": rep.feasible}))
            return EXIT_OK
        points = run_sweep(scn, manifest, modes, with_oracle=args.oracle)
        for path in emit_results(points, manifest.out_dir, manifest, scn, with_oracle=args.oracle):
            print(path)
        return EXIT_OK
    except (ConfigNotFound, ConfigInvalid) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except CampaignInfeasible as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OutputError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except LuxsecError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
