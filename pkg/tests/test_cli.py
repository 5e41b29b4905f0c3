import csv
import json
import os
import subprocess
import sys

import pytest

from luxsec.cli import (EXIT_CONFIG, EXIT_IO, EXIT_OK, TRIAL_HEADER, RunManifest, main, parse_config,
                        scenario_from_dict, scenario_to_dict)
from luxsec.errors import ConfigInvalid, ConfigNotFound
from luxsec.geom import Vec3
from luxsec.sim import Scenario


def write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return p


def test_empty_config_gives_defaults(tmp_path):
    scn, manifest = parse_config(write(tmp_path, {}))
    assert scn == Scenario()
    assert scn.room.dims == Vec3(3, 3, 5) and scn.n_elements == 40
    assert scn.snr_tx_db == 80.0 and scn.trials == 1000
    assert manifest.sweep_axis is None


def test_snr_outside_protocol_range_accepted(tmp_path):
    scn, _ = parse_config(write(tmp_path, {"snr_tx_db": 59}))
    assert scn.snr_tx_db == 59.0


def test_zero_trials_rejected(tmp_path):
    with pytest.raises(ConfigInvalid) as err:
        parse_config(write(tmp_path, {"trials": 0}))
    assert err.value.field == "trials" and ">= 1" in str(err.value)


@pytest.mark.parametrize("cfg, field", [
    ({"optical": {"fov_deg": 120}}, "optical.fov_deg"),
    ({"room": {"dims": [3, 3]}}, "room.dims"),
    ({"ga": {"population_size": 1}}, "ga.population_size"),
    ({"mode": "both"}, "mode"),
    ({"sweep": {"axis": "n", "values": [40, 20]}}, "sweep.values"),
    ({"n_elements": 2.5}, "n_elements"),
])
def test_invalid_fields_are_named(tmp_path, cfg, field):
    with pytest.raises(ConfigInvalid) as err:
        parse_config(write(tmp_path, cfg))
    assert err.value.field == field


def test_missing_config(tmp_path):
    with pytest.raises(ConfigNotFound):
        parse_config(tmp_path / "nope.json")
    assert main(["check", "--config", str(tmp_path / "nope.json")]) == EXIT_CONFIG


def test_defaults_round_trip():
    scn = Scenario()
    assert scenario_from_dict(json.loads(json.dumps(scenario_to_dict(scn)))) == scn
    odd = Scenario(n_elements=7, snr_tx_db=101.5, mode="irs_only", trials=3, seed=9)
    assert scenario_from_dict(scenario_to_dict(odd)) == odd


def test_manifest_sweep_validation():
    with pytest.raises(ConfigInvalid):
        RunManifest(sweep_axis="n", sweep_values=())
    with pytest.raises(ConfigInvalid):
        RunManifest(sweep_axis="snr", sweep_values=(60, 60))
    pts = RunManifest(sweep_axis="n", sweep_values=(4, 8)).points(Scenario())
    assert [p.n_elements for p in pts] == [4, 8]


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


def test_single_trial_cardinality(tmp_path):
    out = tmp_path / "out"
    cfg = write(tmp_path, {"n_elements": 4})
    assert main(["run", "--config", str(cfg), "--trials", "1", "--out", str(out)]) == EXIT_OK
    trials = read_csv(out / "trials.csv")
    summary = read_csv(out / "summary.csv")
    assert trials[0] == TRIAL_HEADER
    assert len(trials) == 2 and len(summary) == 2
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 0 and manifest["scenario"]["n_elements"] == 4


def test_rows_parse_back_at_nine_digits(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--trials", "2", "--mode", "irs_only", "--out", str(out),
                 "--sweep", "n", "--values", "4"]) == EXIT_OK
    from luxsec.sim import run_trial
    rows = read_csv(out / "trials.csv")[1:]
    for row in rows:
        rep = run_trial(Scenario(n_elements=4, mode="irs_only", trials=2), int(row[0]))
        assert float(row[4]) == float(f"{rep.c_t:.9g}")
        assert row[4] == f"{rep.c_t:.9g}"


def test_oracle_column_and_subcommand(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "--trials", "2", "--mode", "combined", "--sweep", "n", "--values", "3",
                 "--oracle", "--out", str(out)]) == EXIT_OK
    rows = read_csv(out / "trials.csv")
    assert rows[0][-2:] == ["oracle_c_t", "oracle_gap"]
    assert all(r[-1] != "" for r in rows[1:])
    capsys.readouterr()
    assert main(["oracle", "--n", "3", "--trial", "1", "--grid", "41"]) == EXIT_OK
    res = json.loads(capsys.readouterr().out)
    assert res["oracle_feasible"] and res["optimize_c_t"] >= 0.98 * res["oracle_c_t"]
    assert main(["oracle"]) == EXIT_CONFIG


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["run", "--trials", "1", "--sweep", "n", "--values", "2", "--out",
                 str(blocker / "sub")]) == EXIT_IO


def test_infeasible_exit_code(tmp_path):
    cfg = write(tmp_path, {"n_elements": 2, "r_min_t": 1e12, "r_min_u": 1e12,
                           "ga": {"n_generations": 2, "restart_rounds": 1}})
    assert main(["run", "--config", str(cfg), "--trials", "1", "--out", str(tmp_path / "o")]) == 3


def _cli(args, threads, cwd):
    env = dict(os.environ, LUXSEC_THREADS=str(threads))
    subprocess.run([sys.executable, "-m", "luxsec.cli", *args], check=True, env=env, cwd=cwd,
                   capture_output=True)


def test_byte_identical_across_runs_and_threads(tmp_path):
    args = ["run", "--trials", "4", "--mode", "all", "--sweep", "n", "--values", "3", "6"]
    outs = []
    for k, threads in enumerate((1, 1, 3)):
        d = tmp_path / f"o{k}"
        _cli(args + ["--out", str(d)], threads, tmp_path)
        outs.append(d)
    for name in ("trials.csv", "summary.csv"):
        blobs = {(d / name).read_bytes() for d in outs}
        assert len(blobs) == 1
