"""Driver-level tests: config handling, file formats, determinism, exit codes."""

import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from poisson_extremes.cli import (
    ExperimentConfig,
    _float_list,
    _int_list,
    load_config,
    main,
    manifest_path,
    read_csv,
    read_manifest,
)
from poisson_extremes.limits import LimitLaw, limit_params, weibull_process_sample
from poisson_extremes.models import ModelSpec
from poisson_extremes.geometry import ConvexBody
from poisson_extremes.sampling import SeededStream


def test_config_validation():
    for bad in (
        {"model": "percolation"},
        {"reps": 0},
        {"m": [0]},
        {"t": [-1.0]},
        {"x_grid": [0.8, 0.4]},
        {"x_grid": [0.4, 0.8], "x_max": 0.5},
        {"strategy": "clever"},
        {"threads": 0},
        {"window": "torus"},
    ):
        with pytest.raises(ValueError):
            ExperimentConfig(**bad)
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"modle": "gilbert"})


def test_config_round_trip():
    cfg = ExperimentConfig(model="gilbert", d=2, t=[50.0, 100.0], m=[1, 2],
                           delta="t**-0.5", out="runs.csv", seed=9)
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg


def test_load_config_toml(tmp_path):
    path = tmp_path / "exp.toml"
    path.write_text('model = "gilbert"\nd = 2\nreps = 5\nseed = 3\nt = [10.0]\n')
    cfg = load_config(str(path), {"reps": 7, "out": None})
    assert cfg.reps == 7 and cfg.seed == 3 and cfg.t == [10.0]
    bad = tmp_path / "bad.toml"
    bad.write_text("model = [unterminated\n")
    with pytest.raises(ValueError):
        load_config(str(bad), {})
    with pytest.raises(ValueError):
        load_config(str(tmp_path / "missing.toml"), {})


def _simulate_args(out, threads=1):
    return ["simulate", "--model", "gilbert", "--d", "2", "--delta", "t**-0.5",
            "--t", "30 40", "--reps", "4", "--m", "1 2", "--seed", "9",
            "--threads", str(threads), "--out", str(out)]


def test_simulate_deterministic_across_threads(tmp_path):
    one = tmp_path / "serial.csv"
    two = tmp_path / "pooled.csv"
    assert main(_simulate_args(one)) == 0
    assert main(_simulate_args(two, threads=3)) == 0
    assert one.read_bytes() == two.read_bytes()
    # and rerunning reproduces the file exactly
    again = tmp_path / "again.csv"
    assert main(_simulate_args(again)) == 0
    assert one.read_bytes() == again.read_bytes()


def test_simulate_manifest_round_trip(tmp_path):
    out = tmp_path / "runs.csv"
    assert main(_simulate_args(out)) == 0
    cfg = read_manifest(manifest_path(str(out)))
    assert cfg == ExperimentConfig(model="gilbert", d=2, delta="t**-0.5",
                                   t=[30.0, 40.0], reps=4, m=[1, 2], seed=9,
                                   threads=1, out=str(out))
    payload = json.loads(manifest_path(str(out)).read_text())
    assert {"package", "python", "numpy", "scipy"} <= set(payload["versions"])


def test_csv_round_trip_and_sentinels(tmp_path):
    out = tmp_path / "runs.csv"
    assert main(_simulate_args(out)) == 0
    rows = read_csv(str(out))
    assert len(rows) == 8
    assert sorted({t for t, _, _, _ in rows}) == [30.0, 40.0]
    for _, _, stats, values in rows:
        assert stats.size == 2
        assert np.all(np.diff(values) >= 0)
        # stat_i is the i-th smallest value, inf when fewer than i exist
        for i in range(2):
            if i < values.size:
                assert stats[i] == values[i]
            else:
                assert np.isinf(stats[i])


def test_semantic_errors_exit_2(tmp_path):
    assert main(["simulate", "--model", "gilbert", "--d", "2", "--reps", "0",
                 "--out", str(tmp_path / "x.csv")]) == 2
    assert main(["simulate", "--model", "gilbert", "--d", "2"]) == 2
    assert main(["verify", "--model", "gilbert", "--d", "2", "--reps", "50"]) == 2
    assert main(["simulate", "--model", "gilbert", "--x-grid", "0.4 0.8",
                 "--x-max", "0.5", "--out", str(tmp_path / "x.csv")]) == 2


def test_constants_closed_form(tmp_path, capsys):
    out = tmp_path / "law.json"
    assert main(["constants", "--model", "sphere_polytope", "--d", "3",
                 "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "sphere_polytope" in text and "closed_form" in text
    payload = json.loads(out.read_text())
    assert payload["gamma"] == 1.0 and payload["tau"] == 2.0
    assert payload["beta"] == pytest.approx(2 * math.pi**2, rel=1e-12)
    assert payload["beta_stderr"] is None


def _write_limit_law_csv(path, law, t, reps, seed, m_max=2, x_max=1.2):
    header = ["t", "rep", "n_values", "empty"]
    header += [f"stat_{i}" for i in range(1, m_max + 1)]
    header.append("values")
    stream = SeededStream(seed)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for rep in range(reps):
            pts = weibull_process_sample(law, x_max, stream.child(rep))
            record = [repr(float(t)), rep, pts.size, int(pts.size == 0)]
            stats = [pts[i] if i < pts.size else np.inf for i in range(m_max)]
            record += [repr(float(v)) for v in stats]
            record.append(";".join(repr(float(v)) for v in pts))
            writer.writerow(record)


def _verify_args(out, reps):
    return ["verify", "--model", "gilbert", "--d", "2", "--delta", "t**-0.5",
            "--t", "100", "--reps", str(reps), "--m", "1 2",
            "--x-grid", "0.4 0.8 1.2", "--x-max", "1.2", "--seed", "123",
            "--cal-reps", "200", "--out", str(out)]


def test_verify_accepts_data_from_the_limit_law(tmp_path, capsys):
    # order statistics drawn from the limit process itself must pass
    out = tmp_path / "limit.csv"
    law = limit_params(ModelSpec(kind="gilbert", d=2, window=ConvexBody.unit_cube(2),
                                 delta_expr="t**-0.5"))
    _write_limit_law_csv(out, law, t=100.0, reps=400, seed=2024)
    assert main(_verify_args(out, reps=400)) == 0
    text = capsys.readouterr().out
    assert "verdict: PASS" in text
    report = json.loads(out.with_suffix(".report.json").read_text())
    assert report["pass"] is True
    assert all(rec["pass"] for rec in report["ks"])
    assert report["law"]["beta"] == pytest.approx(math.pi / 2, rel=1e-12)


def test_verify_rejects_data_from_a_wrong_law(tmp_path, capsys):
    out = tmp_path / "wrong.csv"
    wrong = LimitLaw(gamma=1.0, beta=3.0 * math.pi / 2, tau=2.0)
    _write_limit_law_csv(out, wrong, t=100.0, reps=400, seed=2024)
    assert main(_verify_args(out, reps=400)) == 1
    assert "verdict: FAIL" in capsys.readouterr().out
    report = json.loads(out.with_suffix(".report.json").read_text())
    assert report["pass"] is False


def test_verify_simulates_inline(tmp_path, capsys):
    # no dataset on disk: verify runs the model itself and checks it
    out = tmp_path / "inline.csv"
    args = ["verify", "--model", "gilbert", "--d", "2", "--delta", "t**-0.5",
            "--t", "200", "--reps", "300", "--m", "1", "--x-grid", "0.4 0.8 1.2",
            "--x-max", "1.2", "--seed", "20260815", "--cal-reps", "200",
            "--out", str(out)]
    assert main(args) == 0
    assert "verdict: PASS" in capsys.readouterr().out


def test_variance_table(tmp_path):
    out = tmp_path / "variance.json"
    args = ["variance", "--model", "gilbert", "--d", "1", "--t", "10",
            "--s", "0 0.1", "--reps", "400", "--seed", "5", "--out", str(out)]
    assert main(args) == 0
    rows = json.loads(out.read_text())["rows"]
    assert rows[0]["s"] == 0.0 and rows[0]["variance_u"] == 0.0
    live = rows[1]
    assert live["sigma_t"] == pytest.approx(9.5, rel=1e-12)
    assert live["rho_t"] == pytest.approx(2.0, rel=1e-12)
    assert live["variance_u"] == pytest.approx(46.16666666666667, rel=1e-12)
    assert 30.0 < live["empirical_variance"] < 65.0
    assert 0.0 <= live["tv_empirical"] <= live["tv_bound"]


def test_beta_integrate_command(tmp_path, capsys):
    out = tmp_path / "beta.json"
    args = ["beta-integrate", "--model", "point_simplices", "--d", "2",
            "--window", "box", "--seed", "11", "--out", str(out)]
    assert main(args) == 0
    assert "beta =" in capsys.readouterr().out
    payload = json.loads(out.read_text())
    assert payload["beta"] == pytest.approx(2.0, abs=0.02)
    assert payload["diverged"] is False and payload["stderr"] > 0


def test_flag_list_parsing():
    assert _float_list("0.4,0.8 1.2") == [0.4, 0.8, 1.2]
    assert _int_list("1,2 3") == [1, 2, 3]


def test_module_entrypoint():
    proc = subprocess.run(
        [sys.executable, "-m", "poisson_extremes", "constants",
         "--model", "sphere_polytope", "--d", "3"],
        capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert "19.7392088" in proc.stdout
