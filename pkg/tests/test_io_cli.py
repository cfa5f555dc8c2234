import csv
import json
import math
import shutil
import subprocess
import sys

import numpy as np
import pytest

from motioncurve import Schedule, Trajectory, build_multilevel, fit_trajectory, degrade_chain
from motioncurve import io as mio
from motioncurve.cli import main
from motioncurve.synth import SynthSpec, gen_trajectory, make_frame_mask, sinusoid_fixture, smooth_walk_fixture


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _write_traj(tmp_path, traj, name="traj.json"):
    path = tmp_path / name
    mio.write_trajectory(traj, path)
    return str(path)


# formats -----------------------------------------------------------------------


def test_trajectory_roundtrip_is_exact(tmp_path, rng):
    traj = Trajectory(rng.normal(size=(7, 3, 3)), 29.97)
    path = _write_traj(tmp_path, traj)
    again = mio.read_trajectory(path)
    assert again.fps == traj.fps
    np.testing.assert_array_equal(again.positions, traj.positions)


def test_chain_roundtrip_is_exact(tmp_path, rng):
    chains = [degrade_chain(c, 3) for c in fit_trajectory(Trajectory(rng.normal(size=(10, 2, 3))))]
    mio.write_chains(chains, tmp_path / "c.json", schedule_step=3, fps=10.0)
    back, step, fps = mio.read_chains(tmp_path / "c.json")
    assert (step, fps) == (3, 10.0)
    for a, b in zip(chains, back):
        np.testing.assert_array_equal(a.packed(), b.packed())
        np.testing.assert_array_equal(a.anchor_times, b.anchor_times)


def test_multilevel_roundtrip(tmp_path):
    mlm = build_multilevel(sinusoid_fixture(T=40, K=2), Schedule((16, 4, 1)))
    mio.write_multilevel(mlm, tmp_path / "m.json")
    back = mio.read_multilevel(tmp_path / "m.json")
    assert back.schedule.steps == (16, 4, 1)
    for a, b in zip(mlm.levels, back.levels):
        np.testing.assert_array_equal(a, b)


def test_frame_mask_roundtrip(tmp_path):
    mask = make_frame_mask(20, "random", 0.3, seed=4)
    (tmp_path / "m.csv").write_text(mio.frame_mask_csv(mask))
    np.testing.assert_array_equal(mio.read_frame_mask(tmp_path / "m.csv").observed, mask.observed)


def test_malformed_file_names_field(tmp_path):
    (tmp_path / "bad.json").write_text(json.dumps({"fps": 10, "T": 2, "K": 1}))
    with pytest.raises(mio.FileFormatError, match="frames"):
        mio.read_trajectory(tmp_path / "bad.json")
    (tmp_path / "bad2.json").write_text(json.dumps({"schedule_step": 1, "joints": [{"anchor_times": [0, 1]}]}))
    with pytest.raises(mio.FileFormatError, match="anchors"):
        mio.read_chains(tmp_path / "bad2.json")


def test_declared_shape_mismatch(tmp_path):
    doc = mio.trajectory_to_dict(Trajectory(np.zeros((3, 1, 3))))
    doc["T"] = 4
    (tmp_path / "t.json").write_text(json.dumps(doc))
    with pytest.raises(mio.FileFormatError):
        mio.read_trajectory(tmp_path / "t.json")


def test_csv_is_locale_independent(tmp_path, monkeypatch):
    monkeypatch.setenv("LC_ALL", "de_DE.UTF-8")
    mio.write_csv(tmp_path / "x.csv", ["a", "b"], [[1, 0.1], [2, 1e-20]])
    assert (tmp_path / "x.csv").read_bytes() == b"a,b\n1,0.1\n2,1e-20\n"


def test_config_precedence(tmp_path, monkeypatch):
    monkeypatch.delenv(mio.CONFIG_ENV, raising=False)
    assert mio.load_config().schedule == [32, 16, 8, 1]
    env_cfg = tmp_path / "env.json"
    env_cfg.write_text(json.dumps({"schedule": [4, 1]}))
    arg_cfg = tmp_path / "arg.json"
    arg_cfg.write_text(json.dumps({"schedule": [8, 2, 1], "samples_per_frame": 6}))
    monkeypatch.setenv(mio.CONFIG_ENV, str(env_cfg))
    assert mio.load_config().schedule == [4, 1]
    cfg = mio.load_config(arg_cfg)
    assert cfg.schedule == [8, 2, 1] and cfg.samples_per_frame == 6


def test_config_roundtrip_and_unknown_fields():
    cfg = mio.RunConfig(schedule=[8, 1], synth=SynthSpec("circle", T=20))
    assert mio.RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg
    with pytest.raises(mio.FileFormatError):
        mio.RunConfig.from_dict({"schedul": [8, 1]})


# CLI -----------------------------------------------------------------------------


def test_fit_collinear_residual_zero(tmp_path, capsys):
    traj = Trajectory(np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0], [3, 0, 0]], dtype=float))
    src = _write_traj(tmp_path, traj)
    assert main(["fit", src, "-o", str(tmp_path / "c.json")]) == 0
    assert "interpolation residual: 0" in capsys.readouterr().out


def test_fit_rejects_single_frame(tmp_path, capsys):
    (tmp_path / "one.json").write_text(json.dumps({"fps": 10, "T": 1, "K": 1, "frames": [[[0, 0, 0]]]}))
    assert main(["fit", str(tmp_path / "one.json"), "-o", str(tmp_path / "c.json")]) != 0
    assert "insufficient frames" in capsys.readouterr().err


def test_fit_malformed_json_names_field(tmp_path, capsys):
    (tmp_path / "bad.json").write_text(json.dumps({"fps": 10, "T": 2, "K": 1, "frames": [[[0, 0]], [[1, 1]]]}))
    assert main(["fit", str(tmp_path / "bad.json"), "-o", str(tmp_path / "c.json")]) != 0
    assert "frames" in capsys.readouterr().err


def test_fit_then_resample_reproduces_input(tmp_path):
    traj = smooth_walk_fixture(seed=3, T=60)
    src = _write_traj(tmp_path, traj)
    assert main(["fit", src, "-o", str(tmp_path / "c.json"), "--jobs", "2"]) == 0
    assert main(["resample", str(tmp_path / "c.json"), "-o", str(tmp_path / "r.json")]) == 0
    again = mio.read_trajectory(tmp_path / "r.json")
    assert again.fps == traj.fps
    np.testing.assert_allclose(again.positions, traj.positions, atol=1e-9)


def test_degrade_variants(tmp_path, capsys):
    traj = sinusoid_fixture(T=40, K=2)
    src = _write_traj(tmp_path, traj)
    chains = str(tmp_path / "c.json")
    main(["fit", src, "-o", chains])
    assert main(["degrade", chains, "--step", "4", "-o", str(tmp_path / "d.json")]) == 0
    coarse, step, _ = mio.read_chains(tmp_path / "d_s4.json")
    assert step == 4 and coarse[0].n_anchors == 10
    np.testing.assert_array_equal(coarse[1].anchors, traj.positions[[0, 4, 8, 12, 16, 20, 24, 28, 32, 39], 1])

    assert main(["degrade", chains, "--schedule", "16,8", "-o", str(tmp_path / "e.json")]) == 0
    assert (tmp_path / "e_s16.json").exists() and (tmp_path / "e_s8.json").exists()

    assert main(["degrade", chains, "--schedule", "16,8,1", "--pack", "-o", str(tmp_path / "p.json")]) == 0
    mlm = mio.read_multilevel(tmp_path / "p.json")
    assert mlm.shapes == [(3, 2, 9), (5, 2, 9), (40, 2, 9)]

    capsys.readouterr()
    assert main(["degrade", chains, "--step", "40", "-o", str(tmp_path / "f.json")]) != 0
    assert "smaller than T" in capsys.readouterr().err


def test_degrade_reads_schedule_from_config(tmp_path, monkeypatch):
    src = _write_traj(tmp_path, sinusoid_fixture(T=30))
    chains = str(tmp_path / "c.json")
    main(["fit", src, "-o", chains])
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"schedule": [5, 1]}))
    monkeypatch.setenv(mio.CONFIG_ENV, str(cfg))
    assert main(["degrade", chains, "-o", str(tmp_path / "d.json")]) == 0
    assert (tmp_path / "d_s5.json").exists() and (tmp_path / "d_s1.json").exists()


def test_analyze_table(tmp_path):
    line = _write_traj(tmp_path, gen_trajectory(SynthSpec("line", T=64, K=2)), "line.json")
    walk = _write_traj(tmp_path, smooth_walk_fixture(seed=7, T=128), "walk.json")
    main(["analyze", line, "-o", str(tmp_path / "line.csv")])
    main(["analyze", walk, "-o", str(tmp_path / "walk.csv")])
    line_rows, walk_rows = _rows(tmp_path / "line.csv"), _rows(tmp_path / "walk.csv")
    assert list(walk_rows[0]) == ["step", "control_point_ratio", "rmse_m", "accel_err_cm_s2", "max_err_m"]
    for r in walk_rows:
        assert float(r["control_point_ratio"]) == math.ceil(128 / int(r["step"])) / 128
    assert all(float(r["rmse_m"]) < 1e-12 for r in line_rows)
    errs = [float(r["rmse_m"]) for r in walk_rows]
    assert errs[0] == 0.0
    assert all(b >= a for a, b in zip(errs, errs[1:]))


def test_mask_command(tmp_path, capsys):
    assert main(["mask", "--T", "4", "--schedule", "2,1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 11 and lines[-1] == "1,1,1,1,1,1,1,1,1,1"
    assert main(["mask", "--T", "4", "--schedule", "2,1", "--format", "json", "-o", str(tmp_path / "m.json")]) == 0
    assert json.loads((tmp_path / "m.json").read_text())["n_tokens"] == 10


def test_mask_demo_outputs(tmp_path):
    prefix = str(tmp_path / "demo")
    assert main(["mask-demo", "--T", "64", "--ratios", "0,0.25,0.5", "--attention", "--schedule", "16,4,1", "-o", prefix]) == 0
    rows = _rows(f"{prefix}_errors.csv")
    by = {(r["policy"], float(r["ratio"])): float(r["rmse_m"]) for r in rows}
    assert by[("continuous", 0.0)] == 0.0 and by[("random", 0.0)] == 0.0
    for ratio in (0.25, 0.5):
        assert by[("continuous", ratio)] >= by[("random", ratio)]
    mask_rows = _rows(f"{prefix}_frame_mask.csv")
    assert len(mask_rows) == 64 and sum(1 - int(r["observed"]) for r in mask_rows) == 16
    summary = json.loads((tmp_path / "demo_summary.json").read_text())
    assert set(summary["requested"]) == {"continuous", "random"}
    assert (tmp_path / "demo_attention.csv").exists()


def test_bridge_and_eval(tmp_path, capsys):
    traj = sinusoid_fixture(T=50, K=2)
    src = _write_traj(tmp_path, traj)
    mask = make_frame_mask(50, "random", 0.2, seed=1)
    (tmp_path / "mask.csv").write_text(mio.frame_mask_csv(mask))
    assert main(["bridge", src, "--mask", str(tmp_path / "mask.csv"), "-o", str(tmp_path / "b.json")]) == 0
    bridged = mio.read_trajectory(tmp_path / "b.json")
    np.testing.assert_array_equal(bridged.positions[mask.observed], traj.positions[mask.observed])
    capsys.readouterr()
    assert main(["eval", str(tmp_path / "b.json"), src, "-o", str(tmp_path / "r.json"), "--csv", str(tmp_path / "r.csv")]) == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed == json.loads((tmp_path / "r.json").read_text())
    assert 0 < printed["rmse_m"] < 0.01
    assert _rows(tmp_path / "r.csv")[0]["rmse_m"] == repr(printed["rmse_m"])


def test_synth_command(tmp_path):
    out = tmp_path / "s.json"
    assert main(["synth", "--kind", "line", "--T", "5", "--param", "velocity=[0.5,0,0]", "-o", str(out)]) == 0
    traj = mio.read_trajectory(out)
    np.testing.assert_array_equal(traj.positions[:, 0, 0], [0, 0.5, 1.0, 1.5, 2.0])
    assert main(["synth", "--kind", "line", "--param", "bogus=1", "-o", str(out)]) != 0


@pytest.mark.skipif(shutil.which("motioncurve") is None, reason="console script not installed")
def test_console_script_pipeline(tmp_path):
    def run(*args):
        return subprocess.run(["motioncurve", *args], cwd=tmp_path, capture_output=True, text=True, check=True)

    run("synth", "--kind", "smooth-walk", "--T", "64", "--K", "3", "--seed", "7", "-o", "gt.json")
    run("fit", "gt.json", "-o", "fine.json")
    run("degrade", "fine.json", "--step", "4", "-o", "coarse.json")
    run("resample", "coarse_s4.json", "-o", "rec.json")
    report = json.loads(run("eval", "rec.json", "gt.json").stdout)
    assert 0 < report["rmse_m"] < 0.05
    failed = subprocess.run([sys.executable, "-m", "motioncurve", "fit", "missing.json", "-o", "x.json"], cwd=tmp_path, capture_output=True, text=True)
    assert failed.returncode != 0 and "error" in failed.stderr
