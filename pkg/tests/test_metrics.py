import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from motioncurve import DomainError, InsufficientDataError, Schedule, Trajectory, accel_error, evaluate, mpjpe, representation_loss, rmse
from motioncurve.degradation import MultiLevelMotion
from oracles import loop_accel_error, loop_mpjpe, loop_representation_loss, loop_rmse


def _traj(rng, T=12, K=4, fps=10.0):
    return Trajectory(rng.normal(size=(T, K, 3)), fps)


def _mlm(levels, steps):
    return MultiLevelMotion(levels, [np.arange(l.shape[0], dtype=float) for l in levels], Schedule(steps))


def test_identical_inputs(rng):
    a = _traj(rng)
    assert rmse(a, a) == 0.0
    assert mpjpe(a, a) == 0.0
    assert accel_error(a, a) == 0.0


def test_uniform_offsets(rng):
    a = _traj(rng)
    assert rmse(Trajectory(a.positions + [0.1, 0, 0], a.fps), a) == pytest.approx(0.1, abs=1e-12)
    assert mpjpe(Trajectory(a.positions + [0, 0.05, 0], a.fps), a) == pytest.approx(50.0, abs=1e-9)


def test_constant_velocity_drift_has_no_accel_error(rng):
    a = _traj(rng, T=30)
    drift = np.arange(30)[:, None, None] * np.array([0.02, -0.01, 0.005]) + 0.3
    assert accel_error(Trajectory(a.positions + drift, a.fps), a) < 1e-9


@pytest.mark.parametrize("fps", [10.0, 30.0])
def test_accel_error_sinusoid_identity(fps):
    A, omega, T = 0.2, 2.0, 200
    ts = np.arange(T) / fps
    gt = Trajectory(np.zeros((T, 1, 3)), fps)
    pred = Trajectory(np.stack([A * np.sin(omega * ts), np.zeros(T), np.zeros(T)], axis=1)[:, None, :], fps)
    omega_sq = 2.0 * (1.0 - np.cos(omega / fps)) * fps**2
    expected = 100.0 * A * omega_sq * np.mean(np.abs(np.sin(omega * ts[1:-1])))
    assert accel_error(pred, gt) == pytest.approx(expected, rel=1e-6)


def test_oracle_equivalence():
    for seed in range(5):
        r = np.random.default_rng(seed)
        a, b = _traj(r, T=9, K=3, fps=12.0), _traj(r, T=9, K=3, fps=12.0)
        assert abs(rmse(a, b) - loop_rmse(a.positions, b.positions)) < 1e-9
        assert abs(mpjpe(a, b) - loop_mpjpe(a.positions, b.positions)) < 1e-9
        assert abs(accel_error(a, b) - loop_accel_error(a.positions, b.positions, 12.0)) < 1e-9


def test_representation_loss_single_entry():
    gt = _mlm([np.zeros((1, 1, 9))], (1,))
    pred_level = np.zeros((1, 1, 9))
    pred_level[0, 0, 4] = 0.3
    assert representation_loss(_mlm([pred_level], (1,)), gt) == pytest.approx(0.09)


def test_representation_loss_matches_loop(rng):
    la = [rng.normal(size=(m, 3, 9)) for m in (2, 4, 7)]
    lb = [rng.normal(size=(m, 3, 9)) for m in (2, 4, 7)]
    value = representation_loss(_mlm(la, (4, 2, 1)), _mlm(lb, (4, 2, 1)))
    assert abs(value - loop_representation_loss(la, lb)) < 1e-9


def test_representation_loss_scales_quadratically(rng):
    la = [rng.normal(size=(m, 2, 9)) for m in (3, 5)]
    lb = [rng.normal(size=(m, 2, 9)) for m in (3, 5)]
    base = representation_loss(_mlm(la, (2, 1)), _mlm(lb, (2, 1)))
    scaled = [b + 2.5 * (a - b) for a, b in zip(la, lb)]
    assert representation_loss(_mlm(scaled, (2, 1)), _mlm(lb, (2, 1))) == pytest.approx(6.25 * base, rel=1e-12)


def test_errors(rng):
    a = _traj(rng)
    with pytest.raises(DomainError):
        rmse(a, _traj(rng, K=3))
    with pytest.raises(InsufficientDataError):
        accel_error(_traj(rng, T=2), _traj(rng, T=2))
    with pytest.raises(DomainError):
        accel_error(a, Trajectory(a.positions, 20.0))
    with pytest.raises(DomainError):
        representation_loss(_mlm([np.zeros((2, 1, 9))], (1,)), _mlm([np.zeros((1, 1, 9)), np.zeros((2, 1, 9))], (2, 1)))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31), st.floats(-5, 5), st.floats(-5, 5))
def test_invariances(seed, shift, slope):
    r = np.random.default_rng(seed)
    a, b = _traj(r, T=8, K=2), _traj(r, T=8, K=2)
    off = np.array([shift, -shift, 0.5 * shift])
    at, bt = Trajectory(a.positions + off, a.fps), Trajectory(b.positions + off, b.fps)
    assert rmse(at, bt) == pytest.approx(rmse(a, b), rel=1e-9, abs=1e-12)
    assert mpjpe(at, bt) == pytest.approx(mpjpe(a, b), rel=1e-9, abs=1e-9)
    affine = (slope * np.arange(8))[:, None, None] * r.normal(size=(1, 2, 3)) + r.normal(size=(1, 2, 3))
    assert accel_error(Trajectory(a.positions + affine, a.fps), b) == pytest.approx(accel_error(a, b), rel=1e-9, abs=1e-6)
    assert rmse(a, b) >= 0 and (rmse(a, b) > 0) == (not np.array_equal(a.positions, b.positions))


def test_root_align_removes_common_offset_per_frame(rng):
    a = _traj(rng)
    shift = rng.normal(size=(a.T, 1, 3))
    b = Trajectory(a.positions + shift, a.fps)
    assert mpjpe(b, a) > 0
    assert mpjpe(b, a, root_align=True) < 1e-9


def test_report_serialisation(rng):
    a, b = _traj(rng), _traj(rng)
    report = evaluate(a, b)
    doc = json.loads(report.to_json())
    assert doc["mpjpe_mm"] == pytest.approx(mpjpe(a, b))
    assert len(doc["per_joint_rmse_m"]) == 4
    header, row = report.to_csv().strip().split("\n")
    assert header == "rmse_m,mpjpe_mm,accel_err_cm_s2"
    assert float(row.split(",")[0]) == report.rmse_m
