"""Representation-level analyses: approximation error versus control-point
ratio, and gap-bridging error under frame-drop policies."""
from __future__ import annotations

import math

import numpy as np

from .degradation import DEFAULT_SAMPLES_PER_FRAME, degrade_chain
from .fitting import Trajectory, fit_trajectory
from .metrics import accel_error, joint_distances, rmse
from .reconstruction import bridge_gaps, resample_chains
from .synth import FrameMask, make_frame_mask

ANALYZE_STEPS = (1, 2, 4, 8, 16, 32)
SWEEP_RATIOS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7)


def degrade_resample(traj: Trajectory, s: int, samples_per_frame: int = DEFAULT_SAMPLES_PER_FRAME, jobs: int = 1) -> Trajectory:
    """Fit, degrade every joint with step ``s`` and resample at all frames."""
    chains = fit_trajectory(traj, jobs=jobs)
    if s != 1:
        chains = [degrade_chain(c, s, samples_per_frame) for c in chains]
    return Trajectory(resample_chains(chains, traj.frame_times()), traj.fps)


def control_ratio_table(
    traj: Trajectory,
    steps=ANALYZE_STEPS,
    samples_per_frame: int = DEFAULT_SAMPLES_PER_FRAME,
    jobs: int = 1,
) -> list[dict]:
    rows = []
    finest = fit_trajectory(traj, jobs=jobs)
    frames = traj.frame_times()
    for s in sorted(set(int(s) for s in steps)):
        chains = finest if s == 1 else [degrade_chain(c, s, samples_per_frame) for c in finest]
        rec = Trajectory(resample_chains(chains, frames), traj.fps)
        rows.append(
            {
                "step": s,
                "control_point_ratio": math.ceil(traj.T / s) / traj.T,
                "rmse_m": rmse(rec, traj),
                "accel_err_cm_s2": accel_error(rec, traj) if traj.T >= 3 else 0.0,
                "max_err_m": float(np.max(joint_distances(rec, traj))),
            }
        )
    return rows


def bridged_errors(traj: Trajectory, mask: FrameMask) -> tuple[float, float]:
    """RMSE of the bridged trajectory over all frames and over occluded frames only."""
    rec = bridge_gaps(traj, mask)
    total = rmse(rec, traj)
    gap = ~mask.observed
    gap_err = rmse(rec.positions[gap], traj.positions[gap]) if gap.any() else 0.0
    return total, gap_err


def robustness_sweep(traj: Trajectory, policy: str, ratios=SWEEP_RATIOS, seeds=range(8)) -> list[dict]:
    """Mean bridged error over ``seeds`` for every drop ratio."""
    rows = []
    for ratio in ratios:
        errs = np.array([bridged_errors(traj, make_frame_mask(traj.T, policy, ratio, seed)) for seed in seeds])
        rows.append(
            {
                "policy": policy,
                "ratio": float(ratio),
                "rmse_m": float(errs[:, 0].mean()),
                "gap_rmse_m": float(errs[:, 1].mean()),
            }
        )
    return rows
