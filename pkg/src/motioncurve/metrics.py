"""Trajectory and representation error metrics."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .degradation import MultiLevelMotion
from .errors import DomainError, InsufficientDataError
from .fitting import Trajectory


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    pa = np.asarray(getattr(a, "positions", a), dtype=float)
    pb = np.asarray(getattr(b, "positions", b), dtype=float)
    if pa.shape != pb.shape:
        raise DomainError(f"shape mismatch: {pa.shape} vs {pb.shape}")
    if pa.ndim != 3 or pa.shape[-1] != 3:
        raise DomainError(f"expected (T, K, 3) positions, got {pa.shape}")
    return pa, pb


def _root_relative(p: np.ndarray) -> np.ndarray:
    return p - p[:, :1, :]


def joint_distances(a, b) -> np.ndarray:
    """Euclidean distance per frame and joint, shape ``(T, K)``."""
    pa, pb = _pair(a, b)
    return np.linalg.norm(pa - pb, axis=-1)


def rmse(a, b) -> float:
    """Root mean squared per-joint Euclidean distance, in meters."""
    pa, pb = _pair(a, b)
    return float(np.sqrt(np.mean(np.sum((pa - pb) ** 2, axis=-1))))


def mpjpe(pred, gt, root_align: bool = False) -> float:
    """Mean per-joint position error in millimeters.

    No alignment by default; ``root_align`` subtracts joint 0 from both.
    """
    pp, pg = _pair(pred, gt)
    if root_align:
        pp, pg = _root_relative(pp), _root_relative(pg)
    return float(np.mean(np.linalg.norm(pp - pg, axis=-1)) * 1000.0)


def _fps(pred, gt, fps):
    if fps is None:
        fps_p = getattr(pred, "fps", None)
        fps_g = getattr(gt, "fps", None)
        if fps_p is not None and fps_g is not None and fps_p != fps_g:
            raise DomainError(f"fps mismatch: {fps_p} vs {fps_g}")
        fps = fps_p if fps_p is not None else fps_g
    if fps is None:
        raise DomainError("fps is required when passing raw arrays")
    return float(fps)


def accelerations(positions: np.ndarray, fps: float) -> np.ndarray:
    """Central second differences, ``(T-2, K, 3)`` in m/s^2."""
    return (positions[2:] - 2.0 * positions[1:-1] + positions[:-2]) * fps * fps


def _accel_norms(pred, gt, fps) -> np.ndarray:
    pp, pg = _pair(pred, gt)
    if pp.shape[0] < 3:
        raise InsufficientDataError(f"acceleration error needs T >= 3, got {pp.shape[0]}")
    fps = _fps(pred, gt, fps)
    return np.linalg.norm(accelerations(pp, fps) - accelerations(pg, fps), axis=-1)


def accel_error(pred, gt, fps: float | None = None) -> float:
    """Mean acceleration error in cm/s^2."""
    return float(np.mean(_accel_norms(pred, gt, fps)) * 100.0)


def representation_loss(pred: MultiLevelMotion, gt: MultiLevelMotion) -> float:
    """Sum over levels of the squared Frobenius difference divided by level size."""
    if tuple(pred.schedule.steps) != tuple(gt.schedule.steps):
        raise DomainError(f"schedule mismatch: {pred.schedule.steps} vs {gt.schedule.steps}")
    total = 0.0
    for lp, lg in zip(pred.levels, gt.levels):
        if lp.shape != lg.shape:
            raise DomainError(f"level shape mismatch: {lp.shape} vs {lg.shape}")
        total += float(np.sum((lp - lg) ** 2)) / lp.shape[0]
    return total


@dataclass
class MetricReport:
    rmse_m: float
    mpjpe_mm: float
    accel_err_cm_s2: float
    per_joint_rmse_m: list[float] = field(default_factory=list)
    per_joint_mpjpe_mm: list[float] = field(default_factory=list)
    per_joint_accel_err_cm_s2: list[float] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["rmse_m", "mpjpe_mm", "accel_err_cm_s2"])
        writer.writerow([repr(self.rmse_m), repr(self.mpjpe_mm), repr(self.accel_err_cm_s2)])
        return buf.getvalue()


def evaluate(pred: Trajectory, gt: Trajectory, root_align: bool = False) -> MetricReport:
    pp, pg = _pair(pred, gt)
    sq = np.sum((pp - pg) ** 2, axis=-1)
    if root_align:
        dist = np.linalg.norm(_root_relative(pp) - _root_relative(pg), axis=-1)
    else:
        dist = np.sqrt(sq)
    acc = _accel_norms(pred, gt, None) * 100.0
    return MetricReport(
        rmse_m=rmse(pp, pg),
        mpjpe_mm=mpjpe(pp, pg, root_align),
        accel_err_cm_s2=float(np.mean(acc)),
        per_joint_rmse_m=np.sqrt(np.mean(sq, axis=0)).tolist(),
        per_joint_mpjpe_mm=(np.mean(dist, axis=0) * 1000.0).tolist(),
        per_joint_accel_err_cm_s2=np.mean(acc, axis=0).tolist(),
    )
