"""Smooth cubic Bézier chain fitting through joint trajectories.

Each joint is fit independently with a natural (zero end-curvature) C2 cubic
spline in time, solved by the Thomas algorithm, and converted to Bézier form
with one anchor per frame.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InsufficientDataError, SingularSystemError
from .geometry import BezierChain


@dataclass(frozen=True)
class Trajectory:
    """Joint positions over time: ``positions`` is ``(T, K, 3)`` in meters."""

    positions: np.ndarray
    fps: float = 10.0

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim == 2 and pos.shape[1] == 3:
            pos = pos[:, None, :]
        if pos.ndim != 3 or pos.shape[2] != 3:
            raise DomainError(f"positions must have shape (T, K, 3), got {pos.shape}")
        if pos.shape[0] < 2:
            raise InsufficientDataError(f"insufficient frames: T={pos.shape[0]} (need T >= 2)")
        if pos.shape[1] < 1:
            raise DomainError("trajectory needs at least one joint")
        if not np.all(np.isfinite(pos)):
            raise DomainError("positions contain non-finite values")
        if not (np.isfinite(self.fps) and self.fps > 0):
            raise DomainError(f"fps must be positive, got {self.fps}")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "fps", float(self.fps))

    @property
    def T(self) -> int:
        return self.positions.shape[0]

    @property
    def K(self) -> int:
        return self.positions.shape[1]

    def frame_times(self) -> np.ndarray:
        return np.arange(self.T, dtype=float)


@dataclass(frozen=True)
class TridiagonalSystem:
    """``sub`` (n-1), ``diag`` (n), ``sup`` (n-1); ``rhs`` is (n,) or (n, m)."""

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    rhs: np.ndarray

    def dense(self) -> np.ndarray:
        n = len(self.diag)
        a = np.diag(np.asarray(self.diag, dtype=float))
        if n > 1:
            a += np.diag(np.asarray(self.sub, dtype=float), -1)
            a += np.diag(np.asarray(self.sup, dtype=float), 1)
        return a


def solve_tridiagonal(sys: TridiagonalSystem) -> np.ndarray:
    """Thomas algorithm: forward elimination then back substitution.

    A 2-D ``rhs`` is solved column by column against the same matrix, which
    is how the x, y and z axes are handled in one pass.
    """
    diag = np.asarray(sys.diag, dtype=float)
    sub = np.asarray(sys.sub, dtype=float)
    sup = np.asarray(sys.sup, dtype=float)
    rhs = np.asarray(sys.rhs, dtype=float)
    n = diag.shape[0]
    if n < 1:
        raise DomainError("tridiagonal system must have n >= 1")
    if sub.shape != (n - 1,) or sup.shape != (n - 1,) or rhs.shape[0] != n:
        raise DomainError("inconsistent tridiagonal system sizes")

    c = np.empty(max(n - 1, 0))
    d = np.empty_like(rhs)
    pivot = diag[0]
    if pivot == 0.0:
        raise SingularSystemError("zero pivot at row 0")
    if n > 1:
        c[0] = sup[0] / pivot
    d[0] = rhs[0] / pivot
    for i in range(1, n):
        pivot = diag[i] - sub[i - 1] * c[i - 1]
        if pivot == 0.0:
            raise SingularSystemError(f"zero pivot at row {i}")
        if i < n - 1:
            c[i] = sup[i] / pivot
        d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / pivot

    x = np.empty_like(d)
    x[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


def natural_spline_system(points: np.ndarray, times: np.ndarray) -> TridiagonalSystem:
    """System for the interior second derivatives of a natural cubic spline.

    Unknowns are the accelerations at anchors ``1 .. T-2``; both end
    accelerations are pinned to zero. Requires ``T >= 3``.
    """
    h = np.diff(times)
    slopes = np.diff(points, axis=0) / h[:, None]
    diag = 2.0 * (h[:-1] + h[1:])
    off = h[1:-1]
    rhs = 6.0 * (slopes[1:] - slopes[:-1])
    return TridiagonalSystem(off, diag, off.copy(), rhs)


def _check_times(times, T: int) -> np.ndarray:
    if times is None:
        return np.arange(T, dtype=float)
    times = np.asarray(times, dtype=float)
    if times.shape != (T,):
        raise DomainError(f"times must have shape ({T},), got {times.shape}")
    if not np.all(np.isfinite(times)) or not np.all(np.diff(times) > 0):
        raise DomainError("times must be finite and strictly increasing")
    return times


def fit_smooth_chain(joint_traj, times=None) -> BezierChain:
    """Interpolating C2 Bézier chain through ``joint_traj`` (``(T, 3)``).

    With uniform frame times the backward and forward controls of every
    anchor are exact mirror images. With non-uniform times the two control
    offsets keep a common direction and scale with the adjacent durations,
    so the curve stays C1 in time.
    """
    pts = np.asarray(joint_traj, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise DomainError(f"joint trajectory must have shape (T, 3), got {pts.shape}")
    T = pts.shape[0]
    if T < 2:
        raise InsufficientDataError(f"insufficient frames: T={T} (need T >= 2)")
    if not np.all(np.isfinite(pts)):
        raise DomainError("joint trajectory contains non-finite values")
    times = _check_times(times, T)

    h = np.diff(times)
    accel = np.zeros_like(pts)
    if T > 2:
        accel[1:-1] = solve_tridiagonal(natural_spline_system(pts, times))

    # velocities at each anchor from the spline moments
    slopes = np.diff(pts, axis=0) / h[:, None]
    vel = np.empty_like(pts)
    vel[:-1] = slopes - h[:, None] * (2.0 * accel[:-1] + accel[1:]) / 6.0
    vel[-1] = slopes[-1] + h[-1] * (accel[-2] + 2.0 * accel[-1]) / 6.0

    fwd = np.empty_like(pts)
    back = np.empty_like(pts)
    fwd[:-1] = pts[:-1] + vel[:-1] * h[:, None] / 3.0
    back[1:] = pts[1:] - vel[1:] * h[:, None] / 3.0
    back[0] = 2.0 * pts[0] - fwd[0]
    fwd[-1] = 2.0 * pts[-1] - back[-1]
    # anchors are stored verbatim so interpolation is exact
    return BezierChain(times, pts.copy(), back, fwd)


def fit_trajectory(traj: Trajectory, times=None, jobs: int = 1) -> list[BezierChain]:
    """Fit one chain per joint; output order always follows joint order."""
    joints = [traj.positions[:, k, :] for k in range(traj.K)]
    if jobs <= 1 or traj.K == 1:
        return [fit_smooth_chain(j, times) for j in joints]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda j: fit_smooth_chain(j, times), joints))
