"""Curve resampling, the block-causal token mask, and gap bridging."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .degradation import Schedule
from .errors import DomainError, InsufficientDataError
from .fitting import Trajectory, fit_smooth_chain
from .geometry import BezierChain, eval_chain


def resample_level(level_chain: BezierChain, target_times) -> np.ndarray:
    """Evaluate a (coarse) chain at ``target_times``; returns ``(N, 3)``."""
    times = np.atleast_1d(np.asarray(target_times, dtype=float))
    if times.ndim != 1:
        raise DomainError("target_times must be one-dimensional")
    if np.any(np.diff(times) < 0):
        raise DomainError("target_times must be non-decreasing")
    return eval_chain(level_chain, times)


def resample_chains(chains: list[BezierChain], target_times) -> np.ndarray:
    """Resample K joint chains; returns ``(N, K, 3)``."""
    return np.stack([resample_level(c, target_times) for c in chains], axis=1)


@dataclass(frozen=True)
class TokenSpan:
    name: str
    start: int
    stop: int
    level: int | None = None  # None for point tokens, else 1-based level

    @property
    def size(self) -> int:
        return self.stop - self.start


@dataclass(frozen=True)
class AttentionMask:
    """``allowed[r, c]`` is True when token ``r`` may attend to token ``c``."""

    allowed: np.ndarray
    layout: tuple[TokenSpan, ...]

    @property
    def n_tokens(self) -> int:
        return self.allowed.shape[0]

    def to_csv(self) -> str:
        rows = [",".join(str(c) for c in range(self.n_tokens))]
        rows += [",".join("1" if v else "0" for v in row) for row in self.allowed]
        return "\n".join(rows) + "\n"

    def to_rules(self) -> dict:
        """Compact description: spans plus, per span, the spans it may see."""
        spans = [
            {"name": s.name, "start": s.start, "stop": s.stop, "level": s.level}
            for s in self.layout
        ]
        visible = {}
        for s in self.layout:
            row = self.allowed[s.start]
            visible[s.name] = [t.name for t in self.layout if row[t.start]]
        return {"n_tokens": self.n_tokens, "spans": spans, "attends_to": visible}

    def to_json(self) -> str:
        return json.dumps(self.to_rules(), indent=2)


def build_block_causal_mask(T: int, schedule: Schedule, Ms=None) -> AttentionMask:
    """Token visibility for the layout ``[points: T][level 1]...[level L]``.

    Every token sees all point tokens; a level-``l`` motion token also sees
    every motion token of levels ``1..l``. Point tokens see only points.
    """
    if not isinstance(schedule, Schedule):
        schedule = Schedule(tuple(schedule))
    if T < 1:
        raise DomainError(f"T must be positive, got {T}")
    expected = [math.ceil(T / s) for s in schedule]
    if Ms is None:
        Ms = expected
    Ms = [int(m) for m in Ms]
    if Ms != expected:
        raise DomainError(f"level sizes {Ms} inconsistent with T={T} and schedule {schedule.steps} (expected {expected})")

    layout = [TokenSpan("points", 0, T)]
    start = T
    for level, (s, m) in enumerate(zip(schedule, Ms), start=1):
        layout.append(TokenSpan(f"level{level}_s{s}", start, start + m, level))
        start += m

    allowed = np.zeros((start, start), dtype=bool)
    allowed[:, :T] = True
    for row_span in layout[1:]:
        # block lower-triangular: up to and including the row's own level
        allowed[row_span.start : row_span.stop, T : row_span.stop] = True
    return AttentionMask(allowed, tuple(layout))


def bridge_gaps(traj: Trajectory, observed) -> Trajectory:
    """Fill occluded frames from a smooth chain through the observed ones.

    Observed frames are fit at their true frame times. When an end frame is
    occluded, the nearest observed position is promoted to a boundary anchor
    at that end's frame time.
    """
    observed = np.asarray(getattr(observed, "observed", observed), dtype=bool)
    if observed.shape != (traj.T,):
        raise DomainError(f"frame mask must have length {traj.T}, got {observed.shape}")
    obs_idx = np.flatnonzero(observed)
    if obs_idx.size < 2:
        raise InsufficientDataError(f"need at least 2 observed frames, got {obs_idx.size}")
    if obs_idx.size == traj.T:
        return Trajectory(traj.positions.copy(), traj.fps)

    times = obs_idx.astype(float)
    pos = traj.positions[obs_idx]
    if obs_idx[0] != 0:
        times = np.concatenate([[0.0], times])
        pos = np.concatenate([pos[:1], pos])
    if obs_idx[-1] != traj.T - 1:
        times = np.concatenate([times, [traj.T - 1.0]])
        pos = np.concatenate([pos, pos[-1:]])

    frames = traj.frame_times()
    out = np.empty_like(traj.positions)
    for k in range(traj.K):
        out[:, k, :] = eval_chain(fit_smooth_chain(pos[:, k, :], times), frames)
    out[obs_idx] = traj.positions[obs_idx]
    return Trajectory(out, traj.fps)
