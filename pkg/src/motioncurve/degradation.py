"""Trajectory-aware degradation of a finest Bézier chain.

A coarse chain keeps every ``s``-th anchor of the finest chain, reuses the
finest chain's unit tangent at those anchors, and re-optimises the two
control lengths of every coarse segment by linear least squares against
dense samples of the finest curve.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .fitting import Trajectory, fit_trajectory
from .geometry import BezierChain, eval_chain

DEFAULT_SCHEDULE = (32, 16, 8, 1)
DEFAULT_SAMPLES_PER_FRAME = 4
_TINY = 1e-12


@dataclass(frozen=True)
class Schedule:
    """Coarse-to-fine step sizes; strictly decreasing and ending in 1."""

    steps: tuple[int, ...] = DEFAULT_SCHEDULE

    def __post_init__(self):
        steps = tuple(int(s) for s in self.steps)
        if not steps:
            raise DomainError("schedule must contain at least one step")
        if any(s < 1 for s in steps):
            raise DomainError(f"schedule steps must be positive: {steps}")
        if any(a <= b for a, b in zip(steps, steps[1:])):
            raise DomainError(f"schedule must be strictly decreasing: {steps}")
        if steps[-1] != 1:
            raise DomainError(f"schedule must end with step 1: {steps}")
        object.__setattr__(self, "steps", steps)

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def level_sizes(self, T: int) -> list[int]:
        return [math.ceil(T / s) for s in self.steps]


@dataclass(frozen=True)
class SegmentLengths:
    """Signed control lengths of one coarse segment along its end tangents."""

    ell_fwd: float
    ell_back: float


@dataclass
class DegradeDiagnostics:
    ell_fwd: np.ndarray
    ell_back: np.ndarray
    degenerate: np.ndarray
    anchor_indices: list[int] = field(default_factory=list)

    @property
    def negative_lengths(self) -> int:
        # the first backward / last forward lengths are mirrors, not fitted
        return int(np.sum(self.ell_fwd[:-1] < 0) + np.sum(self.ell_back[1:] < 0))


@dataclass(frozen=True)
class MultiLevelMotion:
    """Packed hierarchy; ``levels[l]`` has shape ``(M_l, K, 9)``, coarse first."""

    levels: list[np.ndarray]
    anchor_times: list[np.ndarray]
    schedule: Schedule

    def __post_init__(self):
        if not (len(self.levels) == len(self.anchor_times) == len(self.schedule)):
            raise DomainError("levels, anchor_times and schedule must have equal length")

    @property
    def shapes(self) -> list[tuple[int, ...]]:
        return [lvl.shape for lvl in self.levels]

    def chains(self, level: int) -> list[BezierChain]:
        lvl = self.levels[level]
        return [BezierChain.from_packed(self.anchor_times[level], lvl[:, k, :]) for k in range(lvl.shape[1])]


def select_anchor_indices(T: int, s: int) -> list[int]:
    """``ceil(T/s)`` indices ``0, s, 2s, ...`` with the last replaced by ``T-1``."""
    if T < 2:
        raise DomainError(f"need T >= 2, got {T}")
    if not 1 <= s <= T - 1:
        raise DomainError(f"step s={s} must satisfy 1 <= s <= T-1 = {T - 1}")
    m = math.ceil(T / s)
    idx = [i * s for i in range(m)]
    idx[-1] = T - 1
    return idx


def extract_unit_tangent(chain: BezierChain, anchor_index: int) -> tuple[np.ndarray, bool]:
    """Unit motion direction at an anchor and a degenerate flag.

    The direction points from the backward control towards the anchor. A
    stationary anchor falls back to the chord towards the next anchor (from
    the previous one at the chain end); if that is also zero the zero vector
    is returned with ``degenerate=True``.
    """
    m = chain.n_anchors
    if not 0 <= anchor_index < m:
        raise DomainError(f"anchor index {anchor_index} out of range [0, {m})")
    anchor = chain.anchors[anchor_index]
    offset = anchor - chain.back_controls[anchor_index]
    norm = np.linalg.norm(offset)
    if norm >= _TINY:
        return offset / norm, False
    if anchor_index < m - 1:
        chord = chain.anchors[anchor_index + 1] - anchor
    else:
        chord = anchor - chain.anchors[anchor_index - 1]
    norm = np.linalg.norm(chord)
    if norm >= _TINY:
        return chord / norm, False
    return np.zeros(3), True


def segment_samples(finest: BezierChain, i_lo: int, i_hi: int, samples_per_frame: int):
    """Time-uniform samples of the finest curve over ``[t_lo, t_hi]``.

    Returns ``(u, Y)``: curve parameters of the coarse segment and the
    corresponding finest-curve points.
    """
    if samples_per_frame < 1:
        raise DomainError("samples_per_frame must be >= 1")
    times = finest.anchor_times
    frac = np.arange(samples_per_frame) / samples_per_frame
    t = (times[i_lo:i_hi, None] + np.diff(times[i_lo : i_hi + 1])[:, None] * frac).ravel()
    t = np.append(t, times[i_hi])
    u = (t - times[i_lo]) / (times[i_hi] - times[i_lo])
    return np.clip(u, 0.0, 1.0), eval_chain(finest, t)


def fit_segment_lengths(
    finest: BezierChain,
    i_lo: int,
    i_hi: int,
    d_lo,
    d_hi,
    samples_per_frame: int = DEFAULT_SAMPLES_PER_FRAME,
) -> SegmentLengths:
    """Closed-form least-squares control lengths for one coarse segment.

    The coarse curve is affine in the two lengths, so the optimum solves a
    2x2 normal system. An unknown whose tangent is zero (or which makes the
    system singular) is pinned to a third of the chord and the other is
    solved alone.
    """
    if not 0 <= i_lo < i_hi < finest.n_anchors:
        raise DomainError(f"need 0 <= i_lo < i_hi < {finest.n_anchors}, got ({i_lo}, {i_hi})")
    d_lo = np.asarray(d_lo, dtype=float)
    d_hi = np.asarray(d_hi, dtype=float)
    p_lo = finest.anchors[i_lo]
    p_hi = finest.anchors[i_hi]
    chord_third = np.linalg.norm(p_hi - p_lo) / 3.0

    u, y = segment_samples(finest, i_lo, i_hi, samples_per_frame)
    v = 1.0 - u
    b1 = (3.0 * v * v * u)[:, None]
    b2 = (3.0 * v * u * u)[:, None]
    base = (v * v * v + 3.0 * v * v * u)[:, None] * p_lo + (3.0 * v * u * u + u * u * u)[:, None] * p_hi
    col_f = b1 * d_lo
    col_b = -b2 * d_hi
    target = y - base

    a11 = np.sum(col_f * col_f)
    a22 = np.sum(col_b * col_b)
    a12 = np.sum(col_f * col_b)
    g1 = np.sum(col_f * target)
    g2 = np.sum(col_b * target)

    use_f = a11 > _TINY
    use_b = a22 > _TINY
    if use_f and use_b:
        det = a11 * a22 - a12 * a12
        if det > _TINY * a11 * a22:
            return SegmentLengths((g1 * a22 - g2 * a12) / det, (a11 * g2 - a12 * g1) / det)
        use_b = False
    if use_f:
        ell_b = chord_third
        return SegmentLengths((g1 - a12 * ell_b) / a11, ell_b)
    if use_b:
        ell_f = chord_third
        return SegmentLengths(ell_f, (g2 - a12 * ell_f) / a22)
    return SegmentLengths(chord_third, chord_third)


def segment_objective(finest, i_lo, i_hi, d_lo, d_hi, lengths, samples_per_frame=DEFAULT_SAMPLES_PER_FRAME) -> float:
    """Sum of squared distances between the coarse segment and finest samples."""
    u, y = segment_samples(finest, i_lo, i_hi, samples_per_frame)
    ell_f, ell_b = lengths
    p_lo, p_hi = finest.anchors[i_lo], finest.anchors[i_hi]
    c1 = p_lo + ell_f * np.asarray(d_lo, dtype=float)
    c2 = p_hi - ell_b * np.asarray(d_hi, dtype=float)
    v = (1.0 - u)[:, None]
    uu = u[:, None]
    curve = v**3 * p_lo + 3 * v**2 * uu * c1 + 3 * v * uu**2 * c2 + uu**3 * p_hi
    return float(np.sum((curve - y) ** 2))


def degrade_chain_detailed(
    finest: BezierChain, s: int, samples_per_frame: int = DEFAULT_SAMPLES_PER_FRAME
) -> tuple[BezierChain, DegradeDiagnostics]:
    idx = select_anchor_indices(finest.n_anchors, s)
    m = len(idx)
    tangents = np.zeros((m, 3))
    degenerate = np.zeros(m, dtype=bool)
    for j, i in enumerate(idx):
        tangents[j], degenerate[j] = extract_unit_tangent(finest, i)

    ell_f = np.zeros(m)
    ell_b = np.zeros(m)
    for j in range(m - 1):
        lengths = fit_segment_lengths(finest, idx[j], idx[j + 1], tangents[j], tangents[j + 1], samples_per_frame)
        ell_f[j] = lengths.ell_fwd
        ell_b[j + 1] = lengths.ell_back
    ell_b[0] = ell_f[0]
    ell_f[-1] = ell_b[-1]

    anchors = finest.anchors[idx]
    chain = BezierChain(
        finest.anchor_times[idx],
        anchors,
        anchors - ell_b[:, None] * tangents,
        anchors + ell_f[:, None] * tangents,
    )
    return chain, DegradeDiagnostics(ell_f, ell_b, degenerate, list(idx))


def degrade_chain(finest: BezierChain, s: int, samples_per_frame: int = DEFAULT_SAMPLES_PER_FRAME) -> BezierChain:
    """Coarse chain keeping ``ceil(M/s)`` anchors of ``finest``."""
    return degrade_chain_detailed(finest, s, samples_per_frame)[0]


def pack_levels(
    finest_chains: list[BezierChain],
    schedule: Schedule,
    samples_per_frame: int = DEFAULT_SAMPLES_PER_FRAME,
) -> MultiLevelMotion:
    """Degrade every joint's finest chain for each step and pack ``(M, K, 9)`` levels.

    Step 1 packs the finest chains themselves rather than degrading them.
    """
    if not isinstance(schedule, Schedule):
        schedule = Schedule(tuple(schedule))
    T = finest_chains[0].n_anchors
    if schedule.steps[0] > T - 1:
        raise DomainError(f"coarsest step {schedule.steps[0]} needs T > step, got T={T}")
    levels, level_times = [], []
    for s in schedule:
        chains = finest_chains if s == 1 else [degrade_chain(c, s, samples_per_frame) for c in finest_chains]
        levels.append(np.stack([c.packed() for c in chains], axis=1))
        level_times.append(chains[0].anchor_times.copy())
    return MultiLevelMotion(levels, level_times, schedule)


def build_multilevel(
    traj: Trajectory,
    schedule: Schedule | None = None,
    samples_per_frame: int = DEFAULT_SAMPLES_PER_FRAME,
) -> MultiLevelMotion:
    return pack_levels(fit_trajectory(traj), schedule or Schedule(), samples_per_frame)
