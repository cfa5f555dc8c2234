"""Cubic Bézier segments and chains.

Points are plain ``numpy`` arrays of shape ``(3,)`` (or ``(..., 3)`` when
vectorised). A chain stores one anchor plus a backward and a forward control
point per anchor; segment ``i`` runs from ``anchors[i]`` to ``anchors[i + 1]``
using ``fwd_controls[i]`` and ``back_controls[i + 1]`` as its inner controls.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InsufficientDataError


def as_vec3(p) -> np.ndarray:
    v = np.asarray(p, dtype=float)
    if v.shape != (3,):
        raise DomainError(f"expected a 3-vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise DomainError("vector has non-finite components")
    return v


def _bernstein(p0, c1, c2, p3, u):
    """Cubic Bernstein combination; ``u`` broadcasts against the points.

    Both the scalar and the vectorised evaluation paths go through here so
    that they agree bit for bit.
    """
    v = 1.0 - u
    b0 = v * v * v
    b1 = 3.0 * v * v * u
    b2 = 3.0 * v * u * u
    b3 = u * u * u
    return b0 * p0 + b1 * c1 + b2 * c2 + b3 * p3


@dataclass(frozen=True)
class CubicSegment:
    p0: np.ndarray
    c1: np.ndarray
    c2: np.ndarray
    p3: np.ndarray
    t_start: float = 0.0
    t_end: float = 1.0

    def __post_init__(self):
        for name in ("p0", "c1", "c2", "p3"):
            object.__setattr__(self, name, as_vec3(getattr(self, name)))
        if not self.t_end > self.t_start:
            raise DomainError("segment requires t_end > t_start")

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    def control_polygon(self) -> np.ndarray:
        return np.stack([self.p0, self.c1, self.c2, self.p3])


def _check_u(u):
    u_arr = np.asarray(u, dtype=float)
    if np.any(~(u_arr >= 0.0) | ~(u_arr <= 1.0)):
        raise DomainError("curve parameter u must lie in [0, 1]")
    return u_arr


def eval_segment(seg: CubicSegment, u) -> np.ndarray:
    """Point on ``seg`` at parameter ``u`` (scalar -> (3,), array -> (N, 3))."""
    u_arr = _check_u(u)
    if u_arr.ndim == 0:
        return _bernstein(seg.p0, seg.c1, seg.c2, seg.p3, float(u_arr))
    return _bernstein(seg.p0, seg.c1, seg.c2, seg.p3, u_arr[:, None])


def _bernstein_derivative(p0, c1, c2, p3, u, order):
    v = 1.0 - u
    if order == 1:
        return 3.0 * (v * v * (c1 - p0) + 2.0 * v * u * (c2 - c1) + u * u * (p3 - c2))
    if order == 2:
        return 6.0 * (v * (c2 - 2.0 * c1 + p0) + u * (p3 - 2.0 * c2 + c1))
    raise DomainError(f"derivative order must be 1 or 2, got {order!r}")


def eval_segment_derivative(seg: CubicSegment, u, order: int = 1) -> np.ndarray:
    """First or second derivative with respect to ``u`` (not wall time)."""
    u_arr = _check_u(u)
    if u_arr.ndim > 0:
        u_arr = u_arr[:, None]
    return _bernstein_derivative(seg.p0, seg.c1, seg.c2, seg.p3, u_arr, order)


@dataclass(frozen=True)
class BezierChain:
    """Piecewise cubic Bézier curve through ``M >= 2`` timed anchors.

    The first backward control and the last forward control do not take part
    in evaluation; they are kept as mirror images of their counterparts so the
    per-anchor ``(anchor, back, fwd)`` packing is always complete.
    """

    anchor_times: np.ndarray
    anchors: np.ndarray
    back_controls: np.ndarray
    fwd_controls: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.anchor_times, dtype=float)
        arrays = {}
        for name in ("anchors", "back_controls", "fwd_controls"):
            a = np.asarray(getattr(self, name), dtype=float)
            if a.ndim != 2 or a.shape[1] != 3:
                raise DomainError(f"{name} must have shape (M, 3), got {a.shape}")
            arrays[name] = a
        m = times.shape[0] if times.ndim == 1 else -1
        if m < 2:
            raise InsufficientDataError("a chain needs at least 2 anchors")
        if any(a.shape[0] != m for a in arrays.values()):
            raise DomainError("anchor_times, anchors and controls must share length M")
        if not np.all(np.diff(times) > 0):
            raise DomainError("anchor_times must be strictly increasing")
        if not (np.all(np.isfinite(times)) and all(np.all(np.isfinite(a)) for a in arrays.values())):
            raise DomainError("chain contains non-finite values")
        object.__setattr__(self, "anchor_times", times)
        for name, a in arrays.items():
            object.__setattr__(self, name, a)

    @property
    def n_anchors(self) -> int:
        return self.anchors.shape[0]

    @property
    def n_segments(self) -> int:
        return self.n_anchors - 1

    @property
    def t_span(self) -> tuple[float, float]:
        return float(self.anchor_times[0]), float(self.anchor_times[-1])

    def segment(self, i: int) -> CubicSegment:
        if not 0 <= i < self.n_segments:
            raise DomainError(f"segment index {i} out of range [0, {self.n_segments})")
        return CubicSegment(
            self.anchors[i],
            self.fwd_controls[i],
            self.back_controls[i + 1],
            self.anchors[i + 1],
            float(self.anchor_times[i]),
            float(self.anchor_times[i + 1]),
        )

    def packed(self) -> np.ndarray:
        """``(M, 9)`` array: anchor | backward control | forward control."""
        return np.concatenate([self.anchors, self.back_controls, self.fwd_controls], axis=1)

    @classmethod
    def from_packed(cls, anchor_times, packed) -> BezierChain:
        packed = np.asarray(packed, dtype=float)
        return cls(anchor_times, packed[:, 0:3], packed[:, 3:6], packed[:, 6:9])


def segment_of_time(chain: BezierChain, t):
    """Map global time to ``(segment_index, u)``.

    At an interior anchor time the later segment is returned with ``u = 0``;
    the final anchor time maps to the last segment with ``u = 1``. Accepts a
    scalar or an array of times.
    """
    times = chain.anchor_times
    t_arr = np.asarray(t, dtype=float)
    if np.any(~(t_arr >= times[0]) | ~(t_arr <= times[-1])):
        raise DomainError(f"time outside chain span [{times[0]}, {times[-1]}]")
    idx = np.searchsorted(times, t_arr, side="right") - 1
    idx = np.minimum(idx, chain.n_segments - 1)
    u = (t_arr - times[idx]) / (times[idx + 1] - times[idx])
    if t_arr.ndim == 0:
        return int(idx), float(u)
    return idx, u


def eval_chain(chain: BezierChain, t) -> np.ndarray:
    """Evaluate the chain at time(s) ``t``; scalar -> (3,), array -> (N, 3)."""
    idx, u = segment_of_time(chain, t)
    a = chain.anchors
    if np.ndim(idx) == 0:
        return _bernstein(a[idx], chain.fwd_controls[idx], chain.back_controls[idx + 1], a[idx + 1], u)
    return _bernstein(
        a[idx], chain.fwd_controls[idx], chain.back_controls[idx + 1], a[idx + 1], u[:, None]
    )


def eval_chain_time_derivative(chain: BezierChain, t, order: int = 1, side: str = "right") -> np.ndarray:
    """Derivative with respect to global time; scalar -> (3,), array -> (N, 3).

    ``side`` picks the segment at an interior anchor: ``"right"`` uses the
    segment starting there, ``"left"`` the one ending there.
    """
    if side not in ("left", "right"):
        raise DomainError(f"side must be 'left' or 'right', got {side!r}")
    scalar = np.ndim(t) == 0
    idx, u = segment_of_time(chain, np.atleast_1d(np.asarray(t, dtype=float)))
    if side == "left":
        back = (u == 0.0) & (idx > 0)
        idx = np.where(back, idx - 1, idx)
        u = np.where(back, 1.0, u)
    a = chain.anchors
    dur = (chain.anchor_times[idx + 1] - chain.anchor_times[idx])[:, None]
    d = _bernstein_derivative(a[idx], chain.fwd_controls[idx], chain.back_controls[idx + 1], a[idx + 1], u[:, None], order)
    d = d / dur**order
    return d[0] if scalar else d
