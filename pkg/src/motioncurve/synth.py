"""Synthetic trajectories, measurement noise and frame-drop masks.

Everything here is a pure function of its arguments and seed. Random draws
use ``numpy.random.default_rng(seed)`` (PCG64), so output is reproducible
across runs on the same numpy release.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.signal import butter, sosfiltfilt

from .errors import DomainError
from .fitting import Trajectory

KINDS = ("line", "sinusoid", "circle", "lissajous", "smooth-walk", "polynomial")

_DEFAULTS = {
    "line": {"velocity": [0.01, 0.0, 0.0], "origin": [0.0, 0.0, 0.0], "joint_offset": [0.0, 0.1, 0.0]},
    "sinusoid": {
        "amplitude": 0.3,
        "frequency": 0.25,
        "axis": [1.0, 0.0, 0.0],
        "joint_phase": 0.4,
        "joint_offset": [0.0, 0.1, 0.0],
    },
    "circle": {"radius": 0.5, "frequency": 0.25, "joint_phase": 0.4, "joint_offset": [0.0, 0.0, 0.1]},
    "lissajous": {
        "amplitudes": [0.3, 0.2, 0.1],
        "frequencies": [0.2, 0.3, 0.5],
        "phases": [0.0, 0.5, 1.0],
        "joint_phase": 0.4,
    },
    "polynomial": {
        # per-axis coefficients in increasing powers of time in seconds
        "coefficients": [[0.0, 0.5, 0.1], [0.0, 0.0, -0.05], [1.0, 0.0, 0.0]],
        "joint_offset": [0.0, 0.1, 0.0],
    },
    "smooth-walk": {"accel_std": 2.0, "cutoff": 1.0},
}


@dataclass(frozen=True)
class SynthSpec:
    kind: str
    T: int = 128
    K: int = 1
    fps: float = 10.0
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown trajectory kind {self.kind!r}; expected one of {KINDS}")
        if self.T < 2 or self.K < 1:
            raise DomainError(f"need T >= 2 and K >= 1, got T={self.T}, K={self.K}")
        if not self.fps > 0:
            raise DomainError(f"fps must be positive, got {self.fps}")
        unknown = set(self.params) - set(_DEFAULTS[self.kind])
        if unknown:
            raise DomainError(f"unknown parameters for {self.kind}: {sorted(unknown)}")

    def param(self, name):
        return self.params.get(name, _DEFAULTS[self.kind][name])

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> SynthSpec:
        return cls(
            kind=d["kind"],
            T=int(d.get("T", 128)),
            K=int(d.get("K", 1)),
            fps=float(d.get("fps", 10.0)),
            params=dict(d.get("params", {})),
            seed=int(d.get("seed", 0)),
        )


def position_function(spec: SynthSpec):
    """Closed-form positions ``f(frames) -> (N, K, 3)`` for the analytic kinds.

    ``frames`` are (possibly fractional) frame indices.
    """
    if spec.kind == "smooth-walk":
        raise DomainError("smooth-walk has no closed form")
    k = np.arange(spec.K)[None, :, None]
    fps = spec.fps

    def offsets(name="joint_offset"):
        return k * np.asarray(spec.param(name), dtype=float)

    if spec.kind == "line":
        vel = np.asarray(spec.param("velocity"), dtype=float)
        origin = np.asarray(spec.param("origin"), dtype=float)
        return lambda f: origin + offsets() + np.asarray(f, dtype=float)[:, None, None] * vel

    if spec.kind == "sinusoid":
        axis = np.asarray(spec.param("axis"), dtype=float)
        amp, freq, dphi = spec.param("amplitude"), spec.param("frequency"), spec.param("joint_phase")

        def sinusoid(f):
            ts = np.asarray(f, dtype=float)[:, None, None] / fps
            return offsets() + amp * np.sin(2 * np.pi * freq * ts + dphi * k) * axis

        return sinusoid

    if spec.kind == "circle":
        r, freq, dphi = spec.param("radius"), spec.param("frequency"), spec.param("joint_phase")

        def circle(f):
            ang = 2 * np.pi * freq * np.asarray(f, dtype=float)[:, None] / fps + dphi * k[..., 0]
            xyz = np.stack([r * np.cos(ang), r * np.sin(ang), np.zeros_like(ang)], axis=-1)
            return offsets() + xyz

        return circle

    if spec.kind == "lissajous":
        amps = np.asarray(spec.param("amplitudes"), dtype=float)
        freqs = np.asarray(spec.param("frequencies"), dtype=float)
        phases = np.asarray(spec.param("phases"), dtype=float)
        dphi = spec.param("joint_phase")

        def lissajous(f):
            ts = np.asarray(f, dtype=float)[:, None, None] / fps
            return amps * np.sin(2 * np.pi * freqs * ts + phases + dphi * k)

        return lissajous

    coeffs = [np.asarray(c, dtype=float) for c in spec.param("coefficients")]
    if len(coeffs) != 3:
        raise DomainError("polynomial needs one coefficient list per axis")

    def polynomial(f):
        ts = np.asarray(f, dtype=float) / fps
        xyz = np.stack([np.polynomial.polynomial.polyval(ts, c) for c in coeffs], axis=-1)
        return offsets() + xyz[:, None, :]

    return polynomial


def _smooth_walk(spec: SynthSpec) -> np.ndarray:
    rng = np.random.default_rng(spec.seed)
    accel = rng.normal(0.0, spec.param("accel_std"), size=(spec.T, spec.K, 3))
    vel = np.cumsum(accel, axis=0) / spec.fps
    pos = np.cumsum(vel, axis=0) / spec.fps
    cutoff = spec.param("cutoff")
    nyquist = spec.fps / 2.0
    if not 0 < cutoff < nyquist:
        raise DomainError(f"cutoff must lie in (0, {nyquist}) Hz, got {cutoff}")
    sos = butter(4, cutoff / nyquist, output="sos")
    padlen = min(3 * (2 * len(sos) + 1), spec.T - 1)
    return sosfiltfilt(sos, pos, axis=0, padlen=padlen)


def gen_trajectory(spec: SynthSpec) -> Trajectory:
    if spec.kind == "smooth-walk":
        pos = _smooth_walk(spec)
    else:
        pos = position_function(spec)(np.arange(spec.T))
    return Trajectory(np.broadcast_to(pos, (spec.T, spec.K, 3)).copy(), spec.fps)


def add_noise(traj: Trajectory, sigma: float, seed: int = 0) -> Trajectory:
    """Add iid zero-mean Gaussian offsets with standard deviation ``sigma`` (m)."""
    if sigma < 0:
        raise DomainError(f"sigma must be non-negative, got {sigma}")
    if sigma == 0:
        return Trajectory(traj.positions.copy(), traj.fps)
    rng = np.random.default_rng(seed)
    return Trajectory(traj.positions + rng.normal(0.0, sigma, size=traj.positions.shape), traj.fps)


@dataclass(frozen=True)
class FrameMask:
    """Per-frame flags; True means the frame is observed."""

    observed: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "observed", np.asarray(self.observed, dtype=bool))

    @property
    def T(self) -> int:
        return self.observed.shape[0]

    @property
    def n_occluded(self) -> int:
        return int(self.T - np.count_nonzero(self.observed))

    def occluded_runs(self) -> list[tuple[int, int]]:
        """Maximal ``[start, stop)`` runs of occluded frames."""
        padded = np.concatenate([[False], ~self.observed, [False]]).astype(np.int8)
        edges = np.flatnonzero(np.diff(padded))
        return [(int(a), int(b)) for a, b in zip(edges[::2], edges[1::2])]


def occluded_count(T: int, ratio: float) -> int:
    # tolerance absorbs ratios like 0.29 * 100 = 28.999999999999996
    return int(math.floor(ratio * T + 1e-9))


def make_frame_mask(T: int, policy: str, ratio: float, seed: int = 0) -> FrameMask:
    """Drop ``floor(ratio * T)`` frames as one contiguous run or at random.

    For a fixed seed the random policy draws one permutation and occludes its
    prefix, so masks at growing ratios are nested.
    """
    if not 0.0 <= ratio <= 1.0:
        raise DomainError(f"ratio must lie in [0, 1], got {ratio}")
    if policy not in ("continuous", "random"):
        raise DomainError(f"unknown masking policy {policy!r}")
    n = occluded_count(T, ratio)
    if T - n < 2:
        raise DomainError(f"ratio {ratio} leaves {T - n} observed frames of {T} (need >= 2)")
    observed = np.ones(T, dtype=bool)
    if n == 0:
        return FrameMask(observed)
    rng = np.random.default_rng(seed)
    if policy == "continuous":
        start = int(rng.integers(0, T - n + 1))
        observed[start : start + n] = False
    else:
        observed[rng.permutation(T)[:n]] = False
    return FrameMask(observed)


def sinusoid_fixture(T: int = 128, K: int = 1, fps: float = 10.0) -> Trajectory:
    return gen_trajectory(SynthSpec("sinusoid", T=T, K=K, fps=fps))


def smooth_walk_fixture(seed: int = 7, T: int = 128, K: int = 1, fps: float = 10.0) -> Trajectory:
    return gen_trajectory(SynthSpec("smooth-walk", T=T, K=K, fps=fps, seed=seed))


def standard_corpus(T: int = 128, K: int = 3) -> dict[str, Trajectory]:
    """Named smooth fixtures covering every generator kind."""
    corpus = {kind: gen_trajectory(SynthSpec(kind, T=T, K=K)) for kind in KINDS if kind != "smooth-walk"}
    for seed in (7, 11, 23):
        corpus[f"smooth-walk-{seed}"] = smooth_walk_fixture(seed, T=T, K=K)
    return corpus
