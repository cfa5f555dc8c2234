"""JSON/CSV readers and writers plus run configuration.

Floats are written with ``repr`` (shortest string that round-trips a
double exactly), so every writer's output reads back bit for bit.
"""
from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .degradation import DEFAULT_SAMPLES_PER_FRAME, DEFAULT_SCHEDULE, MultiLevelMotion, Schedule
from .errors import DomainError, InsufficientDataError
from .fitting import Trajectory
from .geometry import BezierChain
from .synth import FrameMask, SynthSpec

CONFIG_ENV = "MOTIONCURVE_CONFIG"


class FileFormatError(DomainError):
    """A file is malformed or inconsistent with its declared fields."""


def _require(doc: dict, key: str, where: str):
    if not isinstance(doc, dict) or key not in doc:
        raise FileFormatError(f"{where}: missing field '{key}'")
    return doc[key]


def _array(value, shape_tail: tuple[int, ...], name: str) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FileFormatError(f"field '{name}' is not a numeric array: {exc}") from None
    if arr.ndim != 1 + len(shape_tail) or arr.shape[1:] != shape_tail:
        raise FileFormatError(f"field '{name}' has shape {arr.shape}, expected (*, {', '.join(map(str, shape_tail))})")
    if not np.all(np.isfinite(arr)):
        raise FileFormatError(f"field '{name}' contains non-finite values")
    return arr


def _load_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: malformed JSON ({exc})") from None


def _dump_json(doc: dict, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


# trajectories ---------------------------------------------------------------


def trajectory_to_dict(traj: Trajectory, joint_names=None) -> dict:
    doc = {"fps": traj.fps, "T": traj.T, "K": traj.K}
    if joint_names is not None:
        doc["joint_names"] = list(joint_names)
    doc["frames"] = traj.positions.tolist()
    return doc


def trajectory_from_dict(doc: dict, where: str = "trajectory") -> Trajectory:
    frames = _require(doc, "frames", where)
    try:
        arr = np.asarray(frames, dtype=float)
    except (TypeError, ValueError):
        raise FileFormatError(f"{where}: field 'frames' is not a T x K x 3 numeric array") from None
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise FileFormatError(f"{where}: field 'frames' has shape {arr.shape}, expected (T, K, 3)")
    for key, actual in (("T", arr.shape[0]), ("K", arr.shape[1])):
        if key in doc and int(doc[key]) != actual:
            raise FileFormatError(f"{where}: field '{key}' declares {doc[key]} but 'frames' has {actual}")
    if arr.shape[0] < 2:
        raise InsufficientDataError(f"{where}: insufficient frames (T={arr.shape[0]}, need T >= 2)")
    if not np.all(np.isfinite(arr)):
        raise FileFormatError(f"{where}: field 'frames' contains non-finite values")
    names = doc.get("joint_names")
    if names is not None and len(names) != arr.shape[1]:
        raise FileFormatError(f"{where}: field 'joint_names' has {len(names)} entries, expected {arr.shape[1]}")
    return Trajectory(arr, float(doc.get("fps", 10.0)))


def read_trajectory(path) -> Trajectory:
    return trajectory_from_dict(_load_json(path), str(path))


def write_trajectory(traj: Trajectory, path, joint_names=None) -> None:
    _dump_json(trajectory_to_dict(traj, joint_names), path)


# chains ---------------------------------------------------------------------


def chains_to_dict(chains: list[BezierChain], schedule_step: int = 1, fps: float | None = None) -> dict:
    doc = {"schedule_step": int(schedule_step)}
    if fps is not None:
        doc["fps"] = fps
    doc["joints"] = [
        {
            "anchor_times": c.anchor_times.tolist(),
            "anchors": c.anchors.tolist(),
            "back_controls": c.back_controls.tolist(),
            "fwd_controls": c.fwd_controls.tolist(),
        }
        for c in chains
    ]
    return doc


def chains_from_dict(doc: dict, where: str = "chain file") -> tuple[list[BezierChain], int, float | None]:
    step = int(_require(doc, "schedule_step", where))
    joints = _require(doc, "joints", where)
    if not isinstance(joints, list) or not joints:
        raise FileFormatError(f"{where}: field 'joints' must be a non-empty list")
    chains = []
    for k, j in enumerate(joints):
        jw = f"{where}: joints[{k}]"
        times = _array(_require(j, "anchor_times", jw), (), f"joints[{k}].anchor_times")
        parts = [_array(_require(j, name, jw), (3,), f"joints[{k}].{name}") for name in ("anchors", "back_controls", "fwd_controls")]
        if any(p.shape[0] != times.shape[0] for p in parts):
            raise FileFormatError(f"{jw}: anchor_times, anchors and controls must share length M")
        chains.append(BezierChain(times, *parts))
    fps = doc.get("fps")
    return chains, step, None if fps is None else float(fps)


def read_chains(path):
    return chains_from_dict(_load_json(path), str(path))


def write_chains(chains, path, schedule_step: int = 1, fps: float | None = None) -> None:
    _dump_json(chains_to_dict(chains, schedule_step, fps), path)


# multi-level ----------------------------------------------------------------


def multilevel_to_dict(mlm: MultiLevelMotion) -> dict:
    return {
        "schedule": list(mlm.schedule.steps),
        "levels": [
            {"step": s, "anchor_times": t.tolist(), "data": lvl.tolist()}
            for s, t, lvl in zip(mlm.schedule, mlm.anchor_times, mlm.levels)
        ],
    }


def multilevel_from_dict(doc: dict, where: str = "multilevel file") -> MultiLevelMotion:
    schedule = Schedule(tuple(_require(doc, "schedule", where)))
    levels, times = [], []
    for i, lvl in enumerate(_require(doc, "levels", where)):
        data = np.asarray(_require(lvl, "data", f"{where}: levels[{i}]"), dtype=float)
        if data.ndim != 3 or data.shape[2] != 9:
            raise FileFormatError(f"{where}: levels[{i}].data has shape {data.shape}, expected (M, K, 9)")
        levels.append(data)
        times.append(_array(_require(lvl, "anchor_times", f"{where}: levels[{i}]"), (), f"levels[{i}].anchor_times"))
    return MultiLevelMotion(levels, times, schedule)


def read_multilevel(path) -> MultiLevelMotion:
    return multilevel_from_dict(_load_json(path), str(path))


def write_multilevel(mlm: MultiLevelMotion, path) -> None:
    _dump_json(multilevel_to_dict(mlm), path)


# frame masks ----------------------------------------------------------------


def frame_mask_csv(mask: FrameMask) -> str:
    rows = ["frame,observed"] + [f"{t},{int(v)}" for t, v in enumerate(mask.observed)]
    return "\n".join(rows) + "\n"


def read_frame_mask(path) -> FrameMask:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    try:
        flags = [bool(int(r["observed"])) for r in rows]
    except (KeyError, ValueError):
        raise FileFormatError(f"{path}: expected columns 'frame,observed' with 0/1 values") from None
    return FrameMask(np.array(flags, dtype=bool))


def write_csv(path, header: list[str], rows: list[list]) -> None:
    """Locale-independent CSV: '.' decimals, '\\n' line endings, header first."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


# configuration --------------------------------------------------------------


@dataclass
class RunConfig:
    schedule: list[int] = field(default_factory=lambda: list(DEFAULT_SCHEDULE))
    samples_per_frame: int = DEFAULT_SAMPLES_PER_FRAME
    lambda_M: float = 0.5
    fps: float = 10.0
    seed: int = 0
    synth: SynthSpec | None = None

    def __post_init__(self):
        Schedule(tuple(self.schedule))
        if self.samples_per_frame < 1:
            raise DomainError("samples_per_frame must be >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["synth"] = None if self.synth is None else self.synth.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> RunConfig:
        known = {"schedule", "samples_per_frame", "lambda_M", "fps", "seed", "synth"}
        unknown = set(d) - known
        if unknown:
            raise FileFormatError(f"unknown config fields: {sorted(unknown)}")
        kwargs = {k: v for k, v in d.items() if k != "synth"}
        if d.get("synth") is not None:
            kwargs["synth"] = SynthSpec.from_dict(d["synth"])
        return cls(**kwargs)


def load_config(path=None) -> RunConfig:
    """Config from ``path``, else from ``$MOTIONCURVE_CONFIG``, else defaults."""
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return RunConfig()
    return RunConfig.from_dict(_load_json(path))
