"""Bézier multi-level motion representation: fitting, degradation,
resampling, token masks and motion metrics."""
from .degradation import (
    MultiLevelMotion,
    Schedule,
    SegmentLengths,
    build_multilevel,
    degrade_chain,
    extract_unit_tangent,
    fit_segment_lengths,
    pack_levels,
    select_anchor_indices,
)
from .errors import DomainError, InsufficientDataError, MotionCurveError, SingularSystemError
from .fitting import Trajectory, TridiagonalSystem, fit_smooth_chain, fit_trajectory, solve_tridiagonal
from .geometry import (
    BezierChain,
    CubicSegment,
    eval_chain,
    eval_segment,
    eval_segment_derivative,
    segment_of_time,
)
from .metrics import MetricReport, accel_error, evaluate, mpjpe, representation_loss, rmse
from .reconstruction import AttentionMask, bridge_gaps, build_block_causal_mask, resample_chains, resample_level
from .synth import FrameMask, SynthSpec, add_noise, gen_trajectory, make_frame_mask

__version__ = "0.1.0"
