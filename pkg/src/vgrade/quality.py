"""The seven video-quality dimension scorers.

Each scorer maps one video's artifacts to a score in [0, 1]; model-level
aggregation is the arithmetic mean over videos (for dynamic_degree, the
mean of 0/1 flags, i.e. the proportion of dynamic videos).

Flow-based thresholds are resolution-fair: a threshold expressed in
pixels/frame at 256x256 is scaled by the flow grid's diagonal relative to
the 256x256 diagonal, so 256- and 512-pixel models face the same relative
bar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    FeatureTrack,
    FlowTrack,
    FrameSequence,
    ScalarTrack,
    cosine,
    dropped_frame_indices,
    mae,
)
from .errors import (
    CountMismatch,
    EmptyFlow,
    EmptyInput,
    SchemaViolation,
    ShapeMismatch,
    TooFewFrames,
)

DEFAULT_TAU_DYNAMIC = 1.0
DEFAULT_TAU_STATIC = 1.0

_REFERENCE_DIAGONAL = math.hypot(256.0, 256.0)


@dataclass(frozen=True)
class DimensionScore:
    """Per-video scores and their model-level aggregate for one dimension."""

    dimension_tag: str
    per_video: dict
    model_score: float

    def __post_init__(self):
        if not self.per_video:
            raise EmptyInput(f"{self.dimension_tag}: no per-video scores")
        for vid, score in self.per_video.items():
            if not 0.0 <= score <= 1.0:
                raise SchemaViolation(
                    f"{self.dimension_tag}: score {score} for {vid} outside [0, 1]"
                )
        if not 0.0 <= self.model_score <= 1.0:
            raise SchemaViolation(
                f"{self.dimension_tag}: model score {self.model_score} outside [0, 1]"
            )


def aggregate(dimension_tag: str, per_video: dict) -> DimensionScore:
    """Mean per-video score in deterministic (video_id-sorted) order."""
    if not per_video:
        raise EmptyInput(f"{dimension_tag}: no per-video scores to aggregate")
    ordered = [per_video[vid] for vid in sorted(per_video)]
    model_score = float(np.mean(np.asarray(ordered, dtype=np.float64)))
    return DimensionScore(dimension_tag, dict(sorted(per_video.items())), model_score)


def scaled_tau(tau: float, grid_shape: tuple[int, int]) -> float:
    """Scale a 256x256-referenced pixel threshold to another grid size."""
    h, w = grid_shape
    return tau * math.hypot(float(h), float(w)) / _REFERENCE_DIAGONAL


def cross_frame_consistency(features: FeatureTrack) -> float:
    """Mean agreement of every frame with the first and previous frames.

    For unit rows x_1..x_T this is the mean over t = 2..T of
    (cos(x_1, x_t) + cos(x_{t-1}, x_t)) / 2, with each negative cosine
    floored at 0 so the result is a percentage in [0, 1].
    """
    if features.frame_count < 2:
        raise TooFewFrames(
            f"{features.video_id}: need >= 2 feature rows, "
            f"have {features.frame_count}"
        )
    rows = features.normalized().vectors
    total = 0.0
    for t in range(1, rows.shape[0]):
        first = max(0.0, cosine(rows[0], rows[t]))
        prev = max(0.0, cosine(rows[t - 1], rows[t]))
        total += (first + prev) / 2.0
    score = total / (rows.shape[0] - 1)
    return min(1.0, max(0.0, score))


def temporal_flickering(video: FrameSequence) -> float:
    """Mean absolute difference between consecutive frames, inverted to [0, 1].

    A perfectly steady video scores 1.0; alternating black/white frames
    score 0.0. Callers are expected to pre-filter with static_filter so
    that legitimate motion is not punished as flicker.
    """
    if video.frame_count < 2:
        raise TooFewFrames(
            f"{video.video_id}: need >= 2 frames, have {video.frame_count}"
        )
    degrees = [
        mae(video.frames[t - 1], video.frames[t])
        for t in range(1, video.frame_count)
    ]
    s = float(np.mean(np.asarray(degrees, dtype=np.float64)))
    return (255.0 - s) / 255.0


def static_filter(flow: FlowTrack, tau_static: float = DEFAULT_TAU_STATIC) -> bool:
    """True when the video is static, i.e. eligible for the flicker benchmark."""
    return dynamic_statistic(flow) < scaled_tau(tau_static, flow.grid_shape)


def motion_smoothness(video: FrameSequence, reconstructed: FrameSequence) -> float:
    """Agreement between dropped frames and their interpolated stand-ins.

    Frames 1, 3, ... are removed, an interpolation backend rebuilds them
    from the survivors, and the mean absolute error against the true
    frames is normalized the same way as flicker.
    """
    dropped = dropped_frame_indices(video.frame_count)
    if not dropped:
        raise TooFewFrames(
            f"{video.video_id}: need >= 3 frames to drop any, "
            f"have {video.frame_count}"
        )
    if reconstructed.frame_count != len(dropped):
        raise CountMismatch(
            f"{video.video_id}: {reconstructed.frame_count} reconstructed frames "
            f"for {len(dropped)} dropped indices"
        )
    errors = [
        mae(video.frames[idx], reconstructed.frames[i])
        for i, idx in enumerate(dropped)
    ]
    s = float(np.mean(np.asarray(errors, dtype=np.float64)))
    return (255.0 - s) / 255.0


def dynamic_statistic(flow: FlowTrack) -> float:
    """Mean of the largest 5% of magnitudes per frame pair, meaned over pairs."""
    pairs = flow.magnitudes
    if pairs.shape[0] < 1 or pairs.shape[1] * pairs.shape[2] < 1:
        raise EmptyFlow(f"{flow.video_id}: flow track has no magnitudes")
    n = pairs.shape[1] * pairs.shape[2]
    k = math.ceil(0.05 * n)
    per_pair = []
    for grid in pairs:
        flat = grid.reshape(-1)
        top = np.partition(flat, n - k)[n - k :]
        per_pair.append(float(np.mean(top)))
    return float(np.mean(np.asarray(per_pair, dtype=np.float64)))


def is_dynamic(flow: FlowTrack, tau_dynamic: float = DEFAULT_TAU_DYNAMIC) -> bool:
    return dynamic_statistic(flow) >= scaled_tau(tau_dynamic, flow.grid_shape)


def dynamic_degree(
    flows: dict, tau_dynamic: float = DEFAULT_TAU_DYNAMIC
) -> DimensionScore:
    """Proportion of videos whose top-5% flow clears the dynamic threshold.

    ``flows`` maps video_id to FlowTrack; per-video scores are the 0/1
    flags so the aggregate mean is exactly the proportion.
    """
    if not flows:
        raise EmptyInput("dynamic_degree: no flow tracks")
    per_video = {
        vid: (1.0 if is_dynamic(flow, tau_dynamic) else 0.0)
        for vid, flow in flows.items()
    }
    return aggregate("dynamic_degree", per_video)


_QUALITY_DIVISORS = {"aesthetic_raw": 10.0, "imaging_raw": 100.0}


def framewise_quality(track: ScalarTrack) -> float:
    """Mean per-frame predictor output, normalized by the metric's ceiling."""
    divisor = _QUALITY_DIVISORS[track.metric]
    return float(np.mean(np.asarray(track.values, dtype=np.float64))) / divisor
