"""Shared domain types and the elementary numeric kernels every metric uses.

All arithmetic runs in float64 regardless of how values are stored on disk,
so that aggregation is order-insensitive at the reported precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    NonFiniteValue,
    OutOfRange,
    SchemaViolation,
    ShapeMismatch,
    ZeroVector,
)

ZERO_NORM_EPS = 1e-12

FEATURE_KINDS = ("dino", "clip_image", "viclip_video", "text")
SCALAR_METRICS = ("aesthetic_raw", "imaging_raw")
SCALAR_RANGES = {"aesthetic_raw": (0.0, 10.0), "imaging_raw": (0.0, 100.0)}


def normalize_label(label: str) -> str:
    """Canonical label form: lowercased and stripped.

    Extractor vocabularies vary in casing, so all label comparisons go
    through this.
    """
    return label.strip().lower()


def dropped_frame_indices(frame_count: int) -> tuple[int, ...]:
    """Indices removed for the interpolation protocol: 1, 3, ... up to T-2.

    Both endpoints always survive so the interpolator has surrounding
    context; a 9-frame video drops (1, 3, 5, 7), a 16-frame video drops
    (1, 3, 5, 7, 9, 11, 13).
    """
    if frame_count < 3:
        return ()
    return tuple(range(1, frame_count - 1, 2))


def unit_normalize(v: np.ndarray) -> np.ndarray:
    """Scale ``v`` to Euclidean norm 1, preserving direction."""
    v = np.asarray(v, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise NonFiniteValue("vector contains non-finite values")
    norm = float(np.linalg.norm(v))
    if norm < ZERO_NORM_EPS:
        raise ZeroVector(f"cannot normalize vector with norm {norm!r}")
    return v / norm


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Dot product of two unit vectors; the cosine of their angle."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"vector shapes differ: {a.shape} vs {b.shape}")
    return float(np.clip(np.dot(a, b), -1.0, 1.0))


def mae(frame_a: np.ndarray, frame_b: np.ndarray) -> float:
    """Mean absolute error over all pixel-channel positions, in [0, 255]."""
    a = np.asarray(frame_a)
    b = np.asarray(frame_b)
    if a.shape != b.shape:
        raise ShapeMismatch(f"frame shapes differ: {a.shape} vs {b.shape}")
    return float(np.mean(np.abs(a.astype(np.float64) - b.astype(np.float64))))


@dataclass(frozen=True)
class FrameSequence:
    """One generated video as decoded 8-bit RGB frames.

    Frames are (H, W, 3) uint8 arrays sharing one resolution. Immutable
    after construction and safe to share across workers.
    """

    video_id: str
    frames: tuple[np.ndarray, ...]
    fps: float
    model_id: str = ""
    prompt_id: str = ""

    def __post_init__(self):
        if len(self.frames) < 1:
            raise SchemaViolation(f"{self.video_id}: frame count must be >= 1")
        if self.fps <= 0:
            raise SchemaViolation(f"{self.video_id}: fps must be positive")
        shape = self.frames[0].shape
        for i, f in enumerate(self.frames):
            if f.shape != shape or f.ndim != 3 or f.shape[2] != 3:
                raise SchemaViolation(
                    f"{self.video_id}: frame {i} shape {f.shape} != {shape}"
                )
            if f.dtype != np.uint8:
                raise SchemaViolation(f"{self.video_id}: frame {i} is not uint8")

    @property
    def frame_count(self) -> int:
        return len(self.frames)

    @property
    def height(self) -> int:
        return int(self.frames[0].shape[0])

    @property
    def width(self) -> int:
        return int(self.frames[0].shape[1])


@dataclass(frozen=True)
class FeatureTrack:
    """A T x D matrix of embedding rows for one video (or a single text row).

    ``viclip_video`` and ``text`` tracks carry exactly one row.
    """

    video_id: str
    kind: str
    vectors: np.ndarray

    def __post_init__(self):
        if self.kind not in FEATURE_KINDS:
            raise SchemaViolation(f"unknown feature kind {self.kind!r}")
        vectors = np.asarray(self.vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[1] < 1:
            raise SchemaViolation(
                f"{self.video_id}: feature matrix must be 2-D with D >= 1"
            )
        if not np.all(np.isfinite(vectors)):
            raise NonFiniteValue(f"{self.video_id}: non-finite feature values")
        if self.kind in ("viclip_video", "text") and vectors.shape[0] != 1:
            raise SchemaViolation(
                f"{self.video_id}: {self.kind} track must have exactly one row"
            )
        object.__setattr__(self, "vectors", vectors)

    @property
    def frame_count(self) -> int:
        return int(self.vectors.shape[0])

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def normalized(self) -> "FeatureTrack":
        """Return a copy with every row scaled to unit length."""
        rows = np.stack([unit_normalize(r) for r in self.vectors])
        return FeatureTrack(self.video_id, self.kind, rows)


@dataclass(frozen=True)
class FlowTrack:
    """Optical-flow magnitude grids between consecutive frames.

    A T-frame video has exactly T-1 grids, all of one spatial shape, with
    non-negative finite entries in pixels/frame.
    """

    video_id: str
    magnitudes: np.ndarray

    def __post_init__(self):
        mags = np.asarray(self.magnitudes, dtype=np.float64)
        if mags.ndim != 3 or mags.shape[0] < 1:
            raise SchemaViolation(
                f"{self.video_id}: flow must be (T-1, h, w) with T >= 2"
            )
        if not np.all(np.isfinite(mags)):
            raise NonFiniteValue(f"{self.video_id}: non-finite flow magnitudes")
        if np.any(mags < 0):
            raise OutOfRange(f"{self.video_id}: negative flow magnitudes")
        object.__setattr__(self, "magnitudes", mags)

    @property
    def pair_count(self) -> int:
        return int(self.magnitudes.shape[0])

    @property
    def grid_shape(self) -> tuple[int, int]:
        return int(self.magnitudes.shape[1]), int(self.magnitudes.shape[2])


@dataclass(frozen=True)
class Detection:
    """One detected object: label, confidence, box, optional dense caption."""

    label: str
    score: float
    bbox: tuple[float, float, float, float]
    caption: str | None = None

    def __post_init__(self):
        label = normalize_label(self.label)
        if not label:
            raise SchemaViolation("detection label must be non-empty")
        object.__setattr__(self, "label", label)
        if not 0.0 <= self.score <= 1.0:
            raise OutOfRange(f"detection score {self.score} outside [0, 1]")
        x0, y0, x1, y1 = self.bbox
        if not (x0 < x1 and y0 < y1):
            raise SchemaViolation(f"degenerate bbox {self.bbox}")

    @property
    def center(self) -> tuple[float, float]:
        x0, y0, x1, y1 = self.bbox
        return (x0 + x1) / 2.0, (y0 + y1) / 2.0


@dataclass(frozen=True)
class DetectionTrack:
    """Per-frame detection lists for one video (length T, possibly empty lists)."""

    video_id: str
    per_frame: tuple[tuple[Detection, ...], ...]

    @property
    def frame_count(self) -> int:
        return len(self.per_frame)


@dataclass(frozen=True)
class ScalarTrack:
    """One per-frame scalar series (raw aesthetic or imaging predictor output)."""

    video_id: str
    metric: str
    values: tuple[float, ...]

    def __post_init__(self):
        if self.metric not in SCALAR_METRICS:
            raise SchemaViolation(f"unknown scalar metric {self.metric!r}")
        if len(self.values) < 1:
            raise SchemaViolation(f"{self.video_id}: empty {self.metric} track")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        lo, hi = SCALAR_RANGES[self.metric]
        for v in self.values:
            if not np.isfinite(v):
                raise NonFiniteValue(f"{self.video_id}: non-finite {self.metric}")
            if not lo <= v <= hi:
                raise OutOfRange(
                    f"{self.video_id}: {self.metric} value {v} outside [{lo}, {hi}]"
                )


@dataclass(frozen=True)
class ActionLogits:
    """Top action-classification entries for one video, descending by logit."""

    video_id: str
    entries: tuple[tuple[str, float], ...] = field(default_factory=tuple)

    def __post_init__(self):
        if len(self.entries) > 5:
            raise SchemaViolation(f"{self.video_id}: more than 5 logit entries")
        entries = tuple(
            (normalize_label(label), float(logit)) for label, logit in self.entries
        )
        labels = [label for label, _ in entries]
        if len(set(labels)) != len(labels):
            raise SchemaViolation(f"{self.video_id}: duplicate action labels")
        prev = 1.0
        for label, logit in entries:
            if not 0.0 <= logit <= 1.0:
                raise OutOfRange(f"{self.video_id}: logit {logit} outside [0, 1]")
            if logit > prev:
                raise SchemaViolation(f"{self.video_id}: logits not non-increasing")
            prev = logit
        object.__setattr__(self, "entries", entries)
