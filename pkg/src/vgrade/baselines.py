"""Reference rows: empirical max, empirical min, and the dataset average.

Every dimension gets its bound from one of five constructions:

* theoretical   - 1.0 (max side) or 0.0 (min side) is attainable by some
                  video, so the bound is used directly;
* retrieved_max / retrieved_avg - statistics over real retrieved videos
                  scored by the engine;
* noise_clip    - minimum score over i.i.d. Gaussian noise clips;
* composed_video - minimum consistency over clips stitched from frames of
                  different source videos (content changes every frame),
                  repeated many times.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FeatureTrack, FrameSequence
from .dimensions import DIMENSIONS
from .errors import EmptyInput, PoolTooSmall, SchemaViolation
from .quality import cross_frame_consistency

BASELINE_KINDS = ("empirical_max", "empirical_min", "webvid_avg")
PROVENANCES = (
    "retrieved_max",
    "retrieved_avg",
    "theoretical",
    "noise_clip",
    "composed_video",
)

# Dimensions whose maximum cannot plausibly reach 100%, so the max is taken
# over retrieved real videos instead of assumed.
RETRIEVED_MAX_DIMENSIONS = frozenset(
    {
        "motion_smoothness",
        "scene",
        "appearance_style",
        "temporal_style",
        "overall_consistency",
    }
)

# Minimum-side constructions.
NOISE_MIN_DIMENSIONS = frozenset(
    {
        "temporal_flickering",
        "motion_smoothness",
        "human_action",
        "appearance_style",
        "temporal_style",
        "overall_consistency",
    }
)
COMPOSED_MIN_DIMENSIONS = frozenset(
    {"subject_consistency", "background_consistency"}
)
THEORETICAL_MIN_DIMENSIONS = frozenset(DIMENSIONS) - NOISE_MIN_DIMENSIONS - (
    COMPOSED_MIN_DIMENSIONS
)

NOISE_MEAN = 127.5
NOISE_SIGMA = 64.0
DEFAULT_REPETITIONS = 1000
DEFAULT_NOISE_SEED = 0


@dataclass(frozen=True)
class BaselineRow:
    """One reference row: a score and its provenance per dimension."""

    kind: str
    scores: dict
    provenance: dict

    def __post_init__(self):
        if self.kind not in BASELINE_KINDS:
            raise SchemaViolation(f"unknown baseline kind {self.kind!r}")
        if set(self.scores) != set(self.provenance):
            raise SchemaViolation(f"{self.kind}: scores/provenance keys differ")
        for tag, score in self.scores.items():
            if tag not in DIMENSIONS:
                raise SchemaViolation(f"{self.kind}: unknown dimension {tag!r}")
            if not 0.0 <= score <= 1.0:
                raise SchemaViolation(
                    f"{self.kind}: score {score} for {tag} outside [0, 1]"
                )
            if self.provenance[tag] not in PROVENANCES:
                raise SchemaViolation(
                    f"{self.kind}: unknown provenance {self.provenance[tag]!r}"
                )


def empirical_max(per_video_scores: list[float] | None, dimension: str) -> float:
    """Best plausible score: 1.0 where attainable, else the retrieved maximum."""
    if dimension not in RETRIEVED_MAX_DIMENSIONS:
        return 1.0
    if not per_video_scores:
        raise EmptyInput(f"{dimension}: empirical max needs retrieved scores")
    return max(per_video_scores)


def empirical_min(per_video_scores: list[float] | None, dimension: str) -> float:
    """Worst plausible score: 0.0 where attainable, else the degenerate minimum."""
    if dimension in THEORETICAL_MIN_DIMENSIONS:
        return 0.0
    if not per_video_scores:
        raise EmptyInput(f"{dimension}: empirical min needs degenerate-clip scores")
    return min(per_video_scores)


def webvid_avg(per_video_scores: list[float]) -> float:
    """Mean score over the retrieved dataset videos."""
    if not per_video_scores:
        raise EmptyInput("dataset average needs at least one score")
    return float(np.mean(np.asarray(sorted(per_video_scores), dtype=np.float64)))


def build_empirical_max(retrieved: dict[str, list[float]]) -> BaselineRow:
    """Assemble the max row; retrieved dims without scores are omitted."""
    scores: dict = {}
    provenance: dict = {}
    for tag in DIMENSIONS:
        if tag in RETRIEVED_MAX_DIMENSIONS:
            if tag not in retrieved:
                continue
            scores[tag] = empirical_max(retrieved[tag], tag)
            provenance[tag] = "retrieved_max"
        else:
            scores[tag] = 1.0
            provenance[tag] = "theoretical"
    return BaselineRow("empirical_max", scores, provenance)


def build_empirical_min(degenerate: dict[str, list[float]]) -> BaselineRow:
    """Assemble the min row from noise-clip and composed-clip scores."""
    scores: dict = {}
    provenance: dict = {}
    for tag in DIMENSIONS:
        if tag in THEORETICAL_MIN_DIMENSIONS:
            scores[tag] = 0.0
            provenance[tag] = "theoretical"
        elif tag in degenerate:
            scores[tag] = empirical_min(degenerate[tag], tag)
            provenance[tag] = (
                "composed_video" if tag in COMPOSED_MIN_DIMENSIONS else "noise_clip"
            )
    return BaselineRow("empirical_min", scores, provenance)


def build_webvid_avg(retrieved: dict[str, list[float]]) -> BaselineRow:
    scores = {tag: webvid_avg(vals) for tag, vals in retrieved.items()}
    provenance = {tag: "retrieved_avg" for tag in scores}
    return BaselineRow("webvid_avg", scores, provenance)


def check_row_ordering(rows: list[BaselineRow]) -> list[str]:
    """min <= avg <= max per dimension, wherever all three rows carry it."""
    by_kind = {row.kind: row for row in rows}
    violations = []
    if len(by_kind) != len(rows):
        violations.append("duplicate baseline kinds")
        return violations
    lo = by_kind.get("empirical_min")
    mid = by_kind.get("webvid_avg")
    hi = by_kind.get("empirical_max")
    for tag in DIMENSIONS:
        values = [
            (row.kind, row.scores[tag])
            for row in (lo, mid, hi)
            if row is not None and tag in row.scores
        ]
        for (kind_a, a), (kind_b, b) in zip(values, values[1:]):
            if a > b:
                violations.append(
                    f"{tag}: {kind_a} {a:.6f} exceeds {kind_b} {b:.6f}"
                )
    return violations


def make_noise_clip(
    height: int, width: int, frame_count: int, rng_seed: int
) -> FrameSequence:
    """I.i.d. Gaussian noise frames (mean 127.5, sigma 64, clamped to [0, 255])."""
    if height < 1 or width < 1 or frame_count < 1:
        raise SchemaViolation("noise clip dimensions must be positive")
    rng = np.random.default_rng(rng_seed)
    raw = rng.normal(NOISE_MEAN, NOISE_SIGMA, size=(frame_count, height, width, 3))
    frames = np.clip(np.rint(raw), 0, 255).astype(np.uint8)
    return FrameSequence(
        f"noise_{rng_seed}", tuple(frames[t] for t in range(frame_count)), fps=8.0
    )


def _composed_indices(
    source_sizes: list[int], frame_count: int, rng: np.random.Generator
) -> list[tuple[int, int]]:
    """Pick (source, frame) pairs so consecutive picks use different sources."""
    if len(source_sizes) < 2:
        raise PoolTooSmall(
            f"composition needs >= 2 source videos, have {len(source_sizes)}"
        )
    if sum(source_sizes) < frame_count:
        raise PoolTooSmall(
            f"pool holds {sum(source_sizes)} frames, need {frame_count}"
        )
    picks: list[tuple[int, int]] = []
    previous = -1
    for _ in range(frame_count):
        candidates = [i for i in range(len(source_sizes)) if i != previous]
        source = int(rng.choice(candidates))
        frame = int(rng.integers(source_sizes[source]))
        picks.append((source, frame))
        previous = source
    return picks


def make_composed_video(
    frame_pool: list[FrameSequence], frame_count: int, rng_seed
) -> FrameSequence:
    """Stitch a clip whose content jumps to a different source every frame."""
    rng = np.random.default_rng(rng_seed)
    picks = _composed_indices(
        [seq.frame_count for seq in frame_pool], frame_count, rng
    )
    frames = tuple(frame_pool[s].frames[f] for s, f in picks)
    return FrameSequence("composed", frames, fps=frame_pool[0].fps)


def compose_feature_track(
    tracks: list[FeatureTrack], frame_count: int, rng_seed
) -> FeatureTrack:
    """Stitch feature rows with the same sampling rule as make_composed_video."""
    rng = np.random.default_rng(rng_seed)
    picks = _composed_indices(
        [track.frame_count for track in tracks], frame_count, rng
    )
    rows = np.stack([tracks[s].vectors[f] for s, f in picks])
    return FeatureTrack("composed", tracks[0].kind, rows)


def min_composed_consistency(
    tracks: list[FeatureTrack],
    frame_count: int,
    repetitions: int = DEFAULT_REPETITIONS,
    seed: int = DEFAULT_NOISE_SEED,
) -> float:
    """Minimum consistency over repeated random compositions."""
    if repetitions < 1:
        raise EmptyInput("repetitions must be >= 1")
    scores = []
    for rep in range(repetitions):
        composed = compose_feature_track(tracks, frame_count, (seed, rep))
        scores.append(cross_frame_consistency(composed))
    return min(scores)
