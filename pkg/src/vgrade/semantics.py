"""The nine video-condition consistency scorers.

These consume detections, captions, action logits, and embeddings against
the semantic labels a prompt carries. All scores land in [0, 1]; the color
scorer may instead return NOT_APPLICABLE when the target object never
shows up with usable color evidence, and such videos are excluded from the
model aggregate rather than zero-scored.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .core import (
    ActionLogits,
    Detection,
    DetectionTrack,
    FeatureTrack,
    cosine,
    normalize_label,
    unit_normalize,
)
from .dimensions import RELATION_KINDS
from .errors import (
    MissingCaptions,
    SchemaViolation,
    TooFewTargets,
)

ACTION_LOGIT_THRESHOLD = 0.85
DEFAULT_TAU_IOU = 0.1


class NotApplicable:
    """Sentinel for scores excluded from aggregation (singleton NOT_APPLICABLE)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NotApplicable"


NOT_APPLICABLE = NotApplicable()


@dataclass(frozen=True)
class RelationSpec:
    """A spatial-relationship query: object a stands in ``kind`` to object b."""

    a: str
    b: str
    kind: str
    tau_iou: float = DEFAULT_TAU_IOU

    def __post_init__(self):
        object.__setattr__(self, "a", normalize_label(self.a))
        object.__setattr__(self, "b", normalize_label(self.b))
        if self.a == self.b:
            raise SchemaViolation("relation objects must differ")
        if self.kind not in RELATION_KINDS:
            raise SchemaViolation(f"unknown relation kind {self.kind!r}")
        if not 0.0 < self.tau_iou <= 1.0:
            raise SchemaViolation(f"tau_iou {self.tau_iou} outside (0, 1]")


def _words(text: str) -> set[str]:
    """Lowercased word tokens for whole-word containment tests."""
    return set(re.findall(r"[a-z0-9']+", text.lower()))


def _best_detection(frame: tuple[Detection, ...], label: str) -> Detection | None:
    """Highest-confidence detection of ``label`` in one frame, if any."""
    best = None
    for det in frame:
        if det.label == label and (best is None or det.score > best.score):
            best = det
    return best


def object_class_score(dets: DetectionTrack, target: str) -> float:
    """Fraction of frames containing at least one detection of the target."""
    target = normalize_label(target)
    hits = sum(
        1 for frame in dets.per_frame if any(d.label == target for d in frame)
    )
    return hits / dets.frame_count


def multiple_objects_score(dets: DetectionTrack, targets: list[str]) -> float:
    """Fraction of frames where every target object appears simultaneously."""
    targets = [normalize_label(t) for t in targets]
    if len(targets) < 2:
        raise TooFewTargets(f"need >= 2 targets, got {len(targets)}")
    hits = 0
    for frame in dets.per_frame:
        present = {d.label for d in frame}
        if all(t in present for t in targets):
            hits += 1
    return hits / dets.frame_count


def human_action_score(logits: ActionLogits, target: str) -> float:
    """1.0 when the target action is among confident top-5 entries, else 0.0.

    Confidence means a logit strictly above 0.85.
    """
    target = normalize_label(target)
    candidates = {
        label for label, logit in logits.entries if logit > ACTION_LOGIT_THRESHOLD
    }
    return 1.0 if target in candidates else 0.0


def load_color_vocabulary(path: str | Path | None = None) -> frozenset[str]:
    """Color words the caption matcher recognizes.

    Defaults to the bundled vocabulary; pass a path to substitute a custom
    word list ({"colors": [...]}).
    """
    if path is None:
        text = (
            resources.files("vgrade").joinpath("data/color_words.json").read_text("utf-8")
        )
    else:
        text = Path(path).read_text(encoding="utf-8")
    doc = json.loads(text)
    if not isinstance(doc, dict) or not isinstance(doc.get("colors"), list):
        raise SchemaViolation("color vocabulary must be {\"colors\": [...]}")
    words = [normalize_label(w) for w in doc["colors"] if isinstance(w, str)]
    if not words or len(words) != len(doc["colors"]):
        raise SchemaViolation("color vocabulary entries must be non-empty strings")
    return frozenset(words)


def color_score(
    dets: DetectionTrack,
    target_object: str,
    target_color: str,
    vocabulary: frozenset[str],
):
    """Fraction of color-bearing frames whose caption names the target color.

    A frame bears color evidence when the target object is detected and
    the caption of its best detection contains any vocabulary color word.
    Returns NOT_APPLICABLE when no frame qualifies, so never-generated
    objects do not drag the average down.
    """
    target_object = normalize_label(target_object)
    target_color = normalize_label(target_color)
    considered = 0
    hits = 0
    for frame in dets.per_frame:
        best = _best_detection(frame, target_object)
        if best is None or best.caption is None:
            continue
        caption_words = _words(best.caption)
        if not caption_words & vocabulary:
            continue
        considered += 1
        if target_color in caption_words:
            hits += 1
    if considered == 0:
        return NOT_APPLICABLE
    return hits / considered


def _iou(a: Detection, b: Detection) -> float:
    ax0, ay0, ax1, ay1 = a.bbox
    bx0, by0, bx1, by1 = b.bbox
    ix0, iy0 = max(ax0, bx0), max(ay0, by0)
    ix1, iy1 = min(ax1, bx1), min(ay1, by1)
    iw, ih = max(0.0, ix1 - ix0), max(0.0, iy1 - iy0)
    inter = iw * ih
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    return inter / union if union > 0 else 0.0


def spatial_relationship_score(dets: DetectionTrack, rel: RelationSpec) -> float:
    """Mean frame score over frames where both relation objects are detected.

    Image coordinates: x grows right, y grows down, so "a above b" means
    a's center has the smaller y. A frame scores 1.0 when the displacement
    points the right way, dominates the off-axis displacement, and the
    boxes barely overlap (IoU below tau_iou); heavier overlap decays the
    score as 1 - IoU; anything else scores 0.
    """
    frame_scores = []
    for frame in dets.per_frame:
        box_a = _best_detection(frame, rel.a)
        box_b = _best_detection(frame, rel.b)
        if box_a is None or box_b is None:
            continue
        (ax, ay), (bx, by) = box_a.center, box_b.center
        if rel.kind == "left_of":
            primary, off_axis = bx - ax, by - ay
        elif rel.kind == "right_of":
            primary, off_axis = ax - bx, by - ay
        elif rel.kind == "above":
            primary, off_axis = by - ay, bx - ax
        else:  # below
            primary, off_axis = ay - by, bx - ax
        if primary > 0 and abs(primary) > abs(off_axis):
            overlap = _iou(box_a, box_b)
            frame_scores.append(1.0 if overlap < rel.tau_iou else 1.0 - overlap)
        else:
            frame_scores.append(0.0)
    if not frame_scores:
        return 0.0
    return float(np.mean(np.asarray(frame_scores, dtype=np.float64)))


def scene_score(captions: tuple[str, ...], scene_words: list[str]) -> float:
    """Fraction of frames whose caption contains every scene word."""
    if not captions:
        raise MissingCaptions("no per-frame captions")
    required = {normalize_label(w) for w in scene_words}
    if not required:
        raise SchemaViolation("scene_words must be non-empty")
    hits = sum(1 for caption in captions if required <= _words(caption))
    return hits / len(captions)


def appearance_style_score(
    frame_embeds: FeatureTrack, style_embed: FeatureTrack
) -> float:
    """Mean non-negative cosine between each frame embedding and the style text."""
    style = unit_normalize(style_embed.vectors[0])
    frames = frame_embeds.normalized().vectors
    sims = [max(0.0, cosine(row, style)) for row in frames]
    return float(np.mean(np.asarray(sims, dtype=np.float64)))


def video_text_similarity(
    video_embed: FeatureTrack, text_embed: FeatureTrack
) -> float:
    """Non-negative cosine between pooled video and text embeddings."""
    video = unit_normalize(video_embed.vectors[0])
    text = unit_normalize(text_embed.vectors[0])
    return max(0.0, cosine(video, text))
