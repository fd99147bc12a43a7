"""Canonical registry of the 16 evaluation dimensions.

Central place for dimension names, their grouping, the suite labels and
bundle artifacts each scorer consumes, and the fixed column order used by
every report. An exhaustiveness check runs at import time so a missing or
misspelled scorer mapping fails loudly at startup rather than mid-run.
"""

from __future__ import annotations

from dataclasses import dataclass, field

# Report column order (fixed; quality dimensions first, then semantics/style).
DIMENSIONS: tuple[str, ...] = (
    "subject_consistency",
    "background_consistency",
    "temporal_flickering",
    "motion_smoothness",
    "dynamic_degree",
    "aesthetic_quality",
    "imaging_quality",
    "object_class",
    "multiple_objects",
    "human_action",
    "color",
    "spatial_relationship",
    "scene",
    "appearance_style",
    "temporal_style",
    "overall_consistency",
)

QUALITY_DIMENSIONS = DIMENSIONS[:7]
SEMANTICS_DIMENSIONS = DIMENSIONS[7:]

CATEGORIES: tuple[str, ...] = (
    "Animal",
    "Architecture",
    "Food",
    "Human",
    "Lifestyle",
    "Plant",
    "Scenery",
    "Vehicles",
)

RELATION_KINDS = ("left_of", "right_of", "above", "below")


@dataclass(frozen=True)
class DimensionSpec:
    """What one dimension's scorer needs from the suite and the bundle."""

    tag: str
    group: str  # "quality" | "semantics"
    scorer: str  # scorer operation name, for documentation and dispatch
    required_labels: tuple[str, ...] = ()
    required_artifacts: tuple[str, ...] = ()
    aggregation: str = "mean"  # "mean" | "proportion"


REGISTRY: dict[str, DimensionSpec] = {
    s.tag: s
    for s in (
        DimensionSpec(
            "subject_consistency",
            "quality",
            "cross_frame_consistency",
            required_artifacts=("dino",),
        ),
        DimensionSpec(
            "background_consistency",
            "quality",
            "cross_frame_consistency",
            required_artifacts=("clip_image",),
        ),
        DimensionSpec(
            "temporal_flickering",
            "quality",
            "temporal_flickering",
            required_artifacts=("frames", "flow"),
        ),
        DimensionSpec(
            "motion_smoothness",
            "quality",
            "motion_smoothness",
            required_artifacts=("frames", "recon_frames"),
        ),
        DimensionSpec(
            "dynamic_degree",
            "quality",
            "dynamic_degree",
            required_artifacts=("flow",),
            aggregation="proportion",
        ),
        DimensionSpec(
            "aesthetic_quality",
            "quality",
            "framewise_quality",
            required_artifacts=("aesthetic",),
        ),
        DimensionSpec(
            "imaging_quality",
            "quality",
            "framewise_quality",
            required_artifacts=("imaging",),
        ),
        DimensionSpec(
            "object_class",
            "semantics",
            "object_class_score",
            required_labels=("object",),
            required_artifacts=("detections",),
        ),
        DimensionSpec(
            "multiple_objects",
            "semantics",
            "multiple_objects_score",
            required_labels=("objects",),
            required_artifacts=("detections",),
        ),
        DimensionSpec(
            "human_action",
            "semantics",
            "human_action_score",
            required_labels=("action",),
            required_artifacts=("action_logits",),
        ),
        DimensionSpec(
            "color",
            "semantics",
            "color_score",
            required_labels=("object", "color"),
            required_artifacts=("detections",),
        ),
        DimensionSpec(
            "spatial_relationship",
            "semantics",
            "spatial_relationship_score",
            required_labels=("relation",),
            required_artifacts=("detections",),
        ),
        DimensionSpec(
            "scene",
            "semantics",
            "scene_score",
            required_labels=("scene_words",),
            required_artifacts=("captions",),
        ),
        DimensionSpec(
            "appearance_style",
            "semantics",
            "appearance_style_score",
            required_labels=("style_text",),
            required_artifacts=("clip_image", "clip_text"),
        ),
        DimensionSpec(
            "temporal_style",
            "semantics",
            "video_text_similarity",
            required_labels=("style_text",),
            required_artifacts=("viclip_video", "viclip_text"),
        ),
        DimensionSpec(
            "overall_consistency",
            "semantics",
            "video_text_similarity",
            required_artifacts=("viclip_video", "viclip_text"),
        ),
    )
}


def spec_for(tag: str) -> DimensionSpec:
    from .errors import UnknownDimension

    try:
        return REGISTRY[tag]
    except KeyError:
        raise UnknownDimension(f"unknown dimension {tag!r}") from None


def _check_exhaustive() -> None:
    missing = set(DIMENSIONS) - set(REGISTRY)
    extra = set(REGISTRY) - set(DIMENSIONS)
    if missing or extra:
        raise AssertionError(
            f"dimension registry out of sync: missing={sorted(missing)} "
            f"extra={sorted(extra)}"
        )
    for tag in DIMENSIONS:
        spec = REGISTRY[tag]
        if not spec.scorer:
            raise AssertionError(f"{tag} has no scorer mapping")
        if spec.group not in ("quality", "semantics"):
            raise AssertionError(f"{tag} has invalid group {spec.group!r}")


_check_exhaustive()
