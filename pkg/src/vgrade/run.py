"""Run orchestration: discover bundles, validate, score in parallel, report.

Scoring is embarrassingly parallel over videos. Results are merged after a
deterministic sort by video_id, and every exported byte is independent of
the worker count; concurrency only changes wall time.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import interchange, quality, semantics
from .core import dropped_frame_indices
from .dimensions import DIMENSIONS, spec_for
from .errors import EmptyInput, InputError, SchemaViolation, UnknownDimension
from .quality import aggregate
from .reporting import (
    ENGINE_NAME,
    ENGINE_VERSION,
    ModelReport,
    PerVideoScore,
    report_document,
)
from .suite import PromptRecord, load_suite

DEFAULT_GROUPS_PER_PROMPT = 5


@dataclass(frozen=True)
class RunConfig:
    """Everything one scoring run depends on (concurrency aside)."""

    suite_path: Path
    bundles_root: Path
    out_dir: Path
    dimensions: tuple[str, ...] = DIMENSIONS
    tau_dynamic: float = quality.DEFAULT_TAU_DYNAMIC
    tau_static: float = quality.DEFAULT_TAU_STATIC
    tau_iou: float = semantics.DEFAULT_TAU_IOU
    color_vocabulary_path: str | None = None
    workers: int = 1

    def __post_init__(self):
        unknown = set(self.dimensions) - set(DIMENSIONS)
        if unknown:
            raise UnknownDimension(f"unknown dimensions {sorted(unknown)}")
        if not self.dimensions:
            raise EmptyInput("no dimensions selected")
        if self.workers < 1:
            raise SchemaViolation("worker count must be >= 1")

    def snapshot(self) -> dict:
        """The config portion of the report; excludes concurrency knobs."""
        return {
            "dimensions": list(self.dimensions),
            "quality.tau_dynamic": self.tau_dynamic,
            "quality.tau_static": self.tau_static,
            "semantics.tau_iou": self.tau_iou,
            "semantics.color_vocabulary_path": self.color_vocabulary_path
            or "builtin",
        }


@dataclass
class RunOutcome:
    """Either a list of violations or the per-model reports of a clean run."""

    violations: list = field(default_factory=list)
    reports: list = field(default_factory=list)
    document: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations


def discover_manifests(bundles_root: Path) -> list[Path]:
    return sorted(bundles_root.rglob("manifest.json"))


def preflight(
    records: list[PromptRecord],
    manifest_paths: list[Path],
    dimensions: tuple[str, ...],
) -> tuple[list, list]:
    """Load and cross-validate the bundles relevant to the selected dimensions.

    Returns (eligible, violations) where eligible pairs each Manifest with
    its PromptRecord. Bundles for unselected dimensions are ignored.
    """
    by_prompt = {r.prompt_id: r for r in records}
    eligible = []
    violations = []
    seen_video_ids: set[str] = set()
    selected = set(dimensions)
    for path in manifest_paths:
        where = str(path)
        try:
            manifest = interchange.load_manifest(path)
        except InputError as exc:
            violations.append({"where": where, "message": str(exc)})
            continue
        if manifest.dimension_tag not in selected:
            continue
        if manifest.video_id in seen_video_ids:
            violations.append(
                {
                    "where": where,
                    "message": f"duplicate video_id {manifest.video_id!r}",
                }
            )
            continue
        seen_video_ids.add(manifest.video_id)
        record = by_prompt.get(manifest.prompt_id)
        if record is None:
            violations.append(
                {
                    "where": where,
                    "message": f"prompt_id {manifest.prompt_id!r} not in suite",
                }
            )
            continue
        if record.dimension_tag != manifest.dimension_tag:
            violations.append(
                {
                    "where": where,
                    "message": (
                        f"manifest dimension {manifest.dimension_tag!r} does not "
                        f"match suite dimension {record.dimension_tag!r} for "
                        f"prompt {manifest.prompt_id!r}"
                    ),
                }
            )
            continue
        missing = [
            kind
            for kind in spec_for(manifest.dimension_tag).required_artifacts
            if not manifest.has(kind)
        ]
        if missing:
            violations.append(
                {
                    "where": where,
                    "message": (
                        f"dimension {manifest.dimension_tag!r} requires missing "
                        f"artifacts {missing}"
                    ),
                }
            )
            continue
        for message in interchange.validate_bundle(manifest):
            violations.append({"where": where, "message": message})
        eligible.append((manifest, record))
    violations.sort(key=lambda v: (v["where"], v["message"]))
    return eligible, violations


# ---------------------------------------------------------------------------
# Per-bundle scoring (runs inside worker processes; must stay picklable)


def _score_bundle(task: tuple) -> dict:
    """Score one bundle for its own dimension. Pure; no shared state."""
    (manifest_path, labels, tau_dynamic, tau_static, tau_iou, vocab_path) = task
    manifest = interchange.load_manifest(manifest_path)
    dim = manifest.dimension_tag
    vid = manifest.video_id
    result = {
        "video_id": vid,
        "model_id": manifest.model_id,
        "prompt_id": manifest.prompt_id,
        "group_index": manifest.group_index,
        "dimension": dim,
        "status": "scored",
        "score": None,
    }

    if dim in ("subject_consistency", "background_consistency"):
        kind = "dino" if dim == "subject_consistency" else "clip_image"
        track = interchange.load_feature_track(manifest.path(kind), kind, vid)
        result["score"] = quality.cross_frame_consistency(track)
    elif dim == "temporal_flickering":
        flow = interchange.load_flow(
            manifest.path("flow"), manifest.flow_shape, vid
        )
        if not quality.static_filter(flow, tau_static):
            result["status"] = "filtered_static"
            return result
        frames = interchange.load_frames(
            manifest.path("frames"), manifest.fps, vid, manifest.frame_count
        )
        result["score"] = quality.temporal_flickering(frames)
    elif dim == "motion_smoothness":
        frames = interchange.load_frames(
            manifest.path("frames"), manifest.fps, vid, manifest.frame_count
        )
        expected = len(dropped_frame_indices(manifest.frame_count))
        recon = interchange.load_frames(
            manifest.path("recon_frames"), manifest.fps, f"{vid}/recon", expected
        )
        result["score"] = quality.motion_smoothness(frames, recon)
    elif dim == "dynamic_degree":
        flow = interchange.load_flow(
            manifest.path("flow"), manifest.flow_shape, vid
        )
        result["score"] = 1.0 if quality.is_dynamic(flow, tau_dynamic) else 0.0
    elif dim in ("aesthetic_quality", "imaging_quality"):
        kind = "aesthetic" if dim == "aesthetic_quality" else "imaging"
        track = interchange.load_scalars(
            manifest.path(kind), kind, manifest.frame_count, vid
        )
        result["score"] = quality.framewise_quality(track)
    elif dim == "object_class":
        dets = _load_dets(manifest)
        result["score"] = semantics.object_class_score(dets, labels["object"])
    elif dim == "multiple_objects":
        dets = _load_dets(manifest)
        result["score"] = semantics.multiple_objects_score(dets, labels["objects"])
    elif dim == "human_action":
        logits = interchange.load_action_logits(manifest.path("action_logits"), vid)
        result["score"] = semantics.human_action_score(logits, labels["action"])
    elif dim == "color":
        dets = _load_dets(manifest)
        vocab = semantics.load_color_vocabulary(vocab_path)
        score = semantics.color_score(
            dets, labels["object"], labels["color"], vocab
        )
        if score is semantics.NOT_APPLICABLE:
            result["status"] = "not_applicable"
            return result
        result["score"] = score
    elif dim == "spatial_relationship":
        dets = _load_dets(manifest)
        rel = labels["relation"]
        spec = semantics.RelationSpec(rel["a"], rel["b"], rel["kind"], tau_iou)
        result["score"] = semantics.spatial_relationship_score(dets, spec)
    elif dim == "scene":
        captions = interchange.load_captions(
            manifest.path("captions"), manifest.frame_count, vid
        )
        result["score"] = semantics.scene_score(captions, labels["scene_words"])
    elif dim == "appearance_style":
        frames = interchange.load_feature_track(
            manifest.path("clip_image"), "clip_image", vid
        )
        style = interchange.load_feature_track(
            manifest.path("clip_text"), "text", vid
        )
        result["score"] = semantics.appearance_style_score(frames, style)
    elif dim in ("temporal_style", "overall_consistency"):
        video = interchange.load_feature_track(
            manifest.path("viclip_video"), "viclip_video", vid
        )
        text = interchange.load_feature_track(
            manifest.path("viclip_text"), "text", vid
        )
        result["score"] = semantics.video_text_similarity(video, text)
    else:  # pragma: no cover - registry exhaustiveness guards this
        raise UnknownDimension(f"no scorer for dimension {dim!r}")
    return result


def _load_dets(manifest: interchange.Manifest):
    return interchange.load_detections(
        manifest.path("detections"),
        manifest.width,
        manifest.height,
        manifest.frame_count,
        manifest.video_id,
    )


# ---------------------------------------------------------------------------
# Run assembly


def _input_hashes(config: RunConfig, manifest_paths: list[Path]) -> dict:
    suite_sha = hashlib.sha256(config.suite_path.read_bytes()).hexdigest()
    digest = hashlib.sha256()
    count = 0
    for path in manifest_paths:
        manifest = interchange.load_manifest(path)
        if manifest.dimension_tag not in config.dimensions:
            continue
        count += 1
        root = config.bundles_root
        files = [path] + [
            manifest.path(kind) for kind in sorted(manifest.artifacts)
        ]
        expanded = []
        for f in files:
            if f.is_dir():
                expanded.extend(sorted(p for p in f.iterdir() if p.is_file()))
            else:
                expanded.append(f)
        for f in expanded:
            digest.update(str(f.relative_to(root)).encode("utf-8"))
            digest.update(b"\0")
            digest.update(hashlib.sha256(f.read_bytes()).digest())
    return {
        "suite_path": str(config.suite_path),
        "suite_sha256": suite_sha,
        "bundles_sha256": digest.hexdigest(),
        "bundle_count": count,
    }


def score_run(config: RunConfig) -> RunOutcome:
    """Validate, score, and assemble the run document for every model found."""
    records = load_suite(config.suite_path)
    manifest_paths = discover_manifests(config.bundles_root)
    if not manifest_paths:
        raise EmptyInput(f"no manifest.json under {config.bundles_root}")
    eligible, violations = preflight(records, manifest_paths, config.dimensions)
    if violations:
        return RunOutcome(violations=violations)
    if not eligible:
        raise EmptyInput("no bundles match the selected dimensions and suite")

    tasks = [
        (
            str(path_of(manifest)),
            record.labels,
            config.tau_dynamic,
            config.tau_static,
            config.tau_iou,
            config.color_vocabulary_path,
        )
        for manifest, record in eligible
    ]
    if config.workers == 1:
        results = [_score_bundle(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_score_bundle, tasks, chunksize=8))

    category_by_prompt = {r.prompt_id: r.category for r in records}
    by_model: dict = {}
    for res in results:
        by_model.setdefault(res["model_id"], []).append(res)

    reports = []
    for model_id in sorted(by_model):
        reports.append(
            _assemble_model_report(
                model_id, by_model[model_id], category_by_prompt, config
            )
        )
    document = {
        "engine": {"name": ENGINE_NAME, "version": ENGINE_VERSION},
        "config": config.snapshot(),
        "inputs": _input_hashes(config, manifest_paths),
        "models": {
            report.model_id: report_document(report) for report in reports
        },
    }
    return RunOutcome(reports=reports, document=document)


def path_of(manifest: interchange.Manifest) -> Path:
    return manifest.root / "manifest.json"


def _assemble_model_report(
    model_id: str,
    results: list[dict],
    category_by_prompt: dict,
    config: RunConfig,
) -> ModelReport:
    per_video: dict = {}
    exclusions: dict = {}
    for res in sorted(results, key=lambda r: r["video_id"]):
        dim = res["dimension"]
        if res["status"] != "scored":
            bucket = exclusions.setdefault(dim, {})
            bucket[res["status"]] = bucket.get(res["status"], 0) + 1
            continue
        per_video.setdefault(dim, []).append(
            PerVideoScore(
                res["video_id"],
                res["prompt_id"],
                res["group_index"],
                res["score"],
            )
        )

    dimension_scores: dict = {}
    skipped: dict = {}
    present_dims = {res["dimension"] for res in results}
    for dim in config.dimensions:
        if dim not in present_dims:
            skipped[dim] = "no eligible videos"
            continue
        entries = per_video.get(dim)
        if not entries:
            reasons = exclusions.get(dim, {})
            skipped[dim] = "all videos excluded: " + ", ".join(
                f"{k}={v}" for k, v in sorted(reasons.items())
            )
            continue
        score = aggregate(dim, {e.video_id: e.score for e in entries})
        dimension_scores[dim] = score.model_score

    category_scores: dict = {}
    category_acc: dict = {}
    for dim, entries in per_video.items():
        for entry in entries:
            category = category_by_prompt.get(entry.prompt_id)
            if category is None:
                continue
            category_acc.setdefault((category, dim), []).append(
                (entry.video_id, entry.score)
            )
    for key, scored in category_acc.items():
        ordered = [score for _, score in sorted(scored)]
        category_scores[key] = float(np.mean(np.asarray(ordered, dtype=np.float64)))

    metadata = {
        "selected_dimensions": list(config.dimensions),
        "video_count": len({res["video_id"] for res in results}),
        "exclusions": {k: dict(sorted(v.items())) for k, v in exclusions.items()},
    }
    return ModelReport(
        model_id=model_id,
        dimension_scores=dimension_scores,
        category_scores=category_scores,
        metadata=metadata,
        per_video=per_video,
        skipped=skipped,
    )
