"""File formats and ingestion for extractor artifacts and frame dumps.

This module is the boundary between the engine and any extractor backend:
a bundle directory holds one manifest.json plus the artifact files it
names. Feature matrices and flow magnitudes travel in VBNF, a fixed-layout
binary format; everything else is UTF-8 JSON. See docs/formats.md for the
published schemas.

Storage is float32, computation is float64; loaders hand back the domain
types from ``core`` with values widened.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .core import (
    ActionLogits,
    Detection,
    DetectionTrack,
    FeatureTrack,
    FlowTrack,
    FrameSequence,
    ScalarTrack,
    dropped_frame_indices,
)
from .dimensions import DIMENSIONS
from .errors import (
    BadMagic,
    DecodeError,
    FrameCountMismatch,
    InconsistentResolution,
    InputError,
    MissingFrame,
    NonFiniteValue,
    SchemaViolation,
    TrailingBytes,
    TruncatedPayload,
    UnknownDimension,
    VersionUnsupported,
    BboxOutOfBounds,
)

VBNF_MAGIC = b"VBNF"
VBNF_VERSION = 1
_HEADER = struct.Struct("<4sIII")

FRAME_PATTERN = "frame_{:06d}.png"

# Artifact kind -> storage family. Directories hold frame_%06d.png images,
# "vbnf" files hold one float32 matrix, "json" files hold one document.
ARTIFACT_KINDS: dict[str, str] = {
    "frames": "dir",
    "recon_frames": "dir",
    "dino": "vbnf",
    "clip_image": "vbnf",
    "viclip_video": "vbnf",
    "clip_text": "vbnf",
    "viclip_text": "vbnf",
    "flow": "vbnf",
    "detections": "json",
    "captions": "json",
    "aesthetic": "json",
    "imaging": "json",
    "action_logits": "json",
}

# Feature artifacts load as FeatureTrack with these kinds and row counts
# ("T" meaning the manifest frame_count, 1 meaning a single pooled row).
_FEATURE_ARTIFACTS = {
    "dino": ("dino", "T"),
    "clip_image": ("clip_image", "T"),
    "viclip_video": ("viclip_video", 1),
    "clip_text": ("text", 1),
    "viclip_text": ("text", 1),
}


# ---------------------------------------------------------------------------
# VBNF binary format


def vbnf_bytes(matrix: np.ndarray) -> bytes:
    """Serialize a 2-D float matrix to VBNF bytes."""
    m = np.asarray(matrix)
    if m.ndim != 2:
        raise SchemaViolation(f"VBNF payload must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFiniteValue("VBNF payload contains non-finite values")
    rows, cols = m.shape
    header = _HEADER.pack(VBNF_MAGIC, VBNF_VERSION, rows, cols)
    payload = np.ascontiguousarray(m, dtype="<f4").tobytes()
    return header + payload


def parse_vbnf(data: bytes) -> np.ndarray:
    """Parse VBNF bytes into a (T, D) float32 matrix.

    The file size must be exactly 16 + 4*T*D bytes; anything shorter is
    TruncatedPayload and anything longer is TrailingBytes.
    """
    if len(data) < _HEADER.size:
        raise TruncatedPayload(
            f"file is {len(data)} bytes, shorter than the 16-byte header"
        )
    magic, version, rows, cols = _HEADER.unpack_from(data)
    if magic != VBNF_MAGIC:
        raise BadMagic(f"bad magic {magic!r}, expected {VBNF_MAGIC!r}")
    if version != VBNF_VERSION:
        raise VersionUnsupported(f"unsupported VBNF version {version}")
    expected = _HEADER.size + 4 * rows * cols
    if len(data) < expected:
        raise TruncatedPayload(
            f"header declares {rows}x{cols} ({expected} bytes), file has {len(data)}"
        )
    if len(data) > expected:
        raise TrailingBytes(
            f"{len(data) - expected} trailing bytes after {rows}x{cols} payload"
        )
    flat = np.frombuffer(data, dtype="<f4", offset=_HEADER.size)
    matrix = flat.reshape(rows, cols)
    if not np.all(np.isfinite(matrix)):
        raise NonFiniteValue("VBNF payload contains non-finite values")
    return matrix


def write_vbnf(path: str | Path, matrix: np.ndarray) -> None:
    Path(path).write_bytes(vbnf_bytes(matrix))


def read_vbnf(path: str | Path) -> np.ndarray:
    return parse_vbnf(Path(path).read_bytes())


# ---------------------------------------------------------------------------
# Manifest


@dataclass(frozen=True)
class Manifest:
    """Bundle metadata: identity, geometry, and the artifact files present.

    ``artifacts`` maps artifact kind to a path relative to the manifest's
    directory; ``root`` is that directory. ``flow_shape`` gives the (h, w)
    grid geometry of the flow artifact. ``group_index`` marks which
    sampling group of its prompt this video belongs to (used by the
    alignment protocol).
    """

    video_id: str
    model_id: str
    prompt_id: str
    dimension_tag: str
    frame_count: int
    fps: float
    width: int
    height: int
    artifacts: dict[str, str]
    root: Path
    flow_shape: tuple[int, int] | None = None
    group_index: int | None = None

    def path(self, kind: str) -> Path:
        return self.root / self.artifacts[kind]

    def has(self, kind: str) -> bool:
        return kind in self.artifacts


def _require(doc: dict, key: str, types, where: str):
    if key not in doc:
        raise SchemaViolation(f"{where}: missing required key {key!r}")
    value = doc[key]
    if not isinstance(value, types) or isinstance(value, bool):
        raise SchemaViolation(f"{where}: key {key!r} has wrong type")
    return value


def load_manifest(path: str | Path) -> Manifest:
    """Parse and structurally validate one manifest.json.

    Raises InputError subclasses on malformed documents; cross-artifact
    consistency is validate_bundle's job.
    """
    path = Path(path)
    where = str(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaViolation(f"{where}: cannot parse manifest: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaViolation(f"{where}: manifest must be a JSON object")

    video_id = _require(doc, "video_id", str, where)
    model_id = _require(doc, "model_id", str, where)
    prompt_id = _require(doc, "prompt_id", str, where)
    dimension_tag = _require(doc, "dimension_tag", str, where)
    if dimension_tag not in DIMENSIONS:
        raise UnknownDimension(f"{where}: unknown dimension {dimension_tag!r}")
    frame_count = _require(doc, "frame_count", int, where)
    fps = _require(doc, "fps", (int, float), where)
    width = _require(doc, "width", int, where)
    height = _require(doc, "height", int, where)
    if frame_count < 1 or width < 1 or height < 1 or fps <= 0:
        raise SchemaViolation(f"{where}: geometry fields must be positive")
    artifacts = _require(doc, "artifacts", dict, where)
    for kind, rel in artifacts.items():
        if kind not in ARTIFACT_KINDS:
            raise SchemaViolation(f"{where}: unknown artifact kind {kind!r}")
        if not isinstance(rel, str) or not rel:
            raise SchemaViolation(f"{where}: artifact path for {kind!r} invalid")
        if not (path.parent / rel).exists():
            raise SchemaViolation(f"{where}: artifact path {rel!r} does not exist")

    flow_shape = None
    if "flow_shape" in doc:
        raw = doc["flow_shape"]
        if (
            not isinstance(raw, list)
            or len(raw) != 2
            or not all(isinstance(v, int) and v > 0 for v in raw)
        ):
            raise SchemaViolation(f"{where}: flow_shape must be [h, w] positives")
        flow_shape = (raw[0], raw[1])
    if "flow" in artifacts and flow_shape is None:
        raise SchemaViolation(f"{where}: flow artifact requires flow_shape")

    group_index = None
    if "group_index" in doc:
        raw = doc["group_index"]
        if not isinstance(raw, int) or isinstance(raw, bool) or raw < 0:
            raise SchemaViolation(f"{where}: group_index must be a non-negative int")
        group_index = raw

    known = {
        "video_id",
        "model_id",
        "prompt_id",
        "dimension_tag",
        "frame_count",
        "fps",
        "width",
        "height",
        "artifacts",
        "flow_shape",
        "group_index",
    }
    unknown = set(doc) - known
    if unknown:
        raise SchemaViolation(f"{where}: unknown manifest keys {sorted(unknown)}")

    return Manifest(
        video_id=video_id,
        model_id=model_id,
        prompt_id=prompt_id,
        dimension_tag=dimension_tag,
        frame_count=frame_count,
        fps=float(fps),
        width=width,
        height=height,
        artifacts=dict(artifacts),
        root=path.parent,
        flow_shape=flow_shape,
        group_index=group_index,
    )


def write_manifest(path: str | Path, manifest: Manifest) -> None:
    doc: dict = {
        "video_id": manifest.video_id,
        "model_id": manifest.model_id,
        "prompt_id": manifest.prompt_id,
        "dimension_tag": manifest.dimension_tag,
        "frame_count": manifest.frame_count,
        "fps": manifest.fps,
        "width": manifest.width,
        "height": manifest.height,
        "artifacts": dict(sorted(manifest.artifacts.items())),
    }
    if manifest.flow_shape is not None:
        doc["flow_shape"] = list(manifest.flow_shape)
    if manifest.group_index is not None:
        doc["group_index"] = manifest.group_index
    Path(path).write_text(
        json.dumps(doc, indent=2, sort_keys=False) + "\n", encoding="utf-8"
    )


# ---------------------------------------------------------------------------
# Artifact loaders


def load_feature_track(path: str | Path, kind: str, video_id: str) -> FeatureTrack:
    return FeatureTrack(video_id, kind, read_vbnf(path))


def load_flow(
    path: str | Path, grid_shape: tuple[int, int], video_id: str
) -> FlowTrack:
    """Read flow magnitudes stored as VBNF rows of h*w values each."""
    matrix = read_vbnf(path)
    h, w = grid_shape
    if matrix.shape[1] != h * w:
        raise SchemaViolation(
            f"{video_id}: flow rows have {matrix.shape[1]} values, "
            f"flow_shape {grid_shape} needs {h * w}"
        )
    return FlowTrack(video_id, matrix.reshape(matrix.shape[0], h, w))


def _load_json(path: Path, video_id: str) -> dict:
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaViolation(f"{video_id}: cannot parse {path.name}: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaViolation(f"{video_id}: {path.name} must be a JSON object")
    return doc


def load_detections(
    path: str | Path,
    width: int,
    height: int,
    frame_count: int,
    video_id: str,
) -> DetectionTrack:
    """Load per-frame detections, checking boxes against the frame bounds."""
    doc = _load_json(Path(path), video_id)
    frames = _require(doc, "frames", list, video_id)
    if len(frames) != frame_count:
        raise FrameCountMismatch(
            f"{video_id}: detections cover {len(frames)} frames, "
            f"manifest declares {frame_count}"
        )
    per_frame: list[tuple[Detection, ...]] = []
    for i, entries in enumerate(frames):
        if not isinstance(entries, list):
            raise SchemaViolation(f"{video_id}: detections frame {i} not a list")
        dets = []
        for entry in entries:
            if not isinstance(entry, dict):
                raise SchemaViolation(f"{video_id}: detection entry not an object")
            label = _require(entry, "label", str, video_id)
            score = _require(entry, "score", (int, float), video_id)
            bbox = _require(entry, "bbox", list, video_id)
            if len(bbox) != 4 or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in bbox
            ):
                raise SchemaViolation(f"{video_id}: bbox must be 4 numbers")
            x0, y0, x1, y1 = (float(v) for v in bbox)
            if x0 < 0 or y0 < 0 or x1 > width or y1 > height:
                raise BboxOutOfBounds(
                    f"{video_id}: bbox {bbox} outside {width}x{height} frame"
                )
            caption = entry.get("caption")
            if caption is not None and not isinstance(caption, str):
                raise SchemaViolation(f"{video_id}: caption must be a string")
            dets.append(Detection(label, float(score), (x0, y0, x1, y1), caption))
        per_frame.append(tuple(dets))
    return DetectionTrack(video_id, tuple(per_frame))


def write_detections(path: str | Path, track: DetectionTrack) -> None:
    frames = []
    for dets in track.per_frame:
        entries = []
        for d in dets:
            entry: dict = {"label": d.label, "score": d.score, "bbox": list(d.bbox)}
            if d.caption is not None:
                entry["caption"] = d.caption
            entries.append(entry)
        frames.append(entries)
    Path(path).write_text(
        json.dumps({"frames": frames}, indent=2) + "\n", encoding="utf-8"
    )


def load_captions(path: str | Path, frame_count: int, video_id: str) -> tuple[str, ...]:
    """Load one caption string per frame."""
    doc = _load_json(Path(path), video_id)
    frames = _require(doc, "frames", list, video_id)
    if len(frames) != frame_count:
        raise FrameCountMismatch(
            f"{video_id}: captions cover {len(frames)} frames, "
            f"manifest declares {frame_count}"
        )
    for i, caption in enumerate(frames):
        if not isinstance(caption, str):
            raise SchemaViolation(f"{video_id}: caption {i} must be a string")
    return tuple(frames)


def write_captions(path: str | Path, captions: tuple[str, ...]) -> None:
    Path(path).write_text(
        json.dumps({"frames": list(captions)}, indent=2) + "\n", encoding="utf-8"
    )


_SCALAR_BY_ARTIFACT = {"aesthetic": "aesthetic_raw", "imaging": "imaging_raw"}


def load_scalars(
    path: str | Path, artifact_kind: str, frame_count: int, video_id: str
) -> ScalarTrack:
    metric = _SCALAR_BY_ARTIFACT[artifact_kind]
    doc = _load_json(Path(path), video_id)
    declared = _require(doc, "metric", str, video_id)
    if declared != metric:
        raise SchemaViolation(
            f"{video_id}: {artifact_kind} file declares metric {declared!r}, "
            f"expected {metric!r}"
        )
    values = _require(doc, "values", list, video_id)
    if len(values) != frame_count:
        raise FrameCountMismatch(
            f"{video_id}: {metric} has {len(values)} values, "
            f"manifest declares {frame_count} frames"
        )
    for v in values:
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise SchemaViolation(f"{video_id}: {metric} values must be numbers")
    return ScalarTrack(video_id, metric, tuple(float(v) for v in values))


def write_scalars(path: str | Path, track: ScalarTrack) -> None:
    doc = {"metric": track.metric, "values": list(track.values)}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_action_logits(path: str | Path, video_id: str) -> ActionLogits:
    doc = _load_json(Path(path), video_id)
    entries = _require(doc, "entries", list, video_id)
    pairs = []
    for entry in entries:
        if not isinstance(entry, dict):
            raise SchemaViolation(f"{video_id}: logit entry not an object")
        label = _require(entry, "label", str, video_id)
        logit = _require(entry, "logit", (int, float), video_id)
        pairs.append((label, float(logit)))
    return ActionLogits(video_id, tuple(pairs))


def write_action_logits(path: str | Path, logits: ActionLogits) -> None:
    doc = {
        "entries": [
            {"label": label, "logit": logit} for label, logit in logits.entries
        ]
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Frame directories


def load_frames(
    directory: str | Path,
    fps: float,
    video_id: str,
    expected_count: int | None = None,
    model_id: str = "",
    prompt_id: str = "",
) -> FrameSequence:
    """Decode frame_%06d.png files in index order into a FrameSequence."""
    directory = Path(directory)
    if expected_count is not None:
        count = expected_count
        extra = directory / FRAME_PATTERN.format(count)
        if extra.exists():
            raise FrameCountMismatch(
                f"{video_id}: more frame files than the declared {count}"
            )
    else:
        count = len(list(directory.glob("frame_*.png")))
        if count == 0:
            raise MissingFrame(f"{video_id}: no frame files in {directory}")
    frames = []
    shape = None
    for i in range(count):
        frame_path = directory / FRAME_PATTERN.format(i)
        if not frame_path.exists():
            raise MissingFrame(f"{video_id}: missing {frame_path.name}")
        try:
            with Image.open(frame_path) as img:
                frame = np.asarray(img.convert("RGB"), dtype=np.uint8)
        except (UnidentifiedImageError, OSError, ValueError) as exc:
            raise DecodeError(f"{video_id}: cannot decode {frame_path.name}: {exc}")
        if shape is None:
            shape = frame.shape
        elif frame.shape != shape:
            raise InconsistentResolution(
                f"{video_id}: {frame_path.name} is {frame.shape[1]}x{frame.shape[0]}, "
                f"expected {shape[1]}x{shape[0]}"
            )
        frames.append(frame)
    return FrameSequence(video_id, tuple(frames), fps, model_id, prompt_id)


def write_frames(directory: str | Path, frames) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(frames):
        Image.fromarray(np.asarray(frame, dtype=np.uint8), "RGB").save(
            directory / FRAME_PATTERN.format(i)
        )


# ---------------------------------------------------------------------------
# Bundle validation


def validate_bundle(manifest: Manifest) -> list[str]:
    """Cross-check every artifact a manifest names; return violations.

    An empty list means the bundle is safe for every scorer that consumes
    it: loaders will not raise and frame/row counts line up.
    """
    violations: list[str] = []
    T = manifest.frame_count

    if T < 2:
        violations.append("frame_count must be >= 2 for temporal scoring")

    if manifest.has("frames"):
        try:
            seq = load_frames(
                manifest.path("frames"), manifest.fps, manifest.video_id, T
            )
        except InputError as exc:
            violations.append(f"frames: {exc}")
        else:
            if (seq.height, seq.width) != (manifest.height, manifest.width):
                violations.append(
                    f"frames: decoded {seq.width}x{seq.height} does not match "
                    f"manifest {manifest.width}x{manifest.height}"
                )

    if manifest.has("recon_frames"):
        expected = len(dropped_frame_indices(T))
        try:
            recon = load_frames(
                manifest.path("recon_frames"),
                manifest.fps,
                manifest.video_id,
                expected if expected else None,
            )
        except InputError as exc:
            violations.append(f"recon_frames: {exc}")
        else:
            if (recon.height, recon.width) != (manifest.height, manifest.width):
                violations.append(
                    f"recon_frames: decoded {recon.width}x{recon.height} does not "
                    f"match manifest {manifest.width}x{manifest.height}"
                )

    for kind, (feature_kind, rows) in _FEATURE_ARTIFACTS.items():
        if not manifest.has(kind):
            continue
        try:
            track = load_feature_track(
                manifest.path(kind), feature_kind, manifest.video_id
            )
        except InputError as exc:
            violations.append(f"{kind}: {exc}")
            continue
        expected_rows = T if rows == "T" else rows
        if track.frame_count != expected_rows:
            violations.append(
                f"{kind}: {track.frame_count} rows, expected {expected_rows}"
            )
        norms = np.linalg.norm(track.vectors, axis=1)
        if np.any(norms < 1e-12):
            violations.append(f"{kind}: zero-norm embedding row")

    if manifest.has("flow"):
        try:
            flow = load_flow(
                manifest.path("flow"), manifest.flow_shape, manifest.video_id
            )
        except InputError as exc:
            violations.append(f"flow: {exc}")
        else:
            if flow.pair_count != T - 1:
                violations.append(
                    f"flow must have T-1 grids: found {flow.pair_count}, "
                    f"expected {T - 1}"
                )

    if manifest.has("detections"):
        try:
            load_detections(
                manifest.path("detections"),
                manifest.width,
                manifest.height,
                T,
                manifest.video_id,
            )
        except InputError as exc:
            violations.append(f"detections: {exc}")

    if manifest.has("captions"):
        try:
            load_captions(manifest.path("captions"), T, manifest.video_id)
        except InputError as exc:
            violations.append(f"captions: {exc}")

    for kind in ("aesthetic", "imaging"):
        if not manifest.has(kind):
            continue
        metric = _SCALAR_BY_ARTIFACT[kind]
        try:
            load_scalars(manifest.path(kind), kind, T, manifest.video_id)
        except InputError as exc:
            lo, hi = {"aesthetic_raw": (0, 10), "imaging_raw": (0, 100)}[metric]
            text = str(exc)
            if "outside" in text:
                violations.append(f"{metric} out of [{lo}, {hi}]: {text}")
            else:
                violations.append(f"{kind}: {text}")

    if manifest.has("action_logits"):
        try:
            load_action_logits(manifest.path("action_logits"), manifest.video_id)
        except InputError as exc:
            violations.append(f"action_logits: {exc}")

    return violations
