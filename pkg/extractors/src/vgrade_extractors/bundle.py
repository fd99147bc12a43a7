"""Bundle file formats: frames, VBNF matrices, JSON artifacts, manifests.

This module is the extractor side of the interchange contract. It writes
exactly the files the evaluation engine reads, but shares no code with
it: the directory layout and byte formats are the whole interface.

A bundle directory holds one manifest.json plus the artifact files it
names. Manifests are built up incrementally — each extractor invocation
adds its artifact entry and re-writes the manifest — so identity and
geometry fields are checked for conflicts on every merge.
"""

from __future__ import annotations

import hashlib
import json
import re
import struct
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import BadFrames, ManifestConflict, MissingArgument

VBNF_MAGIC = b"VBNF"
VBNF_VERSION = 1
_VBNF_HEADER = struct.Struct("<4sIII")

FRAME_PATTERN = "frame_{:06d}.png"
_FRAME_RE = re.compile(r"frame_(\d{6})\.png$")

MANIFEST_NAME = "manifest.json"
META_NAME = "extractor_meta.json"

_IDENTITY_KEYS = ("video_id", "model_id", "prompt_id", "dimension_tag")
_GEOMETRY_KEYS = ("frame_count", "width", "height")


# ---------------------------------------------------------------------------
# Frame directories


def read_frames(directory: str | Path) -> list[np.ndarray]:
    """Decode frame_%06d.png files into a list of HxWx3 uint8 arrays.

    Indices must be contiguous from zero and every frame must share one
    resolution; anything else raises BadFrames.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise BadFrames(f"{directory} is not a directory")
    indices = []
    for path in directory.iterdir():
        match = _FRAME_RE.match(path.name)
        if match:
            indices.append(int(match.group(1)))
    if not indices:
        raise BadFrames(f"no frame_*.png files in {directory}")
    indices.sort()
    if indices != list(range(len(indices))):
        raise BadFrames(f"{directory}: frame indices are not contiguous from 0")

    frames: list[np.ndarray] = []
    shape = None
    for i in indices:
        path = directory / FRAME_PATTERN.format(i)
        try:
            with Image.open(path) as img:
                frame = np.asarray(img.convert("RGB"), dtype=np.uint8)
        except (UnidentifiedImageError, OSError, ValueError) as exc:
            raise BadFrames(f"cannot decode {path.name}: {exc}") from exc
        if shape is None:
            shape = frame.shape
        elif frame.shape != shape:
            raise BadFrames(
                f"{path.name} is {frame.shape[1]}x{frame.shape[0]}, "
                f"expected {shape[1]}x{shape[0]}"
            )
        frames.append(frame)
    return frames


def write_frames(directory: str | Path, frames) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(frames):
        Image.fromarray(np.asarray(frame, dtype=np.uint8), "RGB").save(
            directory / FRAME_PATTERN.format(i)
        )


# ---------------------------------------------------------------------------
# VBNF matrices


def vbnf_bytes(matrix: np.ndarray) -> bytes:
    """Serialize a 2-D float matrix: 16-byte header + row-major float32."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or min(matrix.shape) < 1:
        raise ValueError(f"VBNF matrix must be 2-D and non-empty, got {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("VBNF matrix must be finite")
    rows, cols = matrix.shape
    header = _VBNF_HEADER.pack(VBNF_MAGIC, VBNF_VERSION, rows, cols)
    return header + np.ascontiguousarray(matrix, dtype="<f4").tobytes()


def write_vbnf(path: str | Path, matrix: np.ndarray) -> None:
    Path(path).write_bytes(vbnf_bytes(matrix))


# ---------------------------------------------------------------------------
# JSON artifacts


def _write_json(path: str | Path, doc: dict) -> None:
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def write_detections(path: str | Path, per_frame: list[list[dict]]) -> None:
    """Write {"frames": [[{label, score, bbox, caption?}, ...], ...]}."""
    _write_json(path, {"frames": per_frame})


def write_captions(path: str | Path, captions: list[str]) -> None:
    _write_json(path, {"frames": list(captions)})


def write_scalars(path: str | Path, metric: str, values) -> None:
    _write_json(path, {"metric": metric, "values": [float(v) for v in values]})


def write_action_logits(path: str | Path, entries: list[tuple[str, float]]) -> None:
    _write_json(
        path,
        {"entries": [{"label": label, "logit": float(v)} for label, v in entries]},
    )


# ---------------------------------------------------------------------------
# Manifest create / merge


def merge_manifest(
    out_dir: str | Path,
    identity: dict,
    geometry: dict,
    artifact: tuple[str, str],
    flow_shape: tuple[int, int] | None = None,
) -> dict:
    """Add one artifact entry to a bundle manifest, creating it if needed.

    ``identity`` maps the identity keys (plus fps / group_index) to the
    values given on the command line; None means "not provided". On first
    write all identity keys are required. On merge every provided value
    and the frame geometry must agree with what the manifest already
    says — a bundle must not silently mix sources.
    """
    out_dir = Path(out_dir)
    manifest_path = out_dir / MANIFEST_NAME
    if manifest_path.exists():
        try:
            doc = json.loads(manifest_path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ManifestConflict(f"cannot parse {manifest_path}: {exc}") from exc
        for key in _IDENTITY_KEYS + ("fps", "group_index"):
            given = identity.get(key)
            if given is not None and key in doc and doc[key] != given:
                raise ManifestConflict(
                    f"{key} {given!r} conflicts with existing {doc[key]!r}"
                )
        for key in _GEOMETRY_KEYS:
            if doc[key] != geometry[key]:
                raise ManifestConflict(
                    f"{key} {geometry[key]} conflicts with existing {doc[key]}"
                )
    else:
        missing = [key for key in _IDENTITY_KEYS if not identity.get(key)]
        if missing:
            raise MissingArgument(
                f"new bundle needs {', '.join('--' + k.replace('_', '-') for k in missing)}"
            )
        doc = {key: identity[key] for key in _IDENTITY_KEYS}
        doc.update(geometry)
        doc["fps"] = identity.get("fps") or 8.0
        if identity.get("group_index") is not None:
            doc["group_index"] = identity["group_index"]
        doc["artifacts"] = {}

    kind, rel = artifact
    doc["artifacts"][kind] = rel
    if flow_shape is not None:
        existing = doc.get("flow_shape")
        if existing is not None and tuple(existing) != tuple(flow_shape):
            raise ManifestConflict(
                f"flow_shape {list(flow_shape)} conflicts with existing {existing}"
            )
        doc["flow_shape"] = [int(flow_shape[0]), int(flow_shape[1])]

    ordered = {key: doc[key] for key in _IDENTITY_KEYS}
    ordered.update({key: doc[key] for key in _GEOMETRY_KEYS})
    ordered["fps"] = doc["fps"]
    if "flow_shape" in doc:
        ordered["flow_shape"] = doc["flow_shape"]
    if "group_index" in doc:
        ordered["group_index"] = doc["group_index"]
    ordered["artifacts"] = dict(sorted(doc["artifacts"].items()))
    _write_json(manifest_path, ordered)
    return ordered


def record_backend_meta(out_dir: str | Path, backend: str, info: dict) -> None:
    """Note backend provenance in a sidecar the engine never reads.

    The manifest schema is closed, so adapter details (versions,
    checkpoint digests) live next to it instead of inside it.
    """
    path = Path(out_dir) / META_NAME
    doc = {"backends": {}}
    if path.exists():
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            doc = {"backends": {}}
    doc.setdefault("backends", {})[backend] = info
    _write_json(path, {"backends": dict(sorted(doc["backends"].items()))})


def sha256_file(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
