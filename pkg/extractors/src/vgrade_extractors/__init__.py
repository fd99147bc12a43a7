"""Reference extractors that turn raw frames into evaluation bundles.

The package mirrors the artifact roster the evaluation engine consumes —
embeddings, flow grids, reconstructed frames, detections, captions, and
per-frame predictor scores — with deterministic classical backends that
write the same file formats the learned extractors would. The engine and
the extractors communicate only through those files.
"""

__version__ = "0.1.0"

from .bundle import (
    FRAME_PATTERN,
    MANIFEST_NAME,
    META_NAME,
    merge_manifest,
    read_frames,
    vbnf_bytes,
    write_frames,
    write_vbnf,
)
from .cli import BACKENDS, main
from .errors import (
    BadFrames,
    CheckpointMissing,
    ExtractError,
    ManifestConflict,
    MissingArgument,
    TooFewFrames,
    UnknownBackend,
)
from .features import (
    clip_image_embeddings,
    dino_embeddings,
    text_embedding,
    viclip_video_embedding,
)
from .motion import flow_grids, interpolate_reconstruction, reconstruction_for_video
from .perception import (
    action_logits,
    aesthetic_scores,
    caption_frames,
    detect_objects,
    detection_track,
    imaging_scores,
    parse_object_spec,
)

__all__ = [
    "BACKENDS",
    "BadFrames",
    "CheckpointMissing",
    "ExtractError",
    "FRAME_PATTERN",
    "MANIFEST_NAME",
    "META_NAME",
    "ManifestConflict",
    "MissingArgument",
    "TooFewFrames",
    "UnknownBackend",
    "action_logits",
    "aesthetic_scores",
    "caption_frames",
    "clip_image_embeddings",
    "detect_objects",
    "detection_track",
    "dino_embeddings",
    "flow_grids",
    "imaging_scores",
    "interpolate_reconstruction",
    "main",
    "merge_manifest",
    "parse_object_spec",
    "read_frames",
    "reconstruction_for_video",
    "text_embedding",
    "vbnf_bytes",
    "viclip_video_embedding",
    "write_frames",
    "write_vbnf",
]
