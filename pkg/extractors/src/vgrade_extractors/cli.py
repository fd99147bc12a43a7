"""Command-line entry point: extract one artifact into a bundle directory.

    vgrade-extract --backend <name> --frames <dir> --out <bundle-dir>

Each invocation runs one backend over the input frames, writes its
artifact into the bundle, and merges the entry into the bundle's
manifest. Running the full roster against the same --out directory
therefore assembles a complete, validatable evaluation bundle. The
engine is a separate program; the files are the only interface.

Backends and the artifacts they produce:

  frames           frames/            the input frames, re-encoded
  dino             dino.vbnf          per-frame subject embeddings
  clip-image       clip_image.vbnf    per-frame image embeddings
  clip-text        clip_text.vbnf     one prompt/style text embedding
  viclip-video     viclip_video.vbnf  one video embedding
  viclip-text      viclip_text.vbnf   one video-prompt text embedding
  raft             flow.vbnf          T-1 flow-magnitude grids
  amt              recon_frames/      interpolated odd frames
  grit             detections.json    per-frame object detections
  tag2text         captions.json      per-frame scene captions
  umt              action_logits.json top action classifications
  musiq            imaging.json       per-frame technical quality
  laion-aesthetic  aesthetic.json     per-frame aesthetic quality
"""

from __future__ import annotations

import argparse
import sys
import traceback
from pathlib import Path

from . import __version__, bundle, features, motion, perception
from .errors import CheckpointMissing, ExtractError, MissingArgument


def _require_text(args) -> str:
    if not args.text:
        raise MissingArgument(f"backend {args.backend!r} needs --text")
    return args.text


def _require_objects(args) -> list[tuple[str, str]]:
    if not args.objects:
        raise MissingArgument(
            f"backend {args.backend!r} needs --objects (e.g. red=cat,blue=dog)"
        )
    return perception.parse_object_spec(args.objects)


def _run_frames(args, frames, out_dir):
    bundle.write_frames(out_dir / "frames", frames)
    return "frames", "frames"


def _run_dino(args, frames, out_dir):
    bundle.write_vbnf(out_dir / "dino.vbnf", features.dino_embeddings(frames))
    return "dino", "dino.vbnf"


def _run_clip_image(args, frames, out_dir):
    bundle.write_vbnf(
        out_dir / "clip_image.vbnf", features.clip_image_embeddings(frames)
    )
    return "clip_image", "clip_image.vbnf"


def _run_clip_text(args, frames, out_dir):
    bundle.write_vbnf(
        out_dir / "clip_text.vbnf", features.text_embedding(_require_text(args))
    )
    return "clip_text", "clip_text.vbnf"


def _run_viclip_video(args, frames, out_dir):
    bundle.write_vbnf(
        out_dir / "viclip_video.vbnf", features.viclip_video_embedding(frames)
    )
    return "viclip_video", "viclip_video.vbnf"


def _run_viclip_text(args, frames, out_dir):
    bundle.write_vbnf(
        out_dir / "viclip_text.vbnf", features.text_embedding(_require_text(args))
    )
    return "viclip_text", "viclip_text.vbnf"


def _run_raft(args, frames, out_dir):
    grids = motion.flow_grids(frames)
    pairs, height, width = grids.shape
    bundle.write_vbnf(out_dir / "flow.vbnf", grids.reshape(pairs, height * width))
    return "flow", "flow.vbnf", (height, width)


def _run_amt(args, frames, out_dir):
    recon = motion.reconstruction_for_video(frames)
    bundle.write_frames(out_dir / "recon_frames", recon)
    return "recon_frames", "recon_frames"


def _run_grit(args, frames, out_dir):
    track = perception.detection_track(frames, _require_objects(args))
    bundle.write_detections(out_dir / "detections.json", track)
    return "detections", "detections.json"


def _run_tag2text(args, frames, out_dir):
    objects = perception.parse_object_spec(args.objects) if args.objects else None
    captions = perception.caption_frames(frames, objects)
    bundle.write_captions(out_dir / "captions.json", captions)
    return "captions", "captions.json"


def _run_umt(args, frames, out_dir):
    if not args.actions:
        raise MissingArgument("backend 'umt' needs --actions (e.g. running,walking)")
    actions = [a.strip().lower() for a in args.actions.split(",") if a.strip()]
    entries = perception.action_logits(frames, actions)
    bundle.write_action_logits(out_dir / "action_logits.json", entries)
    return "action_logits", "action_logits.json"


def _run_musiq(args, frames, out_dir):
    bundle.write_scalars(
        out_dir / "imaging.json", "imaging_raw", perception.imaging_scores(frames)
    )
    return "imaging", "imaging.json"


def _run_laion_aesthetic(args, frames, out_dir):
    bundle.write_scalars(
        out_dir / "aesthetic.json",
        "aesthetic_raw",
        perception.aesthetic_scores(frames),
    )
    return "aesthetic", "aesthetic.json"


BACKENDS = {
    "frames": _run_frames,
    "dino": _run_dino,
    "clip-image": _run_clip_image,
    "clip-text": _run_clip_text,
    "viclip-video": _run_viclip_video,
    "viclip-text": _run_viclip_text,
    "raft": _run_raft,
    "amt": _run_amt,
    "grit": _run_grit,
    "tag2text": _run_tag2text,
    "umt": _run_umt,
    "musiq": _run_musiq,
    "laion-aesthetic": _run_laion_aesthetic,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vgrade-extract",
        description="run one extractor backend and add its artifact to a bundle",
    )
    parser.add_argument(
        "--backend", required=True, choices=sorted(BACKENDS), help="backend to run"
    )
    parser.add_argument("--frames", required=True, help="input frame directory")
    parser.add_argument("--out", required=True, help="bundle output directory")
    parser.add_argument("--video-id", dest="video_id")
    parser.add_argument("--model-id", dest="model_id")
    parser.add_argument("--prompt-id", dest="prompt_id")
    parser.add_argument("--dimension-tag", dest="dimension_tag")
    parser.add_argument("--fps", type=float)
    parser.add_argument("--group-index", dest="group_index", type=int)
    parser.add_argument("--text", help="prompt or style text (text backends)")
    parser.add_argument(
        "--objects", help="color=label pairs for detection and captioning"
    )
    parser.add_argument("--actions", help="candidate actions, comma-separated")
    parser.add_argument(
        "--checkpoint", help="optional checkpoint file; its digest is recorded"
    )
    return parser


def run(args: argparse.Namespace) -> str:
    checkpoint_sha = None
    if args.checkpoint:
        path = Path(args.checkpoint)
        if not path.is_file():
            raise CheckpointMissing(f"checkpoint {path} does not exist")
        checkpoint_sha = bundle.sha256_file(path)

    frames = bundle.read_frames(args.frames)
    height, width = frames[0].shape[:2]
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    result = BACKENDS[args.backend](args, frames, out_dir)
    kind, rel = result[0], result[1]
    flow_shape = result[2] if len(result) > 2 else None

    identity = {
        "video_id": args.video_id,
        "model_id": args.model_id,
        "prompt_id": args.prompt_id,
        "dimension_tag": args.dimension_tag,
        "fps": args.fps,
        "group_index": args.group_index,
    }
    geometry = {"frame_count": len(frames), "width": width, "height": height}
    bundle.merge_manifest(out_dir, identity, geometry, (kind, rel), flow_shape)
    bundle.record_backend_meta(
        out_dir,
        args.backend,
        {
            "adapter_version": __version__,
            "checkpoint_sha256": checkpoint_sha,
            "source_frames": str(Path(args.frames)),
        },
    )
    return f"{args.backend}: wrote {rel}"


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        print(run(args))
    except ExtractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
