"""End-to-end: the full backend roster builds bundles the engine accepts.

The engine is driven only through its command line and file formats —
no imports — which is the whole point of the extractor/engine split.
Two 16-frame clips are extracted with every backend, hand-written suite
records pair them with their dimensions, and the engine must validate
the bundles with zero violations and score every selected dimension.
"""

import json
import subprocess
import sys

import pytest

from vgrade_extractors import bundle, cli

MODEL = "toy_gen"
BACKEND_ARGS = {
    "clip-text": ["--text", "an oil painting of two squares"],
    "viclip-text": ["--text", "a red square slides past a blue square"],
    "grit": ["--objects", "red=cat,blue=dog"],
    "tag2text": ["--objects", "red=cat,blue=dog"],
    "umt": ["--actions", "sliding,resting"],
}

SUITE_RECORDS = [
    {
        "prompt_id": "p_spatial",
        "text": "a red cat to the left of a blue dog",
        "dimension_tag": "spatial_relationship",
        "labels": {"relation": {"a": "cat", "b": "dog", "kind": "left_of"}},
    },
    {
        "prompt_id": "p_flicker",
        "text": "a perfectly still scene with two squares",
        "dimension_tag": "temporal_flickering",
    },
]


def extract_all(frames_dir, out_dir, video_id, prompt_id, dimension_tag):
    """Run every backend against one clip, accumulating a full bundle."""
    identity = [
        "--video-id", video_id,
        "--model-id", MODEL,
        "--prompt-id", prompt_id,
        "--dimension-tag", dimension_tag,
        "--fps", "8",
        "--group-index", "0",
    ]
    for backend in sorted(cli.BACKENDS):
        argv = [
            "--backend", backend,
            "--frames", str(frames_dir),
            "--out", str(out_dir),
            *identity,
            *BACKEND_ARGS.get(backend, []),
        ]
        assert cli.main(argv) == 0, f"backend {backend} failed"
        identity = []  # later invocations inherit identity from the manifest


def run_engine(*argv):
    return subprocess.run(
        [sys.executable, "-m", "vgrade", *argv],
        capture_output=True,
        text=True,
    )


@pytest.fixture(scope="module")
def smoke_corpus(tmp_path_factory, moving_frames_dir, static_frames_dir):
    root = tmp_path_factory.mktemp("smoke")
    bundles = root / "bundles"
    extract_all(
        moving_frames_dir,
        bundles / MODEL / "v_spatial",
        "v_spatial",
        "p_spatial",
        "spatial_relationship",
    )
    extract_all(
        static_frames_dir,
        bundles / MODEL / "v_flicker",
        "v_flicker",
        "p_flicker",
        "temporal_flickering",
    )
    suite = root / "suite.jsonl"
    suite.write_text(
        "".join(json.dumps(r) + "\n" for r in SUITE_RECORDS), encoding="utf-8"
    )
    return root


def test_bundle_has_every_artifact(smoke_corpus):
    manifest = json.loads(
        (smoke_corpus / "bundles" / MODEL / "v_spatial" / "manifest.json").read_text()
    )
    assert sorted(manifest["artifacts"]) == [
        "action_logits",
        "aesthetic",
        "captions",
        "clip_image",
        "clip_text",
        "detections",
        "dino",
        "flow",
        "frames",
        "imaging",
        "recon_frames",
        "viclip_text",
        "viclip_video",
    ]
    assert manifest["frame_count"] == 16
    assert manifest["flow_shape"] == [16, 16]
    bundle_dir = smoke_corpus / "bundles" / MODEL / "v_spatial"
    recon = list((bundle_dir / "recon_frames").glob("frame_*.png"))
    assert len(recon) == 7  # 16 frames drop indices 1, 3, ... 13
    meta = json.loads((bundle_dir / bundle.META_NAME).read_text())
    assert sorted(meta["backends"]) == sorted(cli.BACKENDS)


def test_engine_validates_bundles_clean(smoke_corpus):
    proc = run_engine(
        "validate",
        "--suite", str(smoke_corpus / "suite.jsonl"),
        "--bundles", str(smoke_corpus / "bundles"),
    )
    assert proc.returncode == 0, proc.stderr
    doc = json.loads(proc.stdout)
    assert doc["manifests_found"] == 2
    assert doc["eligible_bundles"] == 2
    assert doc["violations"] == []


def test_engine_scores_every_selected_dimension(smoke_corpus, tmp_path):
    out = tmp_path / "run"
    proc = run_engine(
        "score",
        "--suite", str(smoke_corpus / "suite.jsonl"),
        "--bundles", str(smoke_corpus / "bundles"),
        "--out", str(out),
        "--dims", "spatial_relationship,temporal_flickering",
    )
    assert proc.returncode == 0, proc.stderr

    report = json.loads((out / "report.json").read_text())
    model = report["models"][MODEL]
    assert model["skipped"] == {}
    assert model["dimensions"] == {
        "spatial_relationship": 100.0,
        "temporal_flickering": 100.0,
    }
    spatial = model["per_video"]["spatial_relationship"]
    assert list(spatial) == ["v_spatial"]
    assert spatial["v_spatial"]["score_percent"] == 100.0
    assert (out / "report.csv").exists()
    assert (out / "radar.svg").exists()


def test_new_bundle_requires_identity(tmp_path, static_frames_dir):
    proc_args = [
        "--backend", "dino",
        "--frames", str(static_frames_dir),
        "--out", str(tmp_path / "b"),
    ]
    assert cli.main(proc_args) == 2


def test_identity_conflict_is_rejected(tmp_path, static_frames_dir, capsys):
    out = tmp_path / "b"
    base = [
        "--frames", str(static_frames_dir),
        "--out", str(out),
        "--video-id", "v1",
        "--model-id", MODEL,
        "--prompt-id", "p1",
        "--dimension-tag", "temporal_flickering",
    ]
    assert cli.main(["--backend", "frames", *base]) == 0
    conflicting = [arg if arg != MODEL else "other_gen" for arg in base]
    assert cli.main(["--backend", "dino", *conflicting]) == 2
    assert "conflicts" in capsys.readouterr().err


def test_text_backends_require_text(tmp_path, static_frames_dir):
    argv = [
        "--backend", "clip-text",
        "--frames", str(static_frames_dir),
        "--out", str(tmp_path / "b"),
        "--video-id", "v1",
        "--model-id", MODEL,
        "--prompt-id", "p1",
        "--dimension-tag", "appearance_style",
    ]
    assert cli.main(argv) == 2


def test_umt_requires_actions(tmp_path, static_frames_dir):
    argv = [
        "--backend", "umt",
        "--frames", str(static_frames_dir),
        "--out", str(tmp_path / "b"),
        "--video-id", "v1",
        "--model-id", MODEL,
        "--prompt-id", "p1",
        "--dimension-tag", "human_action",
    ]
    assert cli.main(argv) == 2


def test_missing_checkpoint_is_reported(tmp_path, static_frames_dir, capsys):
    argv = [
        "--backend", "dino",
        "--frames", str(static_frames_dir),
        "--out", str(tmp_path / "b"),
        "--video-id", "v1",
        "--model-id", MODEL,
        "--prompt-id", "p1",
        "--dimension-tag", "subject_consistency",
        "--checkpoint", str(tmp_path / "missing.pt"),
    ]
    assert cli.main(argv) == 2
    assert "checkpoint" in capsys.readouterr().err


def test_checkpoint_digest_is_recorded(tmp_path, static_frames_dir):
    checkpoint = tmp_path / "weights.pt"
    checkpoint.write_bytes(b"not a real checkpoint")
    out = tmp_path / "b"
    argv = [
        "--backend", "dino",
        "--frames", str(static_frames_dir),
        "--out", str(out),
        "--video-id", "v1",
        "--model-id", MODEL,
        "--prompt-id", "p1",
        "--dimension-tag", "subject_consistency",
        "--checkpoint", str(checkpoint),
    ]
    assert cli.main(argv) == 0
    meta = json.loads((out / bundle.META_NAME).read_text())
    assert meta["backends"]["dino"]["checkpoint_sha256"] == bundle.sha256_file(
        checkpoint
    )


def test_unknown_backend_rejected(tmp_path, static_frames_dir):
    with pytest.raises(SystemExit):
        cli.main(
            [
                "--backend", "yolo",
                "--frames", str(static_frames_dir),
                "--out", str(tmp_path / "b"),
            ]
        )


def test_module_entry_point(static_frames_dir, tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "vgrade_extractors", "--help"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "--backend" in proc.stdout
