"""Acceptance checks for the engine's core guarantees.

Each test here covers one release criterion end to end: oracle equivalence
for all sixteen scorers, the closed-form anchor values, the dynamic-degree
rule, win-ratio conservation, the correlation and radar anchors, parallel
determinism with a runtime budget, and interchange round-trip fidelity.
Tolerances are part of the contract; do not loosen them to make a change
pass.
"""

import json
import struct
import time

import numpy as np
import pytest

from vgrade import cli, quality, semantics
from vgrade.alignment import (
    PreferenceAnnotation,
    human_win_ratio,
    rank_correlation,
    vbench_win_ratio,
)
from vgrade.core import (
    ActionLogits,
    Detection,
    DetectionTrack,
    FeatureTrack,
    FlowTrack,
    FrameSequence,
    ScalarTrack,
)
from vgrade.errors import (
    BadMagic,
    NonFiniteValue,
    TrailingBytes,
    TruncatedPayload,
    VersionUnsupported,
)
from vgrade.interchange import parse_vbnf, read_vbnf, vbnf_bytes, write_vbnf
from vgrade.reporting import percent, radar_normalize

import oracles
from corpus import (
    action_logits,
    random_features,
    random_flow,
    random_frames,
    scalar_track,
    write_bundle,
    write_suite,
)

RELATION_KINDS = ("left_of", "right_of", "above", "below")

COLOR_CAPTIONS = (
    "a red car on the road",
    "a blue car parked outside",
    "a car near a tree",
    "a shiny vehicle",
    None,
)

SCENE_CAPTIONS = (
    "a sandy beach at sunset",
    "a beach",
    "a city street at night",
    "an empty hotel lobby",
    "waves on the sandy shore",
)


def _det_dicts(track: DetectionTrack):
    return [
        [
            {"label": d.label, "score": d.score, "bbox": d.bbox, "caption": d.caption}
            for d in frame
        ]
        for frame in track.per_frame
    ]


def _random_action_logits(rng, labels):
    k = int(rng.integers(0, 6))
    logits = sorted({round(float(v), 6) for v in rng.uniform(0.0, 1.0, size=k)},
                    reverse=True)
    chosen = list(rng.choice(labels, size=len(logits), replace=False))
    return action_logits("vid", list(zip(chosen, logits)))


def _random_color_track(rng):
    per_frame = []
    for _ in range(int(rng.integers(1, 6))):
        dets = []
        if rng.random() < 0.85:
            caption = COLOR_CAPTIONS[int(rng.integers(0, len(COLOR_CAPTIONS)))]
            dets.append(
                Detection("car", float(rng.uniform(0.1, 1.0)),
                          (1.0, 1.0, 10.0, 10.0), caption)
            )
        if rng.random() < 0.5:
            dets.append(
                Detection("tree", float(rng.uniform(0.1, 1.0)),
                          (12.0, 1.0, 20.0, 10.0), "a green tree")
            )
        per_frame.append(tuple(dets))
    return DetectionTrack("vid", tuple(per_frame))


def _random_pair_track(rng, frame_count=4, size=48.0):
    per_frame = []
    for _ in range(frame_count):
        dets = []
        for label in ("cat", "dog"):
            if rng.random() < 0.8:
                x0 = float(rng.uniform(0.0, size - 6.0))
                y0 = float(rng.uniform(0.0, size - 6.0))
                x1 = float(rng.uniform(x0 + 1.0, size))
                y1 = float(rng.uniform(y0 + 1.0, size))
                dets.append(
                    Detection(label, float(rng.uniform(0.1, 1.0)), (x0, y0, x1, y1))
                )
        per_frame.append(tuple(dets))
    return DetectionTrack("vid", tuple(per_frame))


def test_criterion_1_oracle_suite():
    """All 16 scorers match brute-force references on 50 random fixtures."""
    rng = np.random.default_rng(16161616)
    vocab = semantics.load_color_vocabulary()
    started = time.monotonic()

    for _ in range(50):
        # 1-2: cross-frame consistency over dino / clip_image features
        for kind in ("dino", "clip_image"):
            track = random_features(rng, kind=kind,
                                    frame_count=int(rng.integers(2, 9)), dim=12)
            got = quality.cross_frame_consistency(track)
            want = oracles.consistency([row.tolist() for row in track.vectors])
            assert got == pytest.approx(want, abs=1e-9)

        # 3: temporal flickering
        video = random_frames(rng, frame_count=int(rng.integers(2, 8)), size=(6, 6))
        got = quality.temporal_flickering(video)
        assert got == pytest.approx(oracles.flicker(list(video.frames)), abs=1e-9)

        # 4: motion smoothness
        frames = random_frames(rng, frame_count=int(rng.integers(3, 10)), size=(6, 6))
        dropped = oracles.dropped_indices(frames.frame_count)
        recon = random_frames(rng, video_id="recon", frame_count=len(dropped),
                              size=(6, 6))
        got = quality.motion_smoothness(frames, recon)
        want = oracles.motion_smoothness(list(frames.frames), list(recon.frames))
        assert got == pytest.approx(want, abs=1e-9)

        # 5: dynamic degree over a small fleet
        tau = float(rng.uniform(0.5, 2.0))
        flows = {
            f"v{i}": random_flow(rng, video_id=f"v{i}",
                                 pair_count=int(rng.integers(1, 4)),
                                 grid=(5, 5), scale=0.2)
            for i in range(int(rng.integers(2, 6)))
        }
        got = quality.dynamic_degree(flows, tau).model_score
        want = oracles.dynamic_degree(
            [flows[vid].magnitudes.tolist() for vid in sorted(flows)], tau
        )
        assert got == pytest.approx(want, abs=1e-9)

        # 6-7: framewise quality
        aes = scalar_track("vid", "aesthetic_raw",
                           rng.uniform(0.0, 10.0, size=int(rng.integers(1, 8))))
        got = quality.framewise_quality(aes)
        assert got == pytest.approx(
            oracles.framewise_quality(list(aes.values), 10.0), abs=1e-9
        )
        img = scalar_track("vid", "imaging_raw",
                           rng.uniform(0.0, 100.0, size=int(rng.integers(1, 8))))
        got = quality.framewise_quality(img)
        assert got == pytest.approx(
            oracles.framewise_quality(list(img.values), 100.0), abs=1e-9
        )

        # 8: object class
        track = _random_pair_track(rng, frame_count=int(rng.integers(1, 6)))
        got = semantics.object_class_score(track, "cat")
        assert got == pytest.approx(
            oracles.object_class(_det_dicts(track), "cat"), abs=1e-9
        )

        # 9: multiple objects
        got = semantics.multiple_objects_score(track, ["cat", "dog"])
        assert got == pytest.approx(
            oracles.multiple_objects(_det_dicts(track), ["cat", "dog"]), abs=1e-9
        )

        # 10: human action
        logits = _random_action_logits(
            rng, ["running", "jumping", "swimming", "reading", "cooking", "typing"]
        )
        target = "running" if rng.random() < 0.5 else "dancing"
        got = semantics.human_action_score(logits, target)
        want = oracles.human_action(
            [{"label": label, "logit": logit} for label, logit in logits.entries],
            target,
        )
        assert got == pytest.approx(want, abs=1e-9)

        # 11: color (None and NOT_APPLICABLE must coincide)
        track = _random_color_track(rng)
        got = semantics.color_score(track, "car", "red", vocab)
        want = oracles.color_score(_det_dicts(track), "car", "red", vocab)
        if want is None:
            assert got is semantics.NOT_APPLICABLE
        else:
            assert got == pytest.approx(want, abs=1e-9)

        # 12: spatial relationship
        kind = RELATION_KINDS[int(rng.integers(0, 4))]
        track = _random_pair_track(rng)
        rel = semantics.RelationSpec("cat", "dog", kind)
        got = semantics.spatial_relationship_score(track, rel)
        want = oracles.spatial_relationship(_det_dicts(track), "cat", "dog", kind)
        assert got == pytest.approx(want, abs=1e-9)

        # 13: scene
        captions = tuple(
            SCENE_CAPTIONS[int(rng.integers(0, len(SCENE_CAPTIONS)))]
            for _ in range(int(rng.integers(1, 6)))
        )
        words = ["beach"] if rng.random() < 0.5 else ["sandy", "beach"]
        got = semantics.scene_score(captions, words)
        assert got == pytest.approx(oracles.scene_score(captions, words), abs=1e-9)

        # 14: appearance style
        frames_embed = random_features(rng, kind="clip_image",
                                       frame_count=int(rng.integers(1, 6)), dim=10)
        style_embed = random_features(rng, kind="text", dim=10)
        got = semantics.appearance_style_score(frames_embed, style_embed)
        want = oracles.appearance_style(
            [row.tolist() for row in frames_embed.vectors],
            style_embed.vectors[0].tolist(),
        )
        assert got == pytest.approx(want, abs=1e-9)

        # 15-16: pooled video-text similarity, run twice on fresh fixtures
        for _pass in range(2):
            video_embed = random_features(rng, kind="viclip_video", dim=10)
            text_embed = random_features(rng, kind="text", dim=10)
            got = semantics.video_text_similarity(video_embed, text_embed)
            want = oracles.video_text_similarity(
                video_embed.vectors[0].tolist(), text_embed.vectors[0].tolist()
            )
            assert got == pytest.approx(want, abs=1e-9)

    assert time.monotonic() - started < 10.0


def test_criterion_2_closed_form_anchors():
    """Hand-checkable values: steady video, identity recon, MAE 10, [5, 7]."""
    steady = FrameSequence(
        "steady", tuple(np.full((8, 8, 3), 137, dtype=np.uint8) for _ in range(6)),
        8.0,
    )
    assert quality.temporal_flickering(steady) == 1.0

    frames = FrameSequence(
        "v", tuple(np.full((8, 8, 3), 20 * t, dtype=np.uint8) for t in range(8)),
        8.0,
    )
    dropped = (1, 3, 5)
    recon = FrameSequence("v_recon", tuple(frames.frames[i] for i in dropped), 8.0)
    assert quality.motion_smoothness(frames, recon) == 1.0

    row = np.zeros(16, dtype=np.float32)
    row[0] = 1.0
    identical = FeatureTrack("v", "dino", np.tile(row, (6, 1)))
    assert quality.cross_frame_consistency(identical) == 1.0

    a = np.full((8, 8, 3), 100, dtype=np.uint8)
    b = np.full((8, 8, 3), 110, dtype=np.uint8)
    video = FrameSequence("v", (a, b, a), 8.0)
    assert quality.temporal_flickering(video) == pytest.approx(0.9608, abs=1e-4)

    track = ScalarTrack("v", "aesthetic_raw", (5.0, 7.0))
    assert quality.framewise_quality(track) == 0.6


def test_criterion_3_dynamic_degree_rule():
    """Top-5% statistic on the worked fixture; all-static fleet rows at 0.00%."""
    grid = np.zeros((1, 10, 10), dtype=np.float32)
    grid[0].flat[:5] = 10.0
    flow = FlowTrack("v", grid)
    assert quality.dynamic_statistic(flow) == 10.0

    for model in range(3):
        flows = {
            f"m{model}_v{i}": FlowTrack(
                f"m{model}_v{i}", np.full((3, 16, 16), 0.001, dtype=np.float32)
            )
            for i in range(4)
        }
        score = quality.dynamic_degree(flows).model_score
        assert score == 0.0
        assert f"{percent(score):.2f}%" == "0.00%"


def test_criterion_4_win_ratio_conservation():
    """Complete round-robins conserve total credit; 2 wins + 1 tie = 0.8333."""
    rng = np.random.default_rng(424242)
    verdicts = ("x_better", "y_better", "tie")
    for m in (2, 3, 4, 6):
        models = [f"m{i}" for i in range(m)]
        annotations = []
        for slot in range(3):
            for i in range(m):
                for j in range(i + 1, m):
                    annotations.append(
                        PreferenceAnnotation(
                            f"p{slot}", 0, models[i], models[j], "human_action",
                            verdicts[int(rng.integers(0, 3))],
                        )
                    )
        table = human_win_ratio(annotations)
        assert sum(table.ratios.values()) == pytest.approx(m / 2.0, abs=1e-12)

        slots = [(f"p{slot}", 0) for slot in range(3)]
        scores = {
            model: {slot: float(rng.random()) for slot in slots}
            for model in models
        }
        table = vbench_win_ratio(scores, "human_action")
        assert sum(table.ratios.values()) == pytest.approx(m / 2.0, abs=1e-12)

    annotations = [
        PreferenceAnnotation("p0", 0, "a", "b", "human_action", "x_better"),
        PreferenceAnnotation("p0", 0, "a", "c", "human_action", "x_better"),
        PreferenceAnnotation("p0", 0, "a", "d", "human_action", "tie"),
    ]
    table = human_win_ratio(annotations)
    assert table.ratios["a"] == pytest.approx(0.8333, abs=1e-4)


def test_criterion_5_correlation_anchors():
    """Spearman and Pearson agree with the pinned 4-point examples."""
    assert rank_correlation([1, 2, 3, 4], [1, 3, 2, 4], "spearman") == 0.8

    vbench = [67.87, 49.07, 24.72, 58.33]
    human = [69.95, 56.30, 20.42, 53.33]
    assert rank_correlation(vbench, human, "spearman") == 0.8

    assert rank_correlation([1.0, 2.0, 3.0, 4.0], [1.0, 2.0, 3.0, 4.0],
                            "pearson") == 1.0
    rng = np.random.default_rng(5)
    for _ in range(20):
        x = [float(v) for v in rng.uniform(0.0, 1.0, size=6)]
        assert rank_correlation(x, x, "pearson") == pytest.approx(1.0, abs=1e-12)


def test_criterion_6_radar_normalization():
    """Published four-model inputs land on 0.7345; ordering always survives."""
    values = {
        "LaVie": 91.41,
        "ModelScope": 89.87,
        "VideoCrafter": 86.24,
        "CogVideo": 92.19,
    }
    mapped = radar_normalize(values, mode="band_03_08")
    assert mapped["LaVie"] == pytest.approx(0.7345, abs=5e-4)
    assert mapped["CogVideo"] == pytest.approx(0.8)
    assert mapped["VideoCrafter"] == pytest.approx(0.3)

    rng = np.random.default_rng(6)
    for _ in range(100):
        names = [f"m{i}" for i in range(int(rng.integers(2, 7)))]
        values = {name: float(rng.random()) for name in names}
        mapped = radar_normalize(values)
        assert sorted(names, key=values.get) == sorted(names, key=mapped.get)


def _build_perf_corpus(root):
    records = []
    for i in range(25):
        records.append(
            {"prompt_id": f"pf_{i:02d}", "text": f"flicker scene {i}",
             "dimension_tag": "temporal_flickering"}
        )
        records.append(
            {"prompt_id": f"pm_{i:02d}", "text": f"motion scene {i}",
             "dimension_tag": "motion_smoothness"}
        )
    suite_path = write_suite(root / "suite.jsonl", records)

    bundles = root / "bundles"
    frame_count = 16
    dropped = oracles.dropped_indices(frame_count)
    for model_offset, model_id in enumerate(("model_a", "model_b")):
        for i in range(25):
            k = (i * 7 + model_offset * 3) % 11
            base = 100
            frames = FrameSequence(
                f"{model_id}_fl_{i:02d}",
                tuple(
                    np.full((256, 256, 3), base + (t % 2) * k, dtype=np.uint8)
                    for t in range(frame_count)
                ),
                8.0,
            )
            flow = FlowTrack(
                frames.video_id, np.full((frame_count - 1, 8, 8), 0.0005,
                                         dtype=np.float32)
            )
            write_bundle(
                bundles, video_id=frames.video_id, model_id=model_id,
                prompt_id=f"pf_{i:02d}", dimension_tag="temporal_flickering",
                frames=frames, flow=flow,
            )

            c = 40 + i * 2 + model_offset
            d = (i + model_offset) % 9
            frames = FrameSequence(
                f"{model_id}_mo_{i:02d}",
                tuple(
                    np.full((256, 256, 3), c + 2 * t, dtype=np.uint8)
                    for t in range(frame_count)
                ),
                8.0,
            )
            recon = FrameSequence(
                f"{model_id}_mo_{i:02d}_recon",
                tuple(
                    np.full((256, 256, 3), c + 2 * idx + d, dtype=np.uint8)
                    for idx in dropped
                ),
                8.0,
            )
            write_bundle(
                bundles, video_id=frames.video_id, model_id=model_id,
                prompt_id=f"pm_{i:02d}", dimension_tag="motion_smoothness",
                frames=frames, recon_frames=recon,
            )
    return suite_path, bundles


def test_criterion_7_determinism_and_runtime(tmp_path):
    """1 vs 8 workers agree byte-for-byte on 100 videos; 1 worker under 60 s."""
    suite_path, bundles = _build_perf_corpus(tmp_path)
    out1, out8 = tmp_path / "w1", tmp_path / "w8"

    started = time.monotonic()
    code = cli.main(
        ["score", "--suite", str(suite_path), "--bundles", str(bundles),
         "--dims", "temporal_flickering,motion_smoothness",
         "--out", str(out1), "--workers", "1"]
    )
    elapsed = time.monotonic() - started
    assert code == 0
    assert elapsed < 60.0, f"single-worker scoring took {elapsed:.1f}s"

    code = cli.main(
        ["score", "--suite", str(suite_path), "--bundles", str(bundles),
         "--dims", "temporal_flickering,motion_smoothness",
         "--out", str(out8), "--workers", "8"]
    )
    assert code == 0
    assert (out1 / "report.json").read_bytes() == (out8 / "report.json").read_bytes()

    doc = json.loads((out1 / "report.json").read_text(encoding="utf-8"))
    per_video = doc["models"]["model_a"]["per_video"]
    assert len(per_video["temporal_flickering"]) == 25
    assert len(per_video["motion_smoothness"]) == 25
    k = (4 * 7) % 11
    want = percent((255.0 - k) / 255.0)
    assert per_video["temporal_flickering"]["model_a_fl_04"]["score_percent"] == want
    d = (4 + 1) % 9
    want = percent((255.0 - d) / 255.0)
    per_video_b = doc["models"]["model_b"]["per_video"]
    assert per_video_b["motion_smoothness"]["model_b_mo_04"]["score_percent"] == want


def test_criterion_8_interchange_round_trips(tmp_path):
    """1000 random payloads survive byte-identically; malformed files fail loudly."""
    rng = np.random.default_rng(8)
    for i in range(1000):
        rows = int(rng.integers(1, 13))
        cols = int(rng.integers(1, 25))
        matrix = rng.normal(size=(rows, cols)).astype(np.float32)
        data = vbnf_bytes(matrix)
        parsed = parse_vbnf(data)
        assert vbnf_bytes(parsed) == data
        if i % 100 == 0:
            path = tmp_path / f"m{i}.vbnf"
            write_vbnf(path, matrix)
            assert path.read_bytes() == data
            assert vbnf_bytes(read_vbnf(path)) == data

    matrix = np.ones((2, 3), dtype=np.float32)
    good = vbnf_bytes(matrix)

    with pytest.raises(BadMagic):
        parse_vbnf(b"XXXX" + good[4:])
    with pytest.raises(VersionUnsupported):
        parse_vbnf(good[:4] + struct.pack("<I", 9) + good[8:])
    with pytest.raises(TruncatedPayload):
        parse_vbnf(good[:-4])
    with pytest.raises(TrailingBytes):
        parse_vbnf(good + b"\x00\x00\x00\x00")
    bad = bytearray(good)
    bad[16:20] = struct.pack("<f", float("nan"))
    with pytest.raises(NonFiniteValue):
        parse_vbnf(bytes(bad))
