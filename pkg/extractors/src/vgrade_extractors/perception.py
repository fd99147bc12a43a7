"""Reference perception backends: predictors, detections, captions, actions.

These substitute deterministic image statistics for the learned models
while keeping every output inside the ranges and schemas the evaluation
engine enforces: aesthetic scores in [0, 10], imaging scores in [0, 100],
detections with in-bounds non-degenerate boxes and confidences in [0, 1],
one caption per frame, and at most five non-increasing action logits.

The detector is a color-blob finder: callers name the objects they expect
as (color, label) pairs and each sufficiently large saturated region in
that color band becomes one detection with a dense caption.
"""

from __future__ import annotations

import numpy as np
from PIL import Image

from .errors import MissingArgument, TooFewFrames
from .features import grayscale

# PIL HSV hue runs 0..255. Bands are inclusive (lo, hi) segments.
COLOR_BANDS: dict[str, tuple[tuple[int, int], ...]] = {
    "red": ((0, 10), (246, 255)),
    "yellow": ((25, 49),),
    "green": ((60, 110),),
    "blue": ((150, 195),),
}

_MIN_BLOB_PIXELS = 12
_MIN_SATURATION = 96
_MIN_VALUE = 64


def aesthetic_scores(frames) -> list[float]:
    """Colorfulness per frame, squashed into [0, 10)."""
    scores = []
    for frame in frames:
        frame = np.asarray(frame, dtype=np.float64)
        rg = frame[..., 0] - frame[..., 1]
        yb = 0.5 * (frame[..., 0] + frame[..., 1]) - frame[..., 2]
        spread = np.hypot(rg.std(), yb.std())
        shift = np.hypot(rg.mean(), yb.mean())
        colorfulness = spread + 0.3 * shift
        scores.append(10.0 * (1.0 - np.exp(-colorfulness / 40.0)))
    return scores


def imaging_scores(frames) -> list[float]:
    """Gradient-energy sharpness per frame, squashed into [0, 100)."""
    scores = []
    for frame in frames:
        gray = grayscale(frame) * 255.0
        energy = np.abs(np.diff(gray, axis=0)).mean() + np.abs(
            np.diff(gray, axis=1)
        ).mean()
        scores.append(100.0 * (1.0 - np.exp(-energy / 8.0)))
    return scores


def parse_object_spec(spec: str) -> list[tuple[str, str]]:
    """Parse "red=cat,blue=dog" into [(color, label), ...]."""
    pairs = []
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        color, _, label = part.partition("=")
        color = color.strip().lower()
        label = label.strip().lower()
        if color not in COLOR_BANDS:
            raise MissingArgument(
                f"unknown color {color!r}; expected one of {sorted(COLOR_BANDS)}"
            )
        if not label:
            raise MissingArgument(f"object spec {part!r} needs color=label")
        pairs.append((color, label))
    if not pairs:
        raise MissingArgument("object spec is empty")
    return pairs


def _color_mask(hsv: np.ndarray, color: str) -> np.ndarray:
    hue = hsv[..., 0].astype(np.int32)
    in_band = np.zeros(hue.shape, dtype=bool)
    for lo, hi in COLOR_BANDS[color]:
        in_band |= (hue >= lo) & (hue <= hi)
    return (
        in_band
        & (hsv[..., 1] >= _MIN_SATURATION)
        & (hsv[..., 2] >= _MIN_VALUE)
    )


def detect_objects(frame: np.ndarray, objects: list[tuple[str, str]]) -> list[dict]:
    """Find one detection per requested (color, label) present in the frame."""
    hsv = np.asarray(
        Image.fromarray(np.asarray(frame, dtype=np.uint8), "RGB").convert("HSV")
    )
    detections = []
    for color, label in objects:
        mask = _color_mask(hsv, color)
        count = int(mask.sum())
        if count < _MIN_BLOB_PIXELS:
            continue
        ys, xs = np.nonzero(mask)
        x0, y0 = int(xs.min()), int(ys.min())
        x1, y1 = int(xs.max()) + 1, int(ys.max()) + 1
        density = count / ((x1 - x0) * (y1 - y0))
        detections.append(
            {
                "label": label,
                "score": float(min(1.0, max(0.05, density))),
                "bbox": [float(x0), float(y0), float(x1), float(y1)],
                "caption": f"a {color} {label}",
            }
        )
    return detections


def detection_track(frames, objects: list[tuple[str, str]]) -> list[list[dict]]:
    return [detect_objects(frame, objects) for frame in frames]


def _background_word(frame: np.ndarray) -> str:
    gray = grayscale(frame)
    border = np.concatenate(
        [gray[0, :], gray[-1, :], gray[:, 0], gray[:, -1]]
    )
    level = float(border.mean())
    if level < 0.25:
        return "dark"
    if level < 0.6:
        return "gray"
    return "bright"


def caption_frames(frames, objects: list[tuple[str, str]] | None) -> list[str]:
    """One deterministic scene caption per frame."""
    captions = []
    for frame in frames:
        background = _background_word(frame)
        found = detect_objects(frame, objects) if objects else []
        if found:
            subjects = " and ".join(d["caption"] for d in found)
            captions.append(f"{subjects} in a {background} scene")
        else:
            captions.append(f"an empty {background} scene")
    return captions


def action_logits(frames, actions: list[str]) -> list[tuple[str, float]]:
    """Rank candidate actions by motion energy: at most five entries.

    The first listed action receives a confidence that grows with the
    mean top-5% temporal intensity difference; the rest decay
    geometrically, so the sequence is strictly decreasing and every
    logit stays inside [0, 1].
    """
    if len(frames) < 2:
        raise TooFewFrames("action recognition needs at least two frames")
    if not actions:
        raise MissingArgument("action recognition needs candidate actions")
    if len(actions) > 5:
        raise MissingArgument("at most 5 candidate actions are supported")

    previous = grayscale(frames[0])
    stats = []
    for frame in frames[1:]:
        current = grayscale(frame)
        diff = np.abs(current - previous).ravel() * 255.0
        keep = max(1, int(np.ceil(0.05 * diff.size)))
        top = np.partition(diff, diff.size - keep)[diff.size - keep :]
        stats.append(top.mean())
        previous = current
    energy = float(np.mean(stats))
    confidence = energy / (energy + 4.0)

    n = len(actions)
    entries = []
    for i, action in enumerate(actions):
        logit = min(1.0, confidence * 0.55**i + 1e-8 * (n - i))
        entries.append((action, logit))
    return entries
