"""Reference embedding backends: deterministic stand-ins for the learned models.

Each function maps frames (or text) to the embedding matrix its artifact
carries. The geometry mirrors the real extractors — per-frame rows for
image embeddings, a single row for video and text embeddings, matching
dimensions within each family so cosine similarities are well-defined —
but the features themselves are cheap classical statistics. Every row is
unit-normalized before it is stored.

Embedding dimensions:

  dino        8x8 pooled grayscale + bias               -> 65
  clip_image  8-bin RGB histograms + channel means + bias -> 28
  text        hashed bag of words + bias                 -> 28
  viclip_video renormalized mean of clip_image rows      -> 28
"""

from __future__ import annotations

import hashlib
import re

import numpy as np
from PIL import Image

from .errors import TooFewFrames

DINO_GRID = (8, 8)
DINO_DIM = DINO_GRID[0] * DINO_GRID[1] + 1
CLIP_BINS = 8
CLIP_DIM = 3 * CLIP_BINS + 3 + 1
TEXT_DIM = CLIP_DIM

_TOKEN_RE = re.compile(r"[a-z0-9']+")


def grayscale(frame: np.ndarray) -> np.ndarray:
    """Rec. 601 luminance of an HxWx3 uint8 frame, scaled to [0, 1]."""
    rgb = np.asarray(frame, dtype=np.float64) / 255.0
    return rgb @ np.array([0.299, 0.587, 0.114])


def pool(grid: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Bilinearly resample a 2-D float array to (h, w)."""
    img = Image.fromarray(np.asarray(grid, dtype=np.float32), mode="F")
    h, w = shape
    return np.asarray(img.resize((w, h), Image.BILINEAR), dtype=np.float64)


def unit_rows(matrix: np.ndarray) -> np.ndarray:
    """Scale every row to unit length; rows here always carry a bias term."""
    matrix = np.asarray(matrix, dtype=np.float64)
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    return matrix / norms


def dino_embeddings(frames) -> np.ndarray:
    """One pooled-grayscale row per frame: T x 65."""
    if not frames:
        raise TooFewFrames("dino needs at least one frame")
    rows = []
    for frame in frames:
        cells = pool(grayscale(frame), DINO_GRID).ravel()
        rows.append(np.concatenate([cells, [1.0]]))
    return unit_rows(np.stack(rows))


def clip_image_embeddings(frames) -> np.ndarray:
    """One color-statistics row per frame: T x 28."""
    if not frames:
        raise TooFewFrames("clip_image needs at least one frame")
    rows = []
    for frame in frames:
        frame = np.asarray(frame, dtype=np.float64)
        pixels = frame.shape[0] * frame.shape[1]
        parts = []
        for channel in range(3):
            counts, _ = np.histogram(
                frame[..., channel], bins=CLIP_BINS, range=(0.0, 256.0)
            )
            parts.append(counts / pixels)
        parts.append(frame.mean(axis=(0, 1)) / 255.0)
        parts.append([1.0])
        rows.append(np.concatenate(parts))
    return unit_rows(np.stack(rows))


def text_embedding(text: str) -> np.ndarray:
    """A single hashed bag-of-words row: 1 x 28.

    Tokens are folded into the first 27 slots by their SHA-256 digest;
    the last slot is a constant bias, so even empty text embeds to a
    well-defined unit vector.
    """
    vec = np.zeros(TEXT_DIM, dtype=np.float64)
    for token in _TOKEN_RE.findall(text.lower()):
        digest = hashlib.sha256(token.encode("utf-8")).digest()
        slot = digest[0] % (TEXT_DIM - 1)
        sign = 1.0 if digest[1] % 2 == 0 else -1.0
        vec[slot] += sign
    vec[TEXT_DIM - 1] = 1.0
    return unit_rows(vec[np.newaxis, :])


def viclip_video_embedding(frames) -> np.ndarray:
    """The renormalized mean of the per-frame rows: 1 x 28."""
    rows = clip_image_embeddings(frames)
    return unit_rows(rows.mean(axis=0, keepdims=True))
