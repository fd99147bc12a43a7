"""Reference motion backends: flow-magnitude grids and frame interpolation.

The flow backend approximates per-pixel motion with absolute temporal
intensity differences pooled to a coarse grid — zero for a static scene,
growing with the amount of change — which is all the downstream motion
statistics need. The interpolation backend reconstructs the odd frames
of a video as midpoints of the retained even frames; a T-frame video
drops frames 1, 3, ... T-2, so the reconstruction has one frame fewer
than the even subsequence.
"""

from __future__ import annotations

import numpy as np

from .errors import TooFewFrames
from .features import grayscale, pool

FLOW_GRID = (16, 16)


def flow_grids(frames, grid: tuple[int, int] = FLOW_GRID) -> np.ndarray:
    """Pooled absolute-difference magnitudes: (T-1, h, w), non-negative."""
    if len(frames) < 2:
        raise TooFewFrames("flow needs at least two frames")
    height, width = np.asarray(frames[0]).shape[:2]
    shape = (min(grid[0], height), min(grid[1], width))
    previous = grayscale(frames[0])
    grids = []
    for frame in frames[1:]:
        current = grayscale(frame)
        magnitude = np.abs(current - previous) * 255.0
        grids.append(np.maximum(pool(magnitude, shape), 0.0))
        previous = current
    return np.stack(grids).astype(np.float32)


def interpolate_reconstruction(even_frames) -> list[np.ndarray]:
    """Reconstruct the dropped odd frames as integer midpoints.

    Given the retained frames [f0, f2, f4, ...] this returns one frame
    per consecutive pair — len(even_frames) - 1 outputs. Fewer than two
    retained frames means there was nothing dropped to reconstruct.
    """
    if len(even_frames) < 2:
        raise TooFewFrames("interpolation needs at least two retained frames")
    mids = []
    for a, b in zip(even_frames, even_frames[1:]):
        total = a.astype(np.uint16) + b.astype(np.uint16)
        mids.append((total // 2).astype(np.uint8))
    return mids


def reconstruction_for_video(frames) -> list[np.ndarray]:
    """Drop the odd frames of a full video and reconstruct them."""
    return interpolate_reconstruction(list(frames)[::2])
