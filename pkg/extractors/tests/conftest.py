"""Shared fixtures: tiny synthetic scenes rendered as frame directories.

Two 16-frame, 64x64 clips cover the corpus shapes the backends care
about: a moving scene (a red square drifting right past a static blue
square) and a fully static one. Rectangles are axis-aligned solid fills,
so detector boxes and motion statistics have exact expected values.
"""

from __future__ import annotations

import numpy as np
import pytest

from vgrade_extractors import bundle

SIZE = 64
FRAME_COUNT = 16
BACKGROUND = 120


def draw_rect(frame, x0, y0, w, h, rgb):
    frame[y0 : y0 + h, x0 : x0 + w] = rgb


def moving_scene_frames() -> list[np.ndarray]:
    """A red 16x16 square moving 1 px/frame, left of a static blue square."""
    frames = []
    for t in range(FRAME_COUNT):
        frame = np.full((SIZE, SIZE, 3), BACKGROUND, dtype=np.uint8)
        draw_rect(frame, 4 + t, 24, 16, 16, (255, 0, 0))
        draw_rect(frame, 44, 28, 12, 12, (0, 0, 255))
        frames.append(frame)
    return frames


def static_scene_frames() -> list[np.ndarray]:
    """The same two squares, not moving; every frame is identical."""
    frames = []
    for _ in range(FRAME_COUNT):
        frame = np.full((SIZE, SIZE, 3), BACKGROUND, dtype=np.uint8)
        draw_rect(frame, 8, 24, 16, 16, (255, 0, 0))
        draw_rect(frame, 44, 28, 12, 12, (0, 0, 255))
        frames.append(frame)
    return frames


@pytest.fixture(scope="session")
def moving_frames():
    return moving_scene_frames()


@pytest.fixture(scope="session")
def static_frames():
    return static_scene_frames()


@pytest.fixture(scope="session")
def moving_frames_dir(tmp_path_factory, moving_frames):
    directory = tmp_path_factory.mktemp("moving_frames")
    bundle.write_frames(directory, moving_frames)
    return directory


@pytest.fixture(scope="session")
def static_frames_dir(tmp_path_factory, static_frames):
    directory = tmp_path_factory.mktemp("static_frames")
    bundle.write_frames(directory, static_frames)
    return directory
