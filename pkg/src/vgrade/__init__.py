"""vgrade: multi-dimensional evaluation of generated videos.

The engine scores pre-extracted artifact bundles along 16 dimensions
(seven video-quality, nine condition-consistency), builds empirical
reference baselines, replays pairwise human-preference protocols, and
exports deterministic JSON/CSV/SVG reports.
"""

__version__ = "0.1.0"

from .core import (
    ActionLogits,
    Detection,
    DetectionTrack,
    FeatureTrack,
    FlowTrack,
    FrameSequence,
    ScalarTrack,
)
from .dimensions import CATEGORIES, DIMENSIONS
from .errors import InputError, VgradeError
from .quality import DimensionScore
from .reporting import ModelReport
from .run import RunConfig, score_run
from .suite import PromptRecord, load_suite

__all__ = [
    "ActionLogits",
    "CATEGORIES",
    "DIMENSIONS",
    "Detection",
    "DetectionTrack",
    "DimensionScore",
    "FeatureTrack",
    "FlowTrack",
    "FrameSequence",
    "InputError",
    "ModelReport",
    "PromptRecord",
    "RunConfig",
    "ScalarTrack",
    "VgradeError",
    "load_suite",
    "score_run",
    "__version__",
]
