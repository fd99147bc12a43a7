"""Pairwise preference protocol: schedules, win ratios, and correlation.

Human preferences arrive as JSON-lines annotations over unordered model
pairs; the engine's own per-video scores can be replayed through the same
pairing rule. Win ratio = (wins + 0.5 * ties) / comparisons participated,
so a complete round-robin always distributes M/2 total ratio mass among M
models.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from .dimensions import DIMENSIONS
from .errors import (
    CoverageMismatch,
    DegenerateInput,
    DuplicateAnnotation,
    EmptyInput,
    LengthMismatch,
    SchemaViolation,
    TooFewModels,
    UnknownDimension,
)

VERDICTS = ("x_better", "y_better", "tie")
SCORE_TIE_EPS = 1e-9


@dataclass(frozen=True)
class PreferenceAnnotation:
    """One human judgment on an unordered pair of models for one video slot."""

    prompt_id: str
    group_index: int
    model_x: str
    model_y: str
    dimension_tag: str
    verdict: str

    def __post_init__(self):
        if not self.prompt_id:
            raise SchemaViolation("annotation prompt_id must be non-empty")
        if self.group_index < 0:
            raise SchemaViolation(f"{self.prompt_id}: negative group_index")
        if not self.model_x or not self.model_y or self.model_x == self.model_y:
            raise SchemaViolation(
                f"{self.prompt_id}: pair must name two distinct models"
            )
        if self.dimension_tag not in DIMENSIONS:
            raise UnknownDimension(
                f"{self.prompt_id}: unknown dimension {self.dimension_tag!r}"
            )
        if self.verdict not in VERDICTS:
            raise SchemaViolation(f"{self.prompt_id}: bad verdict {self.verdict!r}")

    @property
    def slot_key(self) -> tuple:
        return (
            self.prompt_id,
            self.group_index,
            frozenset((self.model_x, self.model_y)),
            self.dimension_tag,
        )


@dataclass(frozen=True)
class ComparisonSlot:
    """One scheduled comparison with its randomized presentation order."""

    prompt_id: str
    group_index: int
    left_model: str
    right_model: str


@dataclass(frozen=True)
class PairSchedule:
    """All slots of a study plus the seed that fixed presentation order."""

    seed: int
    groups_per_prompt: int
    slots: tuple


@dataclass(frozen=True)
class WinRatioTable:
    """Win ratio and participation count per model for one dimension."""

    dimension_tag: str
    ratios: dict
    comparisons: dict

    def __post_init__(self):
        if set(self.ratios) != set(self.comparisons):
            raise SchemaViolation(
                f"{self.dimension_tag}: ratio/comparison keys differ"
            )
        for model, ratio in self.ratios.items():
            if not 0.0 <= ratio <= 1.0:
                raise SchemaViolation(
                    f"{self.dimension_tag}: ratio {ratio} for {model} outside [0, 1]"
                )
            if self.comparisons[model] < 1:
                raise SchemaViolation(
                    f"{self.dimension_tag}: {model} has no comparisons"
                )


def pair_schedule(
    prompt_ids: list[str],
    models: list[str],
    groups_per_prompt: int = 5,
    seed: int = 0,
) -> PairSchedule:
    """Emit every unordered pair for every (prompt, group) slot.

    Presentation order within each pair is randomized by ``seed`` and
    recorded so a study can be reproduced exactly. Total slot count is
    len(prompts) * groups_per_prompt * C(len(models), 2).
    """
    if len(set(models)) != len(models):
        raise SchemaViolation("duplicate model ids")
    if len(models) < 2:
        raise TooFewModels(f"need >= 2 models, have {len(models)}")
    if groups_per_prompt < 1:
        raise SchemaViolation("groups_per_prompt must be >= 1")
    rng = np.random.default_rng(seed)
    slots = []
    for prompt_id in prompt_ids:
        for group in range(groups_per_prompt):
            for a, b in combinations(models, 2):
                if rng.integers(2):
                    a, b = b, a
                slots.append(ComparisonSlot(prompt_id, group, a, b))
    return PairSchedule(seed, groups_per_prompt, tuple(slots))


def _table_from_outcomes(
    dimension_tag: str, outcomes: list[tuple[str, str, str]]
) -> WinRatioTable:
    """Fold (model_x, model_y, verdict) outcomes into a WinRatioTable."""
    score: dict = {}
    count: dict = {}
    for model_x, model_y, verdict in outcomes:
        for model in (model_x, model_y):
            score.setdefault(model, 0.0)
            count[model] = count.get(model, 0) + 1
        if verdict == "tie":
            score[model_x] += 0.5
            score[model_y] += 0.5
        elif verdict == "x_better":
            score[model_x] += 1.0
        else:
            score[model_y] += 1.0
    ratios = {m: score[m] / count[m] for m in sorted(score)}
    comparisons = {m: count[m] for m in sorted(count)}
    return WinRatioTable(dimension_tag, ratios, comparisons)


def human_win_ratio(annotations: list[PreferenceAnnotation]) -> WinRatioTable:
    """Win ratios from human annotations of one dimension."""
    if not annotations:
        raise EmptyInput("no annotations")
    dimension = annotations[0].dimension_tag
    seen = set()
    for ann in annotations:
        if ann.dimension_tag != dimension:
            raise SchemaViolation(
                f"annotations mix dimensions {dimension!r} and "
                f"{ann.dimension_tag!r}"
            )
        if ann.slot_key in seen:
            raise DuplicateAnnotation(
                f"duplicate annotation for {ann.prompt_id} group "
                f"{ann.group_index} pair {sorted((ann.model_x, ann.model_y))}"
            )
        seen.add(ann.slot_key)
    return _table_from_outcomes(
        dimension, [(a.model_x, a.model_y, a.verdict) for a in annotations]
    )


def vbench_win_ratio(
    per_video_scores: dict, dimension_tag: str
) -> WinRatioTable:
    """Win ratios by replaying the pairing rule over engine scores.

    ``per_video_scores`` maps model_id -> {(prompt_id, group_index): score}.
    Every model must cover the same slots; scores within 1e-9 tie.
    """
    if len(per_video_scores) < 2:
        raise TooFewModels(f"need >= 2 models, have {len(per_video_scores)}")
    models = sorted(per_video_scores)
    coverage = {m: set(per_video_scores[m]) for m in models}
    reference = coverage[models[0]]
    if not reference:
        raise EmptyInput("no scored slots")
    for m in models[1:]:
        if coverage[m] != reference:
            missing = reference ^ coverage[m]
            raise CoverageMismatch(
                f"{m} covers different slots than {models[0]} "
                f"({len(missing)} differing)"
            )
    outcomes = []
    for slot in sorted(reference):
        for a, b in combinations(models, 2):
            sa, sb = per_video_scores[a][slot], per_video_scores[b][slot]
            if abs(sa - sb) <= SCORE_TIE_EPS:
                outcomes.append((a, b, "tie"))
            elif sa > sb:
                outcomes.append((a, b, "x_better"))
            else:
                outcomes.append((a, b, "y_better"))
    return _table_from_outcomes(dimension_tag, outcomes)


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing their average rank."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    dx = x - x.mean()
    dy = y - y.mean()
    vx = float(np.dot(dx, dx))
    vy = float(np.dot(dy, dy))
    if vx == 0.0 or vy == 0.0:
        raise DegenerateInput("zero variance input")
    r = float(np.dot(dx, dy)) / float(np.sqrt(vx * vy))
    return min(1.0, max(-1.0, r))


def rank_correlation(x, y, method: str = "spearman") -> float:
    """Spearman (average ranks) or Pearson correlation of two vectors."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or len(x) != len(y):
        raise LengthMismatch(f"vectors differ in shape: {x.shape} vs {y.shape}")
    if len(x) < 2:
        raise LengthMismatch(f"need >= 2 points, have {len(x)}")
    if method == "pearson":
        return _pearson(x, y)
    if method == "spearman":
        return _pearson(_average_ranks(x), _average_ranks(y))
    raise SchemaViolation(f"unknown correlation method {method!r}")


# ---------------------------------------------------------------------------
# Annotation file IO (JSON lines)


def loads_annotations(text: str, where: str = "<string>") -> list[PreferenceAnnotation]:
    annotations = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaViolation(f"{where}:{lineno}: bad JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise SchemaViolation(f"{where}:{lineno}: annotation must be an object")
        expected = {
            "prompt_id",
            "group_index",
            "model_x",
            "model_y",
            "dimension_tag",
            "verdict",
        }
        if set(doc) != expected:
            raise SchemaViolation(
                f"{where}:{lineno}: annotation keys must be {sorted(expected)}"
            )
        if not isinstance(doc["group_index"], int) or isinstance(
            doc["group_index"], bool
        ):
            raise SchemaViolation(f"{where}:{lineno}: group_index must be an int")
        for key in expected - {"group_index"}:
            if not isinstance(doc[key], str):
                raise SchemaViolation(f"{where}:{lineno}: {key} must be a string")
        annotations.append(PreferenceAnnotation(**doc))
    return annotations


def load_annotations(path: str | Path) -> list[PreferenceAnnotation]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise SchemaViolation(f"cannot read annotations {path}: {exc}") from exc
    return loads_annotations(text, where=str(path))


def save_annotations(
    path: str | Path, annotations: list[PreferenceAnnotation]
) -> None:
    lines = [
        json.dumps(
            {
                "prompt_id": a.prompt_id,
                "group_index": a.group_index,
                "model_x": a.model_x,
                "model_y": a.model_y,
                "dimension_tag": a.dimension_tag,
                "verdict": a.verdict,
            },
            ensure_ascii=False,
        )
        for a in annotations
    ]
    Path(path).write_text(
        "\n".join(lines) + ("\n" if lines else ""), encoding="utf-8"
    )
