"""Prompt suites: the JSON-lines records that drive an evaluation run.

Each line is one PromptRecord. A record always names the dimension it was
authored for; records in a per-category suite additionally carry one of
the eight content categories, so category tables group by
(category, dimension) without any schema change.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .core import normalize_label
from .dimensions import CATEGORIES, DIMENSIONS, RELATION_KINDS, spec_for
from .errors import (
    DuplicatePromptId,
    MissingCategory,
    MissingLabel,
    SchemaViolation,
    TooFewTargets,
    UnknownCategory,
    UnknownDimension,
)

LABEL_KEYS = (
    "object",
    "objects",
    "color",
    "relation",
    "scene_words",
    "style_text",
    "action",
)


@dataclass(frozen=True)
class PromptRecord:
    """One prompt plus the semantic labels its dimension's scorer needs."""

    prompt_id: str
    text: str
    dimension_tag: str
    labels: dict = field(default_factory=dict)
    category: str | None = None

    def __post_init__(self):
        if not self.prompt_id:
            raise SchemaViolation("prompt_id must be non-empty")
        if not self.text:
            raise SchemaViolation(f"{self.prompt_id}: prompt text must be non-empty")
        if self.dimension_tag not in DIMENSIONS:
            raise UnknownDimension(
                f"{self.prompt_id}: unknown dimension {self.dimension_tag!r}"
            )
        if self.category is not None and self.category not in CATEGORIES:
            raise UnknownCategory(
                f"{self.prompt_id}: unknown category {self.category!r}"
            )
        object.__setattr__(self, "labels", _check_labels(self))


def _check_labels(record: PromptRecord) -> dict:
    """Validate and canonicalize a record's label map."""
    labels = record.labels
    if not isinstance(labels, dict):
        raise SchemaViolation(f"{record.prompt_id}: labels must be an object")
    unknown = set(labels) - set(LABEL_KEYS)
    if unknown:
        raise SchemaViolation(
            f"{record.prompt_id}: unknown label keys {sorted(unknown)}"
        )
    for key in spec_for(record.dimension_tag).required_labels:
        if key not in labels:
            raise MissingLabel(
                f"{record.prompt_id}: dimension {record.dimension_tag!r} "
                f"requires label {key!r}"
            )

    out: dict = {}
    for key, value in labels.items():
        if key in ("object", "color", "action"):
            if not isinstance(value, str) or not value.strip():
                raise SchemaViolation(f"{record.prompt_id}: {key} must be a word")
            out[key] = normalize_label(value)
        elif key == "style_text":
            if not isinstance(value, str) or not value.strip():
                raise SchemaViolation(f"{record.prompt_id}: style_text must be text")
            out[key] = value
        elif key == "objects":
            if not isinstance(value, list) or not all(
                isinstance(v, str) and v.strip() for v in value
            ):
                raise SchemaViolation(f"{record.prompt_id}: objects must be words")
            if len(value) < 2:
                raise TooFewTargets(
                    f"{record.prompt_id}: objects needs at least 2 entries"
                )
            out[key] = [normalize_label(v) for v in value]
        elif key == "scene_words":
            if (
                not isinstance(value, list)
                or not value
                or not all(isinstance(v, str) and v.strip() for v in value)
            ):
                raise SchemaViolation(
                    f"{record.prompt_id}: scene_words must be a non-empty word list"
                )
            out[key] = [normalize_label(v) for v in value]
        elif key == "relation":
            if not isinstance(value, dict) or set(value) != {"a", "b", "kind"}:
                raise SchemaViolation(
                    f"{record.prompt_id}: relation must have keys a, b, kind"
                )
            a = value["a"]
            b = value["b"]
            kind = value["kind"]
            if not all(isinstance(v, str) and v.strip() for v in (a, b, kind)):
                raise SchemaViolation(f"{record.prompt_id}: relation fields invalid")
            if kind not in RELATION_KINDS:
                raise SchemaViolation(
                    f"{record.prompt_id}: relation kind {kind!r} not one of "
                    f"{RELATION_KINDS}"
                )
            a, b = normalize_label(a), normalize_label(b)
            if a == b:
                raise SchemaViolation(
                    f"{record.prompt_id}: relation objects must differ"
                )
            out[key] = {"a": a, "b": b, "kind": kind}
    return out


def loads_suite(text: str, where: str = "<string>") -> list[PromptRecord]:
    records: list[PromptRecord] = []
    seen: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaViolation(f"{where}:{lineno}: bad JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise SchemaViolation(f"{where}:{lineno}: record must be an object")
        unknown = set(doc) - {
            "prompt_id",
            "text",
            "dimension_tag",
            "labels",
            "category",
        }
        if unknown:
            raise SchemaViolation(
                f"{where}:{lineno}: unknown record keys {sorted(unknown)}"
            )
        for key in ("prompt_id", "text", "dimension_tag"):
            if key not in doc or not isinstance(doc[key], str):
                raise SchemaViolation(f"{where}:{lineno}: missing or bad {key!r}")
        record = PromptRecord(
            prompt_id=doc["prompt_id"],
            text=doc["text"],
            dimension_tag=doc["dimension_tag"],
            labels=doc.get("labels", {}),
            category=doc.get("category"),
        )
        if record.prompt_id in seen:
            raise DuplicatePromptId(
                f"{where}:{lineno}: duplicate prompt_id {record.prompt_id!r}"
            )
        seen.add(record.prompt_id)
        records.append(record)
    return records


def load_suite(path: str | Path) -> list[PromptRecord]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise SchemaViolation(f"cannot read suite {path}: {exc}") from exc
    return loads_suite(text, where=str(path))


def serialize(records: list[PromptRecord]) -> str:
    """Render records back to JSON lines; inverse of loads_suite."""
    lines = []
    for r in records:
        doc: dict = {
            "prompt_id": r.prompt_id,
            "text": r.text,
            "dimension_tag": r.dimension_tag,
        }
        if r.labels:
            doc["labels"] = r.labels
        if r.category is not None:
            doc["category"] = r.category
        lines.append(json.dumps(doc, ensure_ascii=False))
    return "\n".join(lines) + ("\n" if lines else "")


def save_suite(path: str | Path, records: list[PromptRecord]) -> None:
    Path(path).write_text(serialize(records), encoding="utf-8")


def category_partition(
    records: list[PromptRecord],
) -> dict[str, list[PromptRecord]]:
    """Bucket per-category records by category; total and disjoint."""
    buckets: dict[str, list[PromptRecord]] = {}
    for r in records:
        if r.category is None:
            raise MissingCategory(f"{r.prompt_id}: record has no category")
        buckets.setdefault(r.category, []).append(r)
    return buckets
