"""Report assembly and export: canonical JSON, delimited CSV, radar figures.

Exports are deterministic: the same report produces byte-identical files
on every run and across worker counts. Machine-facing outputs carry
percentages rounded to exactly four decimals; figure text uses two, the
way result tables are usually typeset.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from .baselines import BaselineRow
from .dimensions import CATEGORIES, DIMENSIONS
from .errors import (
    SchemaViolation,
    TooFewModels,
    UnknownCategory,
    UnsupportedFormat,
)

ENGINE_NAME = "vgrade"
ENGINE_VERSION = "0.1.0"

RADAR_BANDS = {"band_03_08": (0.3, 0.8), "band_00_10": (0.0, 1.0)}

_SVG_RC = {
    "svg.hashsalt": "vgrade",
    "svg.fonttype": "none",
    "font.family": "sans-serif",
}


def percent(value: float) -> float:
    """Canonical 4-decimal percent used by every machine-facing export."""
    return round(value * 100.0, 4)


@dataclass(frozen=True)
class PerVideoScore:
    """One video's score for one dimension, with its suite coordinates."""

    video_id: str
    prompt_id: str
    group_index: int | None
    score: float


@dataclass(frozen=True)
class ModelReport:
    """Everything one model's evaluation run produced."""

    model_id: str
    dimension_scores: dict
    category_scores: dict  # (category, dimension) -> score
    baselines: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    per_video: dict = field(default_factory=dict)  # dim -> list[PerVideoScore]
    skipped: dict = field(default_factory=dict)  # dim -> reason

    def __post_init__(self):
        for tag, score in self.dimension_scores.items():
            if tag not in DIMENSIONS:
                raise SchemaViolation(f"unknown dimension {tag!r}")
            if not 0.0 <= score <= 1.0:
                raise SchemaViolation(f"{tag}: score {score} outside [0, 1]")
        for (category, tag), score in self.category_scores.items():
            if category not in CATEGORIES:
                raise UnknownCategory(f"unknown category {category!r}")
            if tag not in DIMENSIONS:
                raise SchemaViolation(f"unknown dimension {tag!r}")
            if not 0.0 <= score <= 1.0:
                raise SchemaViolation(
                    f"{category}/{tag}: score {score} outside [0, 1]"
                )
        declared = set(self.metadata.get("selected_dimensions", ()))
        covered = set(self.dimension_scores) | set(self.skipped)
        missing = declared - covered
        if missing:
            raise SchemaViolation(
                f"dimensions neither scored nor skipped: {sorted(missing)}"
            )


def radar_normalize(values: dict, mode: str = "band_03_08") -> dict:
    """Linearly map the models' values onto the radar band for one axis.

    The best model lands on the band's top, the worst on its bottom, and
    a degenerate all-equal axis maps everyone to the top.
    """
    if mode not in RADAR_BANDS:
        raise UnsupportedFormat(f"unknown radar mode {mode!r}")
    if len(values) < 2:
        raise TooFewModels(f"radar normalization needs >= 2 models, "
                           f"have {len(values)}")
    lo, hi = RADAR_BANDS[mode]
    vmin = min(values.values())
    vmax = max(values.values())
    if vmax == vmin:
        return {m: hi for m in values}
    return {
        m: lo + (hi - lo) * (v - vmin) / (vmax - vmin) for m, v in values.items()
    }


@dataclass(frozen=True)
class CategoryTable:
    """Rows = categories, columns = dimensions, in canonical order."""

    rows: tuple
    columns: tuple
    cells: dict  # (category, dimension) -> score


def per_category_table(scores: dict) -> CategoryTable:
    for category, tag in scores:
        if category not in CATEGORIES:
            raise UnknownCategory(f"unknown category {category!r}")
        if tag not in DIMENSIONS:
            raise SchemaViolation(f"unknown dimension {tag!r}")
    rows = tuple(c for c in CATEGORIES if any(k[0] == c for k in scores))
    columns = tuple(d for d in DIMENSIONS if any(k[1] == d for k in scores))
    return CategoryTable(rows, columns, dict(scores))


# ---------------------------------------------------------------------------
# JSON


def report_document(report: ModelReport) -> dict:
    """The canonical JSON document for one report."""
    per_video = {
        tag: {
            entry.video_id: {
                "prompt_id": entry.prompt_id,
                "group_index": entry.group_index,
                "score_percent": percent(entry.score),
            }
            for entry in entries
        }
        for tag, entries in report.per_video.items()
    }
    categories: dict = {}
    for (category, tag), score in report.category_scores.items():
        categories.setdefault(category, {})[tag] = percent(score)
    return {
        "model_id": report.model_id,
        "dimensions": {
            tag: percent(score) for tag, score in report.dimension_scores.items()
        },
        "categories": categories,
        "baselines": [
            {
                "kind": row.kind,
                "scores": {tag: percent(s) for tag, s in row.scores.items()},
                "provenance": dict(sorted(row.provenance.items())),
            }
            for row in report.baselines
        ],
        "per_video": per_video,
        "skipped": dict(sorted(report.skipped.items())),
        "metadata": report.metadata,
    }


def canonical_json_bytes(doc: dict) -> bytes:
    """Sorted keys, two-space indent, UTF-8, trailing newline."""
    text = json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False)
    return (text + "\n").encode("utf-8")


def export_json(report: ModelReport) -> bytes:
    doc = report_document(report)
    doc["engine"] = {"name": ENGINE_NAME, "version": ENGINE_VERSION}
    return canonical_json_bytes(doc)


def parse_report(data: bytes) -> dict:
    return json.loads(data.decode("utf-8"))


# ---------------------------------------------------------------------------
# CSV


CSV_HEADER = ("row_kind", "model_id", "category", "dimension", "score_percent")


def export_csv(report: ModelReport) -> bytes:
    """Long-format rows: overall scores, then categories, then baselines."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for tag in DIMENSIONS:
        if tag in report.dimension_scores:
            writer.writerow(
                (
                    "model",
                    report.model_id,
                    "",
                    tag,
                    f"{percent(report.dimension_scores[tag]):.4f}",
                )
            )
    for category in CATEGORIES:
        for tag in DIMENSIONS:
            score = report.category_scores.get((category, tag))
            if score is not None:
                writer.writerow(
                    ("category", report.model_id, category, tag,
                     f"{percent(score):.4f}")
                )
    for row in report.baselines:
        for tag in DIMENSIONS:
            if tag in row.scores:
                writer.writerow(
                    ("baseline", row.kind, "", tag, f"{percent(row.scores[tag]):.4f}")
                )
    return buffer.getvalue().encode("utf-8")


def export_run_csv(reports: list) -> bytes:
    """One CSV for a whole run: every model's rows, models in sorted order."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for report in sorted(reports, key=lambda r: r.model_id):
        body = export_csv(report).decode("utf-8").splitlines()[1:]
        for line in body:
            buffer.write(line + "\n")
    return buffer.getvalue().encode("utf-8")


def parse_csv(data: bytes) -> list[dict]:
    reader = csv.DictReader(io.StringIO(data.decode("utf-8")))
    return [dict(row) for row in reader]


# ---------------------------------------------------------------------------
# Figures


def _closed(values: list[float]) -> list[float]:
    return values + values[:1]


def radar_svg(
    rows: dict,
    mode: str = "band_03_08",
    title: str = "",
) -> bytes:
    """Self-contained SVG radar with one polygon per row (model).

    ``rows`` maps row name -> {dimension -> score in [0, 1]}. Axes are the
    union of dimensions present, in canonical order; each axis is
    normalized across rows onto the chosen band.
    """
    if not rows:
        raise TooFewModels("radar needs at least one row")
    axes = [d for d in DIMENSIONS if any(d in scores for scores in rows.values())]
    if not axes:
        raise SchemaViolation("radar rows carry no dimensions")

    normalized: dict = {name: {} for name in rows}
    for axis in axes:
        values = {
            name: scores[axis] for name, scores in rows.items() if axis in scores
        }
        if len(values) >= 2:
            mapped = radar_normalize(values, mode)
        else:
            mapped = dict(values)
        for name, v in mapped.items():
            normalized[name][axis] = v

    angles = np.linspace(0.0, 2.0 * np.pi, len(axes), endpoint=False).tolist()
    fig = Figure(figsize=(8.0, 8.0))
    ax = fig.add_subplot(projection="polar")
    ax.set_theta_offset(np.pi / 2.0)
    ax.set_theta_direction(-1)
    ax.set_ylim(0.0, 1.0)
    ax.set_yticks([0.2, 0.4, 0.6, 0.8, 1.0])
    ax.set_yticklabels([f"{t:.1f}" for t in (0.2, 0.4, 0.6, 0.8, 1.0)], fontsize=7)
    ax.set_xticks(angles)
    ax.set_xticklabels([a.replace("_", " ") for a in axes], fontsize=8)

    for name in sorted(rows):
        series = normalized[name]
        values = [series.get(axis, 0.0) for axis in axes]
        line = ax.plot(
            _closed(angles), _closed(values), linewidth=1.5, label=name
        )[0]
        line.set_gid(f"radar-line-{name}")
        poly = ax.fill(_closed(angles), _closed(values), alpha=0.12)[0]
        poly.set_gid(f"radar-fill-{name}")
    ax.legend(loc="upper right", bbox_to_anchor=(1.25, 1.1), fontsize=8)
    if title:
        ax.set_title(title, fontsize=11)

    buffer = io.BytesIO()
    with matplotlib.rc_context(_SVG_RC):
        fig.savefig(buffer, format="svg", metadata={"Date": None})
    return buffer.getvalue()


def score_bars_png(rows: dict, title: str = "") -> bytes:
    """Grouped per-dimension bar chart (percent scale) for the same rows."""
    if not rows:
        raise TooFewModels("bar chart needs at least one row")
    axes = [d for d in DIMENSIONS if any(d in scores for scores in rows.values())]
    if not axes:
        raise SchemaViolation("bar chart rows carry no dimensions")
    names = sorted(rows)
    fig = Figure(figsize=(max(8.0, 0.8 * len(axes)), 5.0))
    ax = fig.add_subplot()
    width = 0.8 / len(names)
    base = np.arange(len(axes), dtype=np.float64)
    for i, name in enumerate(names):
        values = [percent(rows[name].get(axis, 0.0)) for axis in axes]
        offset = (i - (len(names) - 1) / 2.0) * width
        bars = ax.bar(base + offset, values, width=width, label=name)
        for patch in bars:
            patch.set_gid(f"bars-{name}")
    ax.set_xticks(base)
    ax.set_xticklabels(
        [a.replace("_", " ") for a in axes], rotation=45, ha="right", fontsize=8
    )
    ax.set_ylabel("score (%)")
    ax.set_ylim(0.0, 100.0)
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title, fontsize=11)
    fig.subplots_adjust(bottom=0.3)
    buffer = io.BytesIO()
    fig.savefig(
        buffer, format="png", dpi=100, metadata={"Software": ENGINE_NAME}
    )
    return buffer.getvalue()


def export(report: ModelReport, format: str) -> bytes:
    """Render one report to the named format."""
    if format == "json":
        return export_json(report)
    if format == "csv":
        return export_csv(report)
    if format == "svg_radar":
        rows = {report.model_id: dict(report.dimension_scores)}
        for row in report.baselines:
            rows[row.kind] = {
                tag: row.scores[tag]
                for tag in report.dimension_scores
                if tag in row.scores
            }
        return radar_svg(rows, title=report.model_id)
    raise UnsupportedFormat(f"unknown export format {format!r}")
