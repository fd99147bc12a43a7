import pytest

from vgrade import errors, reporting
from vgrade.baselines import BaselineRow
from vgrade.dimensions import DIMENSIONS
from vgrade.reporting import (
    CSV_HEADER,
    ModelReport,
    PerVideoScore,
    canonical_json_bytes,
    export,
    export_csv,
    export_json,
    export_run_csv,
    parse_csv,
    parse_report,
    per_category_table,
    percent,
    radar_normalize,
    radar_svg,
    report_document,
    score_bars_png,
)

import oracles


def _report(model_id="model_a", **overrides):
    kwargs = dict(
        model_id=model_id,
        dimension_scores={"subject_consistency": 0.91234567, "scene": 0.5},
        category_scores={("Animal", "scene"): 0.25},
        baselines=[
            BaselineRow(
                "empirical_max",
                {"subject_consistency": 1.0, "scene": 0.82},
                {"subject_consistency": "theoretical", "scene": "retrieved_max"},
            )
        ],
        metadata={"selected_dimensions": ["subject_consistency", "scene"]},
        per_video={
            "scene": [PerVideoScore("v1", "p1", 0, 0.5)],
        },
        skipped={},
    )
    kwargs.update(overrides)
    return ModelReport(**kwargs)


# ---------------------------------------------------------------------------
# percent / normalization


def test_percent_rounding():
    assert percent(0.123456789) == 12.3457
    assert percent(1.0) == 100.0
    assert percent(0.5) == 50.0
    for v in (0.0, 0.33333333, 0.87654321):
        assert percent(v) == oracles.percent(v)


def test_radar_normalize_worked_example():
    values = {
        "LaVie": 91.41,
        "ModelScope": 89.87,
        "VideoCrafter": 86.24,
        "CogVideo": 92.19,
    }
    mapped = radar_normalize(values, mode="band_03_08")
    assert mapped["CogVideo"] == pytest.approx(0.8)
    assert mapped["VideoCrafter"] == pytest.approx(0.3)
    assert mapped["LaVie"] == pytest.approx(0.7345, abs=5e-4)
    want = 0.3 + 0.5 * (91.41 - 86.24) / (92.19 - 86.24)
    assert mapped["LaVie"] == pytest.approx(want, abs=1e-12)
    assert mapped["ModelScope"] == pytest.approx(
        0.3 + 0.5 * oracles.radar_normalize(89.87, 86.24, 92.19), abs=1e-12
    )


def test_radar_normalize_preserves_order(rng):
    for _ in range(50):
        values = {f"m{i}": float(rng.random()) for i in range(5)}
        mapped = radar_normalize(values)
        order = sorted(values, key=values.get)
        assert sorted(order, key=mapped.get) == order
        vmin, vmax = min(values.values()), max(values.values())
        for name, v in values.items():
            want = 0.3 + 0.5 * (v - vmin) / (vmax - vmin)
            assert mapped[name] == pytest.approx(want, abs=1e-12)


def test_radar_normalize_degenerate_axis():
    mapped = radar_normalize({"a": 0.6, "b": 0.6}, mode="band_03_08")
    assert mapped == {"a": 0.8, "b": 0.8}
    full = radar_normalize({"a": 0.1, "b": 0.9}, mode="band_00_10")
    assert full == {"a": 0.0, "b": 1.0}


def test_radar_normalize_input_checks():
    with pytest.raises(errors.TooFewModels):
        radar_normalize({"a": 0.5})
    with pytest.raises(errors.UnsupportedFormat):
        radar_normalize({"a": 0.5, "b": 0.6}, mode="band_05")


# ---------------------------------------------------------------------------
# model report / documents


def test_model_report_validation():
    with pytest.raises(errors.SchemaViolation):
        _report(dimension_scores={"sharpness": 0.5})
    with pytest.raises(errors.SchemaViolation):
        _report(dimension_scores={"scene": 1.5})
    with pytest.raises(errors.UnknownCategory):
        _report(category_scores={("Cats", "scene"): 0.5})
    with pytest.raises(errors.SchemaViolation):
        _report(metadata={"selected_dimensions": ["scene", "color"]},
                dimension_scores={"scene": 0.5})


def test_model_report_skip_covers_declared_dimension():
    report = _report(
        metadata={"selected_dimensions": ["scene", "color"]},
        dimension_scores={"scene": 0.5},
        skipped={"color": "no eligible videos"},
    )
    assert report.skipped["color"] == "no eligible videos"


def test_report_document_percent_values():
    doc = report_document(_report())
    assert doc["model_id"] == "model_a"
    assert doc["dimensions"]["subject_consistency"] == 91.2346
    assert doc["dimensions"]["scene"] == 50.0
    assert doc["categories"]["Animal"]["scene"] == 25.0
    assert doc["baselines"][0]["scores"]["scene"] == 82.0
    assert doc["per_video"]["scene"]["v1"]["score_percent"] == 50.0
    assert doc["per_video"]["scene"]["v1"]["group_index"] == 0
    assert "engine" not in doc


def test_export_json_canonical_bytes():
    report = _report()
    data = export_json(report)
    assert data == export_json(report)
    assert data.endswith(b"\n")
    doc = parse_report(data)
    assert doc["engine"] == {"name": "vgrade", "version": "0.1.0"}
    # canonical form: re-serializing the parsed doc reproduces the bytes
    assert canonical_json_bytes(doc) == data


def test_canonical_json_bytes_sorts_keys():
    assert canonical_json_bytes({"b": 1, "a": 2}).startswith(b'{\n  "a": 2')


# ---------------------------------------------------------------------------
# CSV


def test_export_csv_layout():
    data = export_csv(_report())
    rows = parse_csv(data)
    assert tuple(rows[0]) == CSV_HEADER
    kinds = [r["row_kind"] for r in rows]
    assert kinds == ["model", "model", "category", "baseline", "baseline"]
    # canonical dimension order puts subject_consistency before scene
    assert [r["dimension"] for r in rows if r["row_kind"] == "model"] == [
        "subject_consistency",
        "scene",
    ]
    model_rows = {r["dimension"]: r for r in rows if r["row_kind"] == "model"}
    assert model_rows["subject_consistency"]["score_percent"] == "91.2346"
    category_row = next(r for r in rows if r["row_kind"] == "category")
    assert category_row["category"] == "Animal"
    assert category_row["score_percent"] == "25.0000"
    baseline_rows = [r for r in rows if r["row_kind"] == "baseline"]
    assert baseline_rows[0]["model_id"] == "empirical_max"


def test_export_run_csv_sorts_models():
    b = _report(model_id="model_b")
    a = _report(model_id="model_a")
    data = export_run_csv([b, a])
    rows = parse_csv(data)
    model_ids = [r["model_id"] for r in rows if r["row_kind"] == "model"]
    assert model_ids == ["model_a", "model_a", "model_b", "model_b"]
    assert data.decode("utf-8").count("row_kind") == 1


def test_csv_is_deterministic():
    assert export_csv(_report()) == export_csv(_report())


# ---------------------------------------------------------------------------
# category table


def test_per_category_table_orders_axes():
    table = per_category_table(
        {
            ("Food", "scene"): 0.5,
            ("Animal", "color"): 0.25,
            ("Animal", "scene"): 0.75,
        }
    )
    assert table.rows == ("Animal", "Food")
    assert table.columns == ("color", "scene")
    assert table.cells[("Animal", "scene")] == 0.75
    with pytest.raises(errors.UnknownCategory):
        per_category_table({("Cats", "scene"): 0.5})


# ---------------------------------------------------------------------------
# figures


def test_radar_svg_deterministic_and_tagged():
    rows = {
        "model_a": {"subject_consistency": 0.9, "scene": 0.4},
        "model_b": {"subject_consistency": 0.8, "scene": 0.6},
    }
    one = radar_svg(rows, title="demo")
    two = radar_svg(rows, title="demo")
    assert one == two
    text = one.decode("utf-8")
    assert text.lstrip().startswith("<?xml")
    assert 'gid="radar-line-model_a"' not in text  # gid renders as id=
    assert 'id="radar-line-model_a"' in text
    assert 'id="radar-fill-model_b"' in text


def test_radar_svg_single_row_uses_raw_values():
    rows = {"model_a": {"scene": 0.5}}
    data = radar_svg(rows)
    assert b"radar-line-model_a" in data


def test_radar_svg_input_checks():
    with pytest.raises(errors.TooFewModels):
        radar_svg({})
    with pytest.raises(errors.SchemaViolation):
        radar_svg({"m": {}})


def test_score_bars_png_deterministic():
    rows = {"model_a": {"scene": 0.4}, "model_b": {"scene": 0.7}}
    one = score_bars_png(rows, title="demo")
    two = score_bars_png(rows, title="demo")
    assert one == two
    assert one.startswith(b"\x89PNG")


def test_export_dispatch():
    report = _report()
    assert export(report, "json") == export_json(report)
    assert export(report, "csv") == export_csv(report)
    svg = export(report, "svg_radar")
    assert b"radar-line-model_a" in svg
    assert b"radar-line-empirical_max" in svg
    with pytest.raises(errors.UnsupportedFormat):
        export(report, "pdf")
