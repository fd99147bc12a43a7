import json
from importlib import resources

import pytest

from vgrade import errors, suite
from vgrade.dimensions import DIMENSIONS
from vgrade.suite import PromptRecord


def _line(**kwargs):
    return json.dumps(kwargs)


def test_prompt_record_requires_dimension():
    with pytest.raises(errors.UnknownDimension):
        PromptRecord(prompt_id="p", text="t", dimension_tag="nope")
    with pytest.raises(TypeError):
        PromptRecord(prompt_id="p", text="t")


def test_prompt_record_rejects_unknown_category():
    with pytest.raises(errors.UnknownCategory):
        PromptRecord(
            prompt_id="p", text="t", dimension_tag="subject_consistency", category="Cats"
        )


def test_prompt_record_requires_dimension_labels():
    with pytest.raises(errors.MissingLabel):
        PromptRecord(prompt_id="p", text="a cat", dimension_tag="object_class")
    rec = PromptRecord(
        prompt_id="p",
        text="a cat",
        dimension_tag="object_class",
        labels={"object": " Cat "},
    )
    assert rec.labels["object"] == "cat"


def test_prompt_record_objects_need_two():
    with pytest.raises(errors.TooFewTargets):
        PromptRecord(
            prompt_id="p",
            text="a cat",
            dimension_tag="multiple_objects",
            labels={"objects": ["cat"]},
        )


def test_prompt_record_relation_checks():
    good = PromptRecord(
        prompt_id="p",
        text="a cat left of a dog",
        dimension_tag="spatial_relationship",
        labels={"relation": {"a": "Cat", "b": "dog", "kind": "left_of"}},
    )
    assert good.labels["relation"] == {"a": "cat", "b": "dog", "kind": "left_of"}
    with pytest.raises(errors.SchemaViolation):
        PromptRecord(
            prompt_id="p",
            text="t",
            dimension_tag="spatial_relationship",
            labels={"relation": {"a": "cat", "b": "cat", "kind": "left_of"}},
        )
    with pytest.raises(errors.SchemaViolation):
        PromptRecord(
            prompt_id="p",
            text="t",
            dimension_tag="spatial_relationship",
            labels={"relation": {"a": "cat", "b": "dog", "kind": "beside"}},
        )
    with pytest.raises(errors.SchemaViolation):
        PromptRecord(
            prompt_id="p",
            text="t",
            dimension_tag="spatial_relationship",
            labels={"relation": {"a": "cat", "b": "dog"}},
        )


def test_prompt_record_rejects_unknown_label_keys():
    with pytest.raises(errors.SchemaViolation):
        PromptRecord(
            prompt_id="p",
            text="t",
            dimension_tag="subject_consistency",
            labels={"mood": "happy"},
        )


def test_style_text_kept_verbatim():
    rec = PromptRecord(
        prompt_id="p",
        text="t",
        dimension_tag="appearance_style",
        labels={"style_text": "Van Gogh style"},
    )
    assert rec.labels["style_text"] == "Van Gogh style"


def test_loads_suite_round_trip():
    text = "\n".join(
        [
            _line(prompt_id="a", text="a cat", dimension_tag="object_class",
                  labels={"object": "cat"}),
            _line(prompt_id="b", text="a red car", dimension_tag="color",
                  labels={"object": "car", "color": "red"}, category="Vehicles"),
            _line(prompt_id="c", text="city skyline", dimension_tag="overall_consistency"),
        ]
    ) + "\n"
    records = suite.loads_suite(text)
    assert [r.prompt_id for r in records] == ["a", "b", "c"]
    assert suite.loads_suite(suite.serialize(records)) == records


def test_loads_suite_duplicate_prompt_id():
    text = "\n".join(
        [
            _line(prompt_id="a", text="x", dimension_tag="overall_consistency"),
            _line(prompt_id="a", text="y", dimension_tag="overall_consistency"),
        ]
    )
    with pytest.raises(errors.DuplicatePromptId):
        suite.loads_suite(text)


def test_loads_suite_rejects_unknown_keys():
    text = _line(
        prompt_id="a", text="x", dimension_tag="overall_consistency", extra=1
    )
    with pytest.raises(errors.SchemaViolation):
        suite.loads_suite(text)


def test_loads_suite_rejects_bad_json():
    with pytest.raises(errors.SchemaViolation):
        suite.loads_suite("{not json}")


def test_loads_suite_skips_blank_lines():
    text = "\n\n" + _line(prompt_id="a", text="x", dimension_tag="scene",
                          labels={"scene_words": ["beach"]}) + "\n\n"
    assert len(suite.loads_suite(text)) == 1


def test_load_suite_missing_file(tmp_path):
    with pytest.raises(errors.SchemaViolation):
        suite.load_suite(tmp_path / "nope.jsonl")


def test_save_and_load_suite(tmp_path):
    records = [
        PromptRecord(prompt_id="a", text="a dog running", dimension_tag="human_action",
                     labels={"action": "running"}),
    ]
    path = tmp_path / "suite.jsonl"
    suite.save_suite(path, records)
    assert suite.load_suite(path) == records


def test_category_partition():
    records = [
        PromptRecord(prompt_id="a", text="x", dimension_tag="overall_consistency",
                     category="Animal"),
        PromptRecord(prompt_id="b", text="y", dimension_tag="overall_consistency",
                     category="Animal"),
        PromptRecord(prompt_id="c", text="z", dimension_tag="overall_consistency",
                     category="Food"),
    ]
    buckets = suite.category_partition(records)
    assert sorted(buckets) == ["Animal", "Food"]
    assert len(buckets["Animal"]) == 2
    with pytest.raises(errors.MissingCategory):
        suite.category_partition(
            [PromptRecord(prompt_id="d", text="w", dimension_tag="overall_consistency")]
        )


def test_bundled_sample_suites_load():
    base = resources.files("vgrade").joinpath("data", "suites")
    per_dim = suite.loads_suite(
        base.joinpath("sample_per_dimension.jsonl").read_text(encoding="utf-8")
    )
    assert len(per_dim) == 160
    tags = {r.dimension_tag for r in per_dim}
    assert tags == set(DIMENSIONS)
    per_cat = suite.loads_suite(
        base.joinpath("sample_per_category.jsonl").read_text(encoding="utf-8")
    )
    assert len(per_cat) == 80
    assert all(r.category is not None for r in per_cat)
