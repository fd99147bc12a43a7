"""Command-line interface: validate, score, baseline, align, report.

Exit codes are a stable contract: 0 success, 2 input or validation error,
1 internal error. Machine-readable validation output goes to stdout as
JSON; human-facing tables round to two decimals while all files keep the
canonical four.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import traceback
from pathlib import Path

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from . import alignment, baselines, quality, semantics
from .baselines import BaselineRow
from .core import FeatureTrack
from .dimensions import DIMENSIONS
from .errors import InputError, SchemaViolation
from .interchange import read_vbnf
from .reporting import (
    ModelReport,
    canonical_json_bytes,
    export_run_csv,
    percent,
    radar_svg,
    score_bars_png,
)
from .run import RunConfig, score_run

CONFIG_KEYS = {
    "quality.tau_dynamic": float,
    "quality.tau_static": float,
    "semantics.tau_iou": float,
    "semantics.color_vocabulary_path": str,
    "baselines.repetitions": int,
    "baselines.noise_seed": int,
}


def load_config_file(path: str | Path) -> dict:
    """Flatten a TOML config file into dotted keys, validating against the
    published key set."""
    try:
        with open(path, "rb") as handle:
            doc = tomllib.load(handle)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise SchemaViolation(f"cannot read config {path}: {exc}") from exc
    flat: dict = {}
    for section, body in doc.items():
        if not isinstance(body, dict):
            raise SchemaViolation(f"config section {section!r} must be a table")
        for key, value in body.items():
            dotted = f"{section}.{key}"
            if dotted not in CONFIG_KEYS:
                raise SchemaViolation(f"unknown config key {dotted!r}")
            expected = CONFIG_KEYS[dotted]
            if expected is float and isinstance(value, int):
                value = float(value)
            if not isinstance(value, expected):
                raise SchemaViolation(f"config key {dotted!r} has wrong type")
            flat[dotted] = value
    return flat


def _read_json(path: str | Path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaViolation(f"cannot read {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaViolation(f"{path}: expected a JSON object")
    return doc


def _resolve(flag_value, config: dict, key: str, default):
    if flag_value is not None:
        return flag_value
    if key in config:
        return config[key]
    return default


def _workers(args) -> int:
    if args.workers is not None:
        return args.workers
    env = os.environ.get("VGRADE_WORKERS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise SchemaViolation(f"VGRADE_WORKERS must be an integer, got {env!r}")
    return 1


def _dims(args) -> tuple[str, ...]:
    if not args.dims:
        return DIMENSIONS
    dims = tuple(d.strip() for d in args.dims.split(",") if d.strip())
    if not dims:
        raise SchemaViolation("--dims given but empty")
    return dims


def _run_config(args) -> RunConfig:
    config = load_config_file(args.config) if args.config else {}
    return RunConfig(
        suite_path=Path(args.suite),
        bundles_root=Path(args.bundles),
        out_dir=Path(args.out) if getattr(args, "out", None) else Path("."),
        dimensions=_dims(args),
        tau_dynamic=_resolve(
            args.tau_dynamic, config, "quality.tau_dynamic",
            quality.DEFAULT_TAU_DYNAMIC,
        ),
        tau_static=_resolve(
            args.tau_static, config, "quality.tau_static",
            quality.DEFAULT_TAU_STATIC,
        ),
        tau_iou=_resolve(
            args.tau_iou, config, "semantics.tau_iou", semantics.DEFAULT_TAU_IOU
        ),
        color_vocabulary_path=_resolve(
            args.color_vocabulary, config, "semantics.color_vocabulary_path", None
        ),
        workers=_workers(args),
    )


# ---------------------------------------------------------------------------
# Commands


def cmd_validate(args) -> int:
    from .run import discover_manifests, preflight
    from .suite import load_suite

    records = load_suite(args.suite)
    manifest_paths = discover_manifests(Path(args.bundles))
    dims = _dims(args)
    eligible, violations = preflight(records, manifest_paths, dims)
    doc = {
        "manifests_found": len(manifest_paths),
        "eligible_bundles": len(eligible),
        "violations": violations,
    }
    sys.stdout.write(canonical_json_bytes(doc).decode("utf-8"))
    return 2 if violations else 0


def cmd_score(args) -> int:
    config = _run_config(args)
    outcome = score_run(config)
    if not outcome.ok:
        doc = {"violations": outcome.violations}
        sys.stdout.write(canonical_json_bytes(doc).decode("utf-8"))
        return 2
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_bytes(canonical_json_bytes(outcome.document))
    (out / "report.csv").write_bytes(export_run_csv(outcome.reports))
    rows = {
        report.model_id: dict(report.dimension_scores)
        for report in outcome.reports
    }
    (out / "radar.svg").write_bytes(radar_svg(rows))
    for report in outcome.reports:
        scored = len(report.dimension_scores)
        skipped = len(report.skipped)
        print(f"{report.model_id}: {scored} dimensions scored, {skipped} skipped")
        for tag in DIMENSIONS:
            if tag in report.dimension_scores:
                print(f"  {tag:<24s} {percent(report.dimension_scores[tag]):8.2f}%")
    print(f"wrote {out / 'report.json'}, {out / 'report.csv'}, {out / 'radar.svg'}")
    return 0


def _load_baseline_config(args) -> dict:
    return load_config_file(args.config) if args.config else {}


def cmd_baseline(args) -> int:
    config = _load_baseline_config(args)
    seed = _resolve(args.seed, config, "baselines.noise_seed",
                    baselines.DEFAULT_NOISE_SEED)
    repetitions = _resolve(
        args.repetitions, config, "baselines.repetitions",
        baselines.DEFAULT_REPETITIONS,
    )
    rows: list[BaselineRow] = []
    run_config: dict = {"mode": args.mode, "seed": seed}

    if args.mode == "noise":
        run_config.update(
            {
                "height": args.height,
                "width": args.width,
                "frames": args.frames,
                "clips": args.clips,
            }
        )
        scores = []
        for i in range(args.clips):
            clip = baselines.make_noise_clip(
                args.height, args.width, args.frames, (seed, i)
            )
            scores.append(quality.temporal_flickering(clip))
        rows.append(baselines.build_empirical_min({"temporal_flickering": scores}))
    elif args.mode == "composed":
        if not args.pool:
            raise SchemaViolation("composed mode requires --pool")
        pool_dir = Path(args.pool)
        files = sorted(pool_dir.glob("*.vbnf"))
        if len(files) < 2:
            from .errors import PoolTooSmall

            raise PoolTooSmall(
                f"composed mode needs >= 2 feature files in {pool_dir}, "
                f"found {len(files)}"
            )
        kind = args.kind
        tracks = [
            FeatureTrack(path.stem, kind, read_vbnf(path)) for path in files
        ]
        dim = (
            "subject_consistency" if kind == "dino" else "background_consistency"
        )
        run_config.update(
            {
                "kind": kind,
                "frames": args.frames,
                "repetitions": repetitions,
                "pool_size": len(files),
            }
        )
        minimum = baselines.min_composed_consistency(
            tracks, args.frames, repetitions, seed
        )
        rows.append(baselines.build_empirical_min({dim: [minimum]}))
    else:  # retrieved
        if not args.scores:
            raise SchemaViolation("retrieved mode requires --scores")
        doc = _read_json(args.scores)
        if not isinstance(doc, dict) or not isinstance(doc.get("scores"), dict):
            raise SchemaViolation(
                "retrieved scores file must be {\"scores\": {dimension: [..]}}"
            )
        retrieved: dict = {}
        for tag, values in doc["scores"].items():
            if tag not in DIMENSIONS:
                raise SchemaViolation(f"unknown dimension {tag!r} in scores file")
            if not isinstance(values, list) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool)
                and 0.0 <= v <= 1.0
                for v in values
            ):
                raise SchemaViolation(f"scores for {tag!r} must be in [0, 1]")
            retrieved[tag] = [float(v) for v in values]
        run_config["scores_file"] = str(args.scores)
        rows.append(baselines.build_empirical_max(retrieved))
        rows.append(baselines.build_webvid_avg(retrieved))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    doc = {
        "config": run_config,
        "rows": [
            {
                "kind": row.kind,
                "scores": {t: percent(s) for t, s in sorted(row.scores.items())},
                "provenance": dict(sorted(row.provenance.items())),
            }
            for row in rows
        ],
    }
    (out / "baselines.json").write_bytes(canonical_json_bytes(doc))
    print(f"wrote {out / 'baselines.json'} ({len(rows)} rows)")
    return 0


def _scores_from_run_files(paths: list[str]) -> dict:
    """per-dimension, per-model slot scores from run report.json files."""
    per_dim: dict = {}
    seen_models: set[str] = set()
    for path in paths:
        doc = _read_json(path)
        models = doc.get("models")
        if not isinstance(models, dict):
            raise SchemaViolation(f"{path}: not a run report (no models key)")
        for model_id, body in models.items():
            if model_id in seen_models:
                raise SchemaViolation(f"model {model_id!r} appears in two runs")
            seen_models.add(model_id)
            for tag, videos in body.get("per_video", {}).items():
                for entry in videos.values():
                    slot = (entry["prompt_id"], entry["group_index"])
                    per_dim.setdefault(tag, {}).setdefault(model_id, {})[slot] = (
                        entry["score_percent"] / 100.0
                    )
    return per_dim


def cmd_align(args) -> int:
    annotations = alignment.load_annotations(args.annotations)
    if not annotations:
        from .errors import EmptyInput

        raise EmptyInput(f"no annotations in {args.annotations}")
    by_dim: dict = {}
    for ann in annotations:
        by_dim.setdefault(ann.dimension_tag, []).append(ann)

    engine_scores = _scores_from_run_files(args.run)

    dimensions_doc: dict = {}
    for tag in sorted(by_dim):
        human = alignment.human_win_ratio(by_dim[tag])
        entry: dict = {
            "human_win_ratio": {m: round(r, 6) for m, r in human.ratios.items()},
            "participations": dict(human.comparisons),
        }
        if tag in engine_scores:
            vbench = alignment.vbench_win_ratio(engine_scores[tag], tag)
            entry["vbench_win_ratio"] = {
                m: round(r, 6) for m, r in vbench.ratios.items()
            }
            common = sorted(set(human.ratios) & set(vbench.ratios))
            if len(common) >= 2:
                x = [vbench.ratios[m] for m in common]
                y = [human.ratios[m] for m in common]
                from .errors import DegenerateInput

                for method in ("spearman", "pearson"):
                    try:
                        entry[method] = round(
                            alignment.rank_correlation(x, y, method), 6
                        )
                    except DegenerateInput:
                        entry[method] = None
                entry["models_compared"] = common
        dimensions_doc[tag] = entry

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    doc = {"dimensions": dimensions_doc}
    (out / "alignment.json").write_bytes(canonical_json_bytes(doc))
    print(f"wrote {out / 'alignment.json'} ({len(dimensions_doc)} dimensions)")
    return 0


def _reports_from_run_files(paths: list[str]) -> list[ModelReport]:
    reports = []
    seen: set[str] = set()
    for path in paths:
        doc = _read_json(path)
        models = doc.get("models")
        if not isinstance(models, dict):
            raise SchemaViolation(f"{path}: not a run report (no models key)")
        for model_id in sorted(models):
            if model_id in seen:
                raise SchemaViolation(f"model {model_id!r} appears in two runs")
            seen.add(model_id)
            body = models[model_id]
            dimension_scores = {
                tag: value / 100.0
                for tag, value in body.get("dimensions", {}).items()
            }
            category_scores = {
                (category, tag): value / 100.0
                for category, cols in body.get("categories", {}).items()
                for tag, value in cols.items()
            }
            reports.append(
                ModelReport(
                    model_id=model_id,
                    dimension_scores=dimension_scores,
                    category_scores=category_scores,
                    skipped=dict(body.get("skipped", {})),
                )
            )
    if not reports:
        from .errors import EmptyInput

        raise EmptyInput("run files contain no models")
    return reports


def _baseline_rows_from_files(paths: list[str]) -> list[BaselineRow]:
    merged: dict = {}
    for path in paths:
        doc = _read_json(path)
        rows = doc.get("rows")
        if not isinstance(rows, list):
            raise SchemaViolation(f"{path}: not a baselines file (no rows key)")
        for row in rows:
            kind = row.get("kind")
            scores = {t: v / 100.0 for t, v in row.get("scores", {}).items()}
            provenance = dict(row.get("provenance", {}))
            if kind not in merged:
                merged[kind] = (scores, provenance)
                continue
            prior_scores, prior_prov = merged[kind]
            for tag, value in scores.items():
                if tag in prior_scores and prior_scores[tag] != value:
                    raise SchemaViolation(
                        f"{path}: conflicting {kind} score for {tag}"
                    )
                prior_scores[tag] = value
                prior_prov[tag] = provenance[tag]
    return [
        BaselineRow(kind, scores, provenance)
        for kind, (scores, provenance) in sorted(merged.items())
    ]


def cmd_report(args) -> int:
    reports = _reports_from_run_files(args.run)
    rows = _baseline_rows_from_files(args.baselines or [])
    ordering_problems = baselines.check_row_ordering(rows)
    if ordering_problems:
        raise SchemaViolation(
            "baseline rows violate min <= avg <= max: "
            + "; ".join(ordering_problems)
        )

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    combined = [
        ModelReport(
            model_id=r.model_id,
            dimension_scores=r.dimension_scores,
            category_scores=r.category_scores,
            baselines=rows if i == 0 else [],
            skipped=r.skipped,
        )
        for i, r in enumerate(sorted(reports, key=lambda r: r.model_id))
    ]
    (out / "report.csv").write_bytes(export_run_csv(combined))

    radar_rows = {
        r.model_id: dict(r.dimension_scores) for r in combined
    }
    for row in rows:
        radar_rows[row.kind] = dict(row.scores)
    (out / "radar.svg").write_bytes(radar_svg(radar_rows))
    (out / "bars.png").write_bytes(score_bars_png(radar_rows))

    models = sorted(r.model_id for r in combined)
    present = [
        tag
        for tag in DIMENSIONS
        if any(tag in r.dimension_scores for r in combined)
    ]
    width = max((len(t) for t in present), default=9)
    header = " ".join(f"{m:>12s}" for m in models)
    print(f"{'dimension':<{width}s} {header}")
    by_model = {r.model_id: r.dimension_scores for r in combined}
    for tag in present:
        cells = []
        for m in models:
            score = by_model[m].get(tag)
            cells.append(
                f"{percent(score):11.2f}%" if score is not None else f"{'-':>12s}"
            )
        print(f"{tag:<{width}s} " + " ".join(cells))
    print(
        f"wrote {out / 'report.csv'}, {out / 'radar.svg'}, {out / 'bars.png'}"
    )
    return 0


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vgrade",
        description=(
            "Multi-dimensional evaluation of generated videos from "
            "pre-extracted artifact bundles."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_scoring_flags(p):
        p.add_argument("--suite", required=True, help="prompt suite (.jsonl)")
        p.add_argument("--bundles", required=True, help="bundle root directory")
        p.add_argument(
            "--dims",
            help="comma-separated dimension subset (default: all 16)",
        )
        p.add_argument("--config", help="TOML config file (flags win)")
        p.add_argument("--tau-dynamic", dest="tau_dynamic", type=float)
        p.add_argument("--tau-static", dest="tau_static", type=float)
        p.add_argument("--tau-iou", dest="tau_iou", type=float)
        p.add_argument(
            "--color-vocabulary",
            dest="color_vocabulary",
            help="custom color word list (JSON)",
        )
        p.add_argument(
            "--workers",
            type=int,
            help="worker processes (default: $VGRADE_WORKERS or 1)",
        )

    p_validate = sub.add_parser(
        "validate", help="validate bundles against a suite without scoring"
    )
    add_scoring_flags(p_validate)
    p_validate.set_defaults(func=cmd_validate)

    p_score = sub.add_parser("score", help="score bundles and write reports")
    add_scoring_flags(p_score)
    p_score.add_argument("--out", required=True, help="output directory")
    p_score.set_defaults(func=cmd_score)

    p_baseline = sub.add_parser(
        "baseline", help="construct empirical reference rows"
    )
    p_baseline.add_argument(
        "--mode", required=True, choices=("noise", "composed", "retrieved")
    )
    p_baseline.add_argument("--out", required=True)
    p_baseline.add_argument("--config", help="TOML config file (flags win)")
    p_baseline.add_argument("--seed", type=int)
    p_baseline.add_argument("--height", type=int, default=256)
    p_baseline.add_argument("--width", type=int, default=256)
    p_baseline.add_argument("--frames", type=int, default=16)
    p_baseline.add_argument("--clips", type=int, default=5)
    p_baseline.add_argument("--pool", help="directory of .vbnf feature files")
    p_baseline.add_argument("--kind", choices=("dino", "clip_image"),
                            default="dino")
    p_baseline.add_argument("--repetitions", type=int)
    p_baseline.add_argument("--scores", help="retrieved per-video scores (JSON)")
    p_baseline.set_defaults(func=cmd_baseline)

    p_align = sub.add_parser(
        "align", help="win ratios and correlation against human preferences"
    )
    p_align.add_argument("--annotations", required=True)
    p_align.add_argument(
        "--run",
        action="append",
        required=True,
        help="run report.json (repeatable)",
    )
    p_align.add_argument("--out", required=True)
    p_align.set_defaults(func=cmd_align)

    p_report = sub.add_parser(
        "report", help="merge runs into combined tables and figures"
    )
    p_report.add_argument(
        "--run", action="append", required=True, help="run report.json (repeatable)"
    )
    p_report.add_argument(
        "--baselines", action="append", help="baselines.json (repeatable)"
    )
    p_report.add_argument("--out", required=True)
    p_report.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 1
