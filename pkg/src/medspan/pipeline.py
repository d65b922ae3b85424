"""End-to-end runs: split, augment, subsample, tag, ensemble, evaluate.

Mode pl1 upsamples the training half and fits a single tagger; mode pl2
runs the full augmentation chain, draws bootstrap subsets, fits one tagger
per subset, and thresholds the averaged tracks. All artifacts are written
deterministically: a fixed config yields byte-identical output trees.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Mapping

from sklearn.pipeline import Pipeline

from .augment import DrugNameReplacer, PairConcatenator, Paraphraser, Upsampler
from .corpus import Dataset, load_dataset, save_dataset, stratified_split, with_spans
from .ensemble import aggregate_sets, average
from .exceptions import FormatError
from .lexicon import Lexicon
from .metrics import PRF, MatchCounts, MetricsReport, evaluate, format_report
from .postprocess import clean_predictions
from .sampling import SubsetPlan, bootstrap_subsets
from .tagging import GazetteerTagger, save_tracks

MODES = ("pl1", "pl2")


@dataclass
class PipelineConfig:
    """Everything one run needs; mirrors the key-value config file."""

    dataset: str = ""
    mode: str = "pl2"
    out_dir: str = "run"
    format: str = "jsonl"
    seed: int = 0
    split_ratio: float = 0.7
    target_positive_ratio: float = 0.25
    concat_pairs: int = 10
    replacements_per_positive: int = 1
    paraphrase_command: str = ""
    lexicon: str = ""
    subsets: int = 6
    sample_fraction: float = 1.0
    exact_prob: float = 0.9
    fuzzy_prob: float = 0.6
    max_edit_distance: int = 1
    threshold: float = 0.5
    post: bool = True

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.format not in ("jsonl", "tsv"):
            raise ValueError(f"format must be jsonl or tsv, got {self.format!r}")


def read_config(path: str | Path) -> dict[str, str]:
    """Parse a flat key = value file; '#' starts a comment line."""
    out: dict[str, str] = {}
    for line_no, line in enumerate(Path(path).read_text("utf-8").splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise FormatError("expected 'key = value'", line=line_no, source=str(path))
        key, _, value = stripped.partition("=")
        key = key.strip()
        if not key:
            raise FormatError("empty key", line=line_no, source=str(path))
        if key in out:
            raise FormatError(f"duplicate key {key!r}", line=line_no, source=str(path))
        out[key] = value.strip()
    return out


_BOOL_WORDS = {"on": True, "off": False, "true": True, "false": False, "yes": True, "no": False}


def config_from_mapping(raw: Mapping[str, str], **overrides: object) -> PipelineConfig:
    """Build a typed config from string values, applying keyword overrides."""
    known = {f.name: f.type for f in fields(PipelineConfig)}
    unknown = sorted(set(raw) - set(known))
    if unknown:
        raise ValueError(f"unknown config keys: {unknown}")
    kwargs: dict[str, object] = {}
    for field in fields(PipelineConfig):
        if field.name not in raw:
            continue
        value = raw[field.name]
        if field.type == "int":
            kwargs[field.name] = int(value)
        elif field.type == "float":
            kwargs[field.name] = float(value)
        elif field.type == "bool":
            if value.lower() not in _BOOL_WORDS:
                raise ValueError(f"config key {field.name!r} expects on/off, got {value!r}")
            kwargs[field.name] = _BOOL_WORDS[value.lower()]
        else:
            kwargs[field.name] = value
    for key, value in overrides.items():
        if value is not None:
            kwargs[key] = value
    return PipelineConfig(**kwargs)


def augmentation_chain(config: PipelineConfig, manual: Lexicon | None) -> Pipeline:
    steps: list[tuple[str, object]] = []
    if config.concat_pairs > 0:
        steps.append(("concat", PairConcatenator(config.concat_pairs, seed=config.seed)))
    if config.paraphrase_command:
        steps.append(("paraphrase", Paraphraser(config.paraphrase_command, seed=config.seed)))
    if config.replacements_per_positive > 0:
        steps.append(
            (
                "replace",
                DrugNameReplacer(manual, config.replacements_per_positive, seed=config.seed),
            )
        )
    steps.append(("upsample", Upsampler(config.target_positive_ratio, seed=config.seed)))
    return Pipeline(steps)


def run_pipeline(config: PipelineConfig) -> dict[str, Path]:
    """Execute one full run and return the artifact paths by name."""
    if not config.dataset:
        raise ValueError("config needs a dataset path")
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ext = config.format
    full = load_dataset(config.dataset)
    manual = Lexicon.from_file(config.lexicon) if config.lexicon else None

    artifacts: dict[str, Path] = {}

    def write_dataset(name: str, dataset: Dataset) -> None:
        path = out_dir / f"{name}.{ext}"
        path.parent.mkdir(parents=True, exist_ok=True)
        save_dataset(dataset, path, config.format)
        artifacts[name] = path

    train, valid = stratified_split(full, config.split_ratio, config.seed)
    write_dataset("train", train)
    write_dataset("valid", valid)

    if config.mode == "pl1":
        augmented = Upsampler(config.target_positive_ratio, config.seed).fit_transform(train)
    else:
        augmented = augmentation_chain(config, manual).fit_transform(train)
    write_dataset("augmented", augmented)

    tagger_kwargs = dict(
        exact_prob=config.exact_prob,
        fuzzy_prob=config.fuzzy_prob,
        max_edit_distance=config.max_edit_distance,
    )
    if config.mode == "pl1":
        training_sets = [augmented]
    else:
        plan = SubsetPlan(config.subsets, config.sample_fraction, config.seed)
        training_sets = bootstrap_subsets(augmented, plan)
        for index, subset in enumerate(training_sets):
            write_dataset(f"subsets/subset_{index}", subset)

    track_sets = []
    for index, training in enumerate(training_sets):
        tagger = GazetteerTagger(**tagger_kwargs).fit(training)
        tracks = tagger.predict(valid)
        track_sets.append(tracks)
        path = out_dir / "predictions" / f"model_{index}.jsonl"
        path.parent.mkdir(parents=True, exist_ok=True)
        save_tracks(tracks, path)
        artifacts[f"predictions/model_{index}"] = path

    averaged = average(track_sets)
    averaged_path = out_dir / "ensemble" / "averaged.jsonl"
    averaged_path.parent.mkdir(parents=True, exist_ok=True)
    save_tracks(averaged, averaged_path)
    artifacts["ensemble/averaged"] = averaged_path

    predictions = aggregate_sets([averaged], [1.0], config.threshold)
    if config.post:
        predictions = clean_predictions(valid, predictions)
    spans_dataset = with_spans(valid, predictions, name="ensemble-spans")
    write_dataset("ensemble/spans", spans_dataset)

    report = evaluate(valid, predictions)
    report_path = out_dir / "report.json"
    report_path.write_bytes(
        (json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n").encode("utf-8")
    )
    artifacts["report"] = report_path
    table_path = out_dir / "report.txt"
    table_path.write_bytes((format_report({"ensemble": report}) + "\n").encode("utf-8"))
    artifacts["report_table"] = table_path
    return artifacts


def report_from_run(out_dir: str | Path) -> MetricsReport:
    raw = json.loads((Path(out_dir) / "report.json").read_text("utf-8"))
    return MetricsReport(
        strict=PRF(**raw["strict"]),
        overlapping=PRF(**raw["overlapping"]),
        counts=MatchCounts(**raw["counts"]),
    )
