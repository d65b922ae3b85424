"""Command-line entry points for the medspan toolkit.

Every subcommand reads and writes the documented file formats (dataset
JSONL/TSV, prediction JSONL, key = value config, trial-log JSONL), so each
stage can be driven from a shell or swapped out for an external tool.
"""

from __future__ import annotations

import functools
import json
from pathlib import Path
from typing import Callable

import click

from .augment import Upsampler
from .corpus import (
    FORMATS,
    format_of,
    load_dataset,
    save_dataset,
    stratified_split,
    with_spans,
)
from .ensemble import aggregate_sets, average, ensemble_objective
from .hpo import METHODS, TPEConfig, ensemble_search_space, optimize
from .lexicon import Lexicon
from .metrics import categorize_errors, evaluate, format_report
from .pipeline import (
    MODES,
    PipelineConfig,
    augmentation_chain,
    config_from_mapping,
    read_config,
    run_pipeline,
)
from .postprocess import clean_predictions, clean_spans
from .sampling import SubsetPlan, bootstrap_subsets
from .tagging import load_tracks, save_tracks, tag_dataset
from .validation import check_tracks_match

_ON_OFF = click.Choice(["on", "off"])


def _friendly(fn: Callable) -> Callable:
    """Turn validation and format errors into clean CLI failures."""

    @functools.wraps(fn)
    def wrapper(*args: object, **kwargs: object) -> object:
        try:
            return fn(*args, **kwargs)
        except (ValueError, RuntimeError) as error:
            raise click.ClickException(str(error)) from error

    return wrapper


def _switch(value: str | None) -> bool | None:
    return None if value is None else value == "on"


def _save(dataset: object, path: Path, fmt: str | None) -> None:
    save_dataset(dataset, path, fmt or format_of(path))
    click.echo(f"wrote {path}")


@click.group()
def main() -> None:
    """Medication-mention extraction toolkit for tweet corpora."""


@main.command()
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option("--ratio", default=0.7, show_default=True, help="Fraction kept for training.")
@click.option("--seed", default=0, show_default=True)
@click.option("--out-dir", default=".", show_default=True, type=click.Path(file_okay=False))
@click.option("--format", "fmt", type=click.Choice(FORMATS), default=None,
              help="Output format; defaults to the input's.")
@_friendly
def split(dataset: str, ratio: float, seed: int, out_dir: str, fmt: str | None) -> None:
    """Stratified train/validation split of DATASET."""
    data = load_dataset(dataset)
    fmt = fmt or format_of(dataset)
    train, valid = stratified_split(data, ratio, seed)
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    for part, stem in ((train, "train"), (valid, "valid")):
        _save(part, directory / f"{stem}.{fmt}", fmt)


@main.command()
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--mode", type=click.Choice(MODES), default="pl2", show_default=True,
              help="pl1 only upsamples; pl2 runs the full chain.")
@click.option("--seed", default=0, show_default=True)
@click.option("--target-positive-ratio", default=0.25, show_default=True)
@click.option("--concat-pairs", default=10, show_default=True)
@click.option("--replacements-per-positive", default=1, show_default=True)
@click.option("--paraphrase-command", default="", help="External paraphraser to shell out to.")
@click.option("--lexicon", "lexicon_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Manual drug list used for name replacement.")
@click.option("--format", "fmt", type=click.Choice(FORMATS), default=None)
@_friendly
def augment(
    dataset: str,
    out: str,
    mode: str,
    seed: int,
    target_positive_ratio: float,
    concat_pairs: int,
    replacements_per_positive: int,
    paraphrase_command: str,
    lexicon_path: str | None,
    fmt: str | None,
) -> None:
    """Expand DATASET with the configured augmentation chain."""
    data = load_dataset(dataset)
    manual = Lexicon.from_file(lexicon_path) if lexicon_path else None
    if mode == "pl1":
        result = Upsampler(target_positive_ratio, seed).fit_transform(data)
    else:
        config = PipelineConfig(
            dataset=dataset,
            mode=mode,
            seed=seed,
            target_positive_ratio=target_positive_ratio,
            concat_pairs=concat_pairs,
            replacements_per_positive=replacements_per_positive,
            paraphrase_command=paraphrase_command,
        )
        result = augmentation_chain(config, manual).fit_transform(data)
    _save(result, Path(out), fmt)


@main.command()
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option("--k", default=6, show_default=True, help="Number of subsets to draw.")
@click.option("--sample-fraction", default=1.0, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@click.option("--format", "fmt", type=click.Choice(FORMATS), default=None)
@_friendly
def subsets(
    dataset: str, k: int, sample_fraction: float, seed: int, out_dir: str, fmt: str | None
) -> None:
    """Draw bootstrap training subsets from DATASET."""
    data = load_dataset(dataset)
    fmt = fmt or format_of(dataset)
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    for index, subset in enumerate(bootstrap_subsets(data, SubsetPlan(k, sample_fraction, seed))):
        _save(subset, directory / f"subset_{index}.{fmt}", fmt)


@main.command()
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--lexicon", "lexicon_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Manual drug list.")
@click.option("--train", "train_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Training data whose gold surfaces seed the lexicon.")
@click.option("--exact-prob", default=0.9, show_default=True)
@click.option("--fuzzy-prob", default=0.6, show_default=True)
@click.option("--max-edit-distance", default=1, show_default=True)
@click.option("--n-jobs", default=1, show_default=True)
@click.option("--predictions", "predictions_path", type=click.Path(exists=True, dir_okay=False),
              default=None,
              help="Validate and canonicalize an existing prediction file instead of tagging.")
@_friendly
def tag(
    dataset: str,
    out: str,
    lexicon_path: str | None,
    train_path: str | None,
    exact_prob: float,
    fuzzy_prob: float,
    max_edit_distance: int,
    n_jobs: int,
    predictions_path: str | None,
) -> None:
    """Predict per-character probabilities for DATASET, or ingest a prediction file."""
    data = load_dataset(dataset)
    if predictions_path is not None:
        if lexicon_path or train_path:
            raise click.UsageError("--predictions cannot be combined with --lexicon/--train")
        tracks = load_tracks(predictions_path)
        check_tracks_match(data, tracks)
    else:
        if not lexicon_path and not train_path:
            raise click.UsageError("need --lexicon and/or --train (or --predictions to ingest)")
        lexicon = Lexicon([])
        if train_path:
            lexicon = lexicon | Lexicon.from_dataset(load_dataset(train_path))
        if lexicon_path:
            lexicon = lexicon | Lexicon.from_file(lexicon_path)
        tracks = tag_dataset(
            data,
            lexicon,
            exact_prob=exact_prob,
            fuzzy_prob=fuzzy_prob,
            max_edit_distance=max_edit_distance,
            n_jobs=n_jobs,
        )
    save_tracks(tracks, out)
    click.echo(f"wrote {out}")


def _parse_weights(value: str | None, n_models: int) -> list[float]:
    if value is None:
        return [1.0] * n_models
    try:
        return [float(part) for part in value.split(",")]
    except ValueError:
        raise ValueError(f"bad --weights {value!r}: expected comma-separated numbers") from None


@main.command()
@click.argument("predictions", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--dataset", "dataset_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Tweets the predictions cover; supplies the text for span output.")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--weights", default=None, help="Comma-separated model weights; equal when omitted.")
@click.option("--threshold", default=0.5, show_default=True)
@click.option("--post", type=_ON_OFF, default="on", show_default=True,
              help="Apply span post-processing to the combined output.")
@click.option("--average-out", type=click.Path(dir_okay=False), default=None,
              help="Also write the combined per-character tracks.")
@click.option("--format", "fmt", type=click.Choice(FORMATS), default=None)
@_friendly
def ensemble(
    predictions: tuple[str, ...],
    dataset_path: str,
    out: str,
    weights: str | None,
    threshold: float,
    post: str,
    average_out: str | None,
    fmt: str | None,
) -> None:
    """Combine per-model PREDICTIONS files into one span dataset."""
    data = load_dataset(dataset_path)
    track_sets = [load_tracks(path) for path in predictions]
    for path, tracks in zip(predictions, track_sets):
        try:
            check_tracks_match(data, tracks)
        except ValueError as error:
            raise ValueError(f"{path}: {error}") from None
    w = _parse_weights(weights, len(track_sets))
    spans = aggregate_sets(track_sets, w, threshold)
    if _switch(post):
        spans = clean_predictions(data, spans)
    if average_out is not None:
        save_tracks(average(track_sets, w), average_out)
        click.echo(f"wrote {average_out}")
    _save(with_spans(data, spans, name="ensemble-spans"), Path(out), fmt)


@main.command("post")
@click.argument("spans_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--hashtags", type=_ON_OFF, default="on", show_default=True,
              help="Drop a leading '#' from spans.")
@click.option("--trim", type=_ON_OFF, default="on", show_default=True,
              help="Trim non-alphanumeric span edges.")
@click.option("--format", "fmt", type=click.Choice(FORMATS), default=None)
@_friendly
def post_command(spans_file: str, out: str, hashtags: str, trim: str, fmt: str | None) -> None:
    """Clean the span boundaries in a span dataset file."""
    data = load_dataset(spans_file)
    cleaned = {
        t.id: clean_spans(t.text, t.gold_spans, hashtags=_switch(hashtags), trim=_switch(trim))
        for t in data
    }
    _save(with_spans(data, cleaned), Path(out), fmt)


@main.command("eval")
@click.argument("gold", type=click.Path(exists=True, dir_okay=False))
@click.argument("predicted", type=click.Path(exists=True, dir_okay=False))
@click.option("--json-out", type=click.Path(dir_okay=False), default=None,
              help="Also write the report as JSON.")
@click.option("--train", "train_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Training data; enables error categorization.")
@_friendly
def eval_command(gold: str, predicted: str, json_out: str | None, train_path: str | None) -> None:
    """Score PREDICTED spans against the GOLD dataset."""
    gold_data = load_dataset(gold)
    pred_data = load_dataset(predicted)
    for tweet in pred_data:
        reference = gold_data.by_id.get(tweet.id)
        if reference is None:
            raise ValueError(f"predicted tweet {tweet.id!r} is not in the gold dataset")
        if reference.text != tweet.text:
            raise ValueError(f"text mismatch for tweet {tweet.id!r}")
    predictions = {t.id: list(t.gold_spans) for t in pred_data}
    report = evaluate(gold_data, predictions)
    click.echo(format_report({"predictions": report}))
    if json_out is not None:
        payload = json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
        Path(json_out).write_bytes(payload.encode("utf-8"))
        click.echo(f"wrote {json_out}")
    if train_path is not None:
        lexicon = Lexicon.from_dataset(load_dataset(train_path))
        click.echo("error categories:")
        for category, count in categorize_errors(gold_data, predictions, lexicon).items():
            click.echo(f"  {category}: {count}")


@main.command()
@click.argument("predictions", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--gold", "gold_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--method", type=click.Choice(METHODS), default="tpe", show_default=True)
@click.option("--budget", default=100, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--resolution", default=5, show_default=True,
              help="Grid points per dimension (grid method only).")
@click.option("--post", type=_ON_OFF, default="off", show_default=True,
              help="Post-process spans inside the objective.")
@click.option("--log", "log_path", type=click.Path(dir_okay=False), default=None,
              help="Trial log to append to.")
@click.option("--resume", is_flag=True, help="Continue from the trials already in --log.")
@_friendly
def optimize_command(
    predictions: tuple[str, ...],
    gold_path: str,
    method: str,
    budget: int,
    seed: int,
    resolution: int,
    post: str,
    log_path: str | None,
    resume: bool,
) -> None:
    """Search ensemble weights and threshold against a gold dataset."""
    gold_data = load_dataset(gold_path)
    track_sets = [load_tracks(path) for path in predictions]
    objective = ensemble_objective(track_sets, gold_data, post=bool(_switch(post)))
    best, history = optimize(
        ensemble_search_space(len(track_sets)),
        objective,
        method=method,
        budget=budget,
        seed=seed,
        resolution=resolution,
        tpe=TPEConfig(),
        log_path=log_path,
        resume=resume,
    )
    click.echo(f"trials: {len(history)}")
    click.echo(f"best objective: {best.objective:.6f}")
    for name in sorted(best.params):
        click.echo(f"  {name} = {best.params[name]:.6f}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="key = value config file.")
@click.option("--dataset", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(MODES), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out-dir", default=None, type=click.Path(file_okay=False))
@click.option("--threshold", type=float, default=None)
@click.option("--lexicon", "lexicon_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--post", type=_ON_OFF, default=None)
@click.option("--format", "fmt", type=click.Choice(FORMATS), default=None)
@_friendly
def pipeline(
    config_path: str | None,
    dataset: str | None,
    mode: str | None,
    seed: int | None,
    out_dir: str | None,
    threshold: float | None,
    lexicon_path: str | None,
    post: str | None,
    fmt: str | None,
) -> None:
    """Run a full split/augment/tag/ensemble/evaluate pass."""
    raw = read_config(config_path) if config_path else {}
    config = config_from_mapping(
        raw,
        dataset=dataset,
        mode=mode,
        seed=seed,
        out_dir=out_dir,
        threshold=threshold,
        lexicon=lexicon_path,
        post=_switch(post),
        format=fmt,
    )
    artifacts = run_pipeline(config)
    for name in sorted(artifacts):
        click.echo(f"wrote {artifacts[name]}")
    report = json.loads(artifacts["report"].read_text("utf-8"))
    click.echo(
        "overlapping F1 {overlapping[f1]:.3f}  strict F1 {strict[f1]:.3f}".format(**report)
    )


if __name__ == "__main__":
    main()
