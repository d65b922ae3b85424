"""Run a model over a tweet file and emit a prediction file."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

from .models import TokenModel, load_model
from .tracks import serialize_record, track_record


class DatasetError(ValueError):
    """A tweet file line is not usable."""


def read_tweets(path: str | Path) -> list[tuple[str, str]]:
    """Read (id, text) pairs from tweet JSONL; span fields are ignored."""
    path = Path(path)
    pairs: list[tuple[str, str]] = []
    seen = set()
    for line_no, line in enumerate(path.read_text("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"{path.name}: line {line_no}: invalid JSON: {exc.msg}") from None
        if not isinstance(record, dict):
            raise DatasetError(f"{path.name}: line {line_no}: expected an object per line")
        tweet_id, text = record.get("id"), record.get("text")
        if not isinstance(tweet_id, str) or not tweet_id:
            raise DatasetError(f"{path.name}: line {line_no}: 'id' must be a non-empty string")
        if not isinstance(text, str):
            raise DatasetError(f"{path.name}: line {line_no}: 'text' must be a string")
        if tweet_id in seen:
            raise DatasetError(f"{path.name}: line {line_no}: duplicate tweet id {tweet_id!r}")
        seen.add(tweet_id)
        pairs.append((tweet_id, text))
    return pairs


def write_atomic(path: str | Path, data: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def adapt(model: TokenModel | str, dataset_path: str | Path, out_path: str | Path) -> int:
    """Predict tracks for every tweet in dataset_path and write them to
    out_path (atomically; readers never see a partial file). Returns the
    number of tweets written."""
    if isinstance(model, str):
        model = load_model(model)
    tweets = read_tweets(dataset_path)
    predictions = model.predict_many([text for _, text in tweets])
    lines = [
        serialize_record(track_record(tweet_id, text, tokens))
        for (tweet_id, text), tokens in zip(tweets, predictions)
    ]
    write_atomic(out_path, "".join(line + "\n" for line in lines).encode("utf-8"))
    return len(lines)
