"""Input validation helpers shared by estimators and pipeline stages."""

from __future__ import annotations

from typing import TYPE_CHECKING, Any, Iterable, Mapping, Sequence

if TYPE_CHECKING:
    from .corpus import Dataset
    from .tagging import CharProbTrack


def check_probability(value: float, name: str) -> float:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must be in [0, 1], got {value}")
    return float(value)


def check_open_unit(value: float, name: str) -> float:
    if not 0.0 < value < 1.0:
        raise ValueError(f"{name} must be in the open interval (0, 1), got {value}")
    return float(value)


def ensure_dataset(obj: Any, *, name: str = "") -> "Dataset":
    """Accept a Dataset or any iterable of Tweet and return a Dataset."""
    from .corpus import Dataset

    if isinstance(obj, Dataset):
        return obj
    if isinstance(obj, Iterable):
        return Dataset(name, tuple(obj))
    raise TypeError(f"expected a Dataset or an iterable of Tweet, got {type(obj).__name__}")


def check_same_ids(mappings: Sequence[Mapping[str, Any]]) -> tuple[str, ...]:
    """Verify all mappings share one id set; return ids in first-mapping order."""
    if not mappings:
        raise ValueError("need at least one prediction set")
    reference = tuple(mappings[0])
    reference_set = set(reference)
    for index, mapping in enumerate(mappings[1:], start=1):
        ids = set(mapping)
        if ids != reference_set:
            missing = sorted(reference_set - ids)[:3]
            extra = sorted(ids - reference_set)[:3]
            raise ValueError(
                f"prediction set {index} does not cover the same tweets as set 0"
                + (f"; missing {missing}" if missing else "")
                + (f"; unexpected {extra}" if extra else "")
            )
    return reference


def check_tracks_match(dataset: "Dataset", tracks: Mapping[str, "CharProbTrack"]) -> None:
    """Verify tracks cover exactly the dataset's tweets at the right lengths."""
    dataset_ids = {t.id for t in dataset}
    track_ids = set(tracks)
    if dataset_ids != track_ids:
        missing = sorted(dataset_ids - track_ids)[:3]
        extra = sorted(track_ids - dataset_ids)[:3]
        raise ValueError(
            "prediction tracks do not cover the dataset"
            + (f"; missing {missing}" if missing else "")
            + (f"; unexpected {extra}" if extra else "")
        )
    for tweet in dataset:
        track = tracks[tweet.id]
        if track.length != len(tweet.text):
            raise ValueError(
                f"track for tweet {tweet.id!r} has length {track.length}, "
                f"text has {len(tweet.text)} characters"
            )
