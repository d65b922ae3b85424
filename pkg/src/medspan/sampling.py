"""Bootstrap subsampling for bagged ensembles."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from ._rng import stream
from .corpus import Dataset, Tweet


@dataclass(frozen=True)
class SubsetPlan:
    """How many bootstrap subsets to draw and how large each should be."""

    k: int = 6
    sample_fraction: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"subset count must be at least 1, got {self.k}")
        if not 0.0 < self.sample_fraction <= 1.0:
            raise ValueError(
                f"sample_fraction must be in (0, 1], got {self.sample_fraction}"
            )


def bootstrap_subsets(dataset: Dataset, plan: SubsetPlan) -> list[Dataset]:
    """Draw k datasets of round(fraction * size) tweets with replacement.

    Subset size is floor-guarded to at least 1. Tweets drawn more than once
    within a subset get ids suffixed ``#dupN`` so every subset is a valid
    dataset. Each subset is deterministic per (seed, subset index).
    """
    if len(dataset) == 0:
        raise ValueError("cannot subsample an empty dataset")
    size = max(1, math.floor(Fraction(plan.sample_fraction) * len(dataset) + Fraction(1, 2)))
    subsets = []
    for index in range(plan.k):
        rng = stream(plan.seed, "subset", index)
        picks = rng.integers(0, len(dataset), size=size)
        copies_per_id: dict[str, int] = {}
        tweets = []
        for pick in picks:
            source = dataset[int(pick)]
            nth = copies_per_id.get(source.id, 0)
            copies_per_id[source.id] = nth + 1
            if nth == 0:
                tweets.append(source)
            else:
                tweets.append(
                    Tweet(f"{source.id}#dup{nth}", source.user_id, source.text, source.gold_spans)
                )
        subsets.append(Dataset(f"{dataset.name}-subset{index}", tuple(tweets)))
    return subsets
