"""Hyperparameter search: exhaustive grids and a Tree of Parzen Estimators.

Both methods maximize a black-box objective over a box-bounded continuous
space. The TPE splits past trials at the gamma quantile of the objective,
fits per-dimension kernel density estimates to the good and remaining
sets, and suggests the candidate maximizing the good/rest density ratio.
Suggestions are deterministic per (seed, trial index), which makes
interrupted runs resumable from their trial log without drift.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from itertools import islice, product
from pathlib import Path
from typing import Callable, Iterator, Mapping, Sequence

import numpy as np
from scipy.stats import truncnorm

from ._rng import stream
from .exceptions import FormatError

METHODS = ("grid", "tpe")


@dataclass(frozen=True)
class Dimension:
    """One continuous search dimension with inclusive bounds."""

    name: str
    low: float
    high: float

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("dimension name must be non-empty")
        if not (math.isfinite(self.low) and math.isfinite(self.high)):
            raise ValueError(f"bounds of {self.name!r} must be finite")
        if self.low >= self.high:
            raise ValueError(
                f"dimension {self.name!r} needs low < high, got [{self.low}, {self.high}]"
            )

    @property
    def range(self) -> float:
        return self.high - self.low


@dataclass(frozen=True)
class SearchSpace:
    dimensions: tuple[Dimension, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "dimensions", tuple(self.dimensions))
        if not self.dimensions:
            raise ValueError("search space needs at least one dimension")
        names = [d.name for d in self.dimensions]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate dimension names in {names}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.dimensions)

    def vector_of(self, params: Mapping[str, float]) -> np.ndarray:
        return np.array([params[d.name] for d in self.dimensions], dtype=float)

    def params_of(self, vector: Sequence[float]) -> dict[str, float]:
        return {d.name: float(v) for d, v in zip(self.dimensions, vector)}


@dataclass(frozen=True)
class TrialRecord:
    index: int
    params: dict[str, float]
    objective: float

    def __post_init__(self) -> None:
        if self.index < 0:
            raise ValueError(f"trial index must be non-negative, got {self.index}")
        if not math.isfinite(self.objective):
            raise ValueError(f"objective must be finite, got {self.objective}")


@dataclass(frozen=True)
class TPEConfig:
    gamma: float = 0.25
    n_startup: int = 20
    n_candidates: int = 24

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must be in (0, 1), got {self.gamma}")
        if self.n_startup < 1:
            raise ValueError(f"n_startup must be at least 1, got {self.n_startup}")
        if self.n_candidates < 1:
            raise ValueError(f"n_candidates must be at least 1, got {self.n_candidates}")


class ObjectiveError(RuntimeError):
    """Objective evaluation failed; carries the offending parameters."""

    def __init__(self, params: Mapping[str, float], cause: BaseException) -> None:
        self.params = dict(params)
        super().__init__(f"objective evaluation failed at {self.params}: {cause}")


def _evaluated(objective: Callable[[Mapping[str, float]], float], params: dict[str, float]) -> float:
    try:
        value = float(objective(params))
    except Exception as exc:
        raise ObjectiveError(params, exc) from exc
    if not math.isfinite(value):
        raise ObjectiveError(params, ValueError(f"objective returned {value}"))
    return value


# ---------------------------------------------------------------------------
# Grid search


def grid_axes(space: SearchSpace, resolution: int | Sequence[int]) -> list[np.ndarray]:
    if isinstance(resolution, int):
        resolutions = [resolution] * len(space.dimensions)
    else:
        resolutions = list(resolution)
        if len(resolutions) != len(space.dimensions):
            raise ValueError(
                f"got {len(resolutions)} resolutions for {len(space.dimensions)} dimensions"
            )
    for r in resolutions:
        if r < 2:
            raise ValueError(f"grid resolution must be at least 2 per dimension, got {r}")
    return [
        np.linspace(d.low, d.high, r) for d, r in zip(space.dimensions, resolutions)
    ]


def iter_grid(space: SearchSpace, resolution: int | Sequence[int]) -> Iterator[dict[str, float]]:
    """Full Cartesian grid in lexicographic order of the parameter vector."""
    axes = grid_axes(space, resolution)
    for vector in product(*axes):
        yield space.params_of(vector)


def grid_search(
    space: SearchSpace,
    resolution: int | Sequence[int],
    objective: Callable[[Mapping[str, float]], float],
) -> TrialRecord:
    """Evaluate the whole grid; ties go to the lexicographically smallest vector."""
    best: TrialRecord | None = None
    for index, params in enumerate(iter_grid(space, resolution)):
        value = _evaluated(objective, params)
        if best is None or value > best.objective:
            best = TrialRecord(index, params, value)
    assert best is not None
    return best


# ---------------------------------------------------------------------------
# Tree of Parzen Estimators


def _uniform_point(space: SearchSpace, rng: np.random.Generator) -> dict[str, float]:
    return {d.name: float(rng.uniform(d.low, d.high)) for d in space.dimensions}


def _split_history(
    history: Sequence[TrialRecord], gamma: float
) -> tuple[list[TrialRecord], list[TrialRecord]]:
    order = sorted(range(len(history)), key=lambda i: (-history[i].objective, i))
    n_good = math.ceil(gamma * len(history))
    good_indices = set(order[:n_good])
    good = [history[i] for i in sorted(good_indices)]
    rest = [history[i] for i in range(len(history)) if i not in good_indices]
    return good, rest


def _bandwidths(observations: np.ndarray, dim: Dimension) -> np.ndarray:
    """Per-observation kernel widths from sorted-neighbor distances.

    Each observation's width is the larger of its distances to the sorted
    left and right neighbors, clipped to [0.01 * range, range]. A lone
    observation gets the full range.
    """
    if observations.size == 1:
        return np.array([dim.range])
    order = np.argsort(observations, kind="stable")
    sorted_obs = observations[order]
    gaps = np.diff(sorted_obs)
    left = np.concatenate(([np.nan], gaps))
    right = np.concatenate((gaps, [np.nan]))
    widest = np.fmax(left, right)
    clipped = np.clip(widest, 0.01 * dim.range, dim.range)
    out = np.empty_like(clipped)
    out[order] = clipped
    return out


def _parzen_pdf(
    x: np.ndarray, observations: np.ndarray, widths: np.ndarray, dim: Dimension
) -> np.ndarray:
    """Density of the kernel mixture blended with the uniform prior.

    The prior counts as one extra component, so the mixture stays bounded
    away from zero everywhere inside the box.
    """
    uniform = 1.0 / dim.range
    if observations.size == 0:
        return np.full(np.shape(x), uniform)
    a = (dim.low - observations) / widths
    b = (dim.high - observations) / widths
    kernels = truncnorm.pdf(
        np.asarray(x)[..., None], a, b, loc=observations, scale=widths
    )
    return (uniform + kernels.sum(axis=-1)) / (observations.size + 1)


def _sample_parzen(
    rng: np.random.Generator,
    count: int,
    observations: np.ndarray,
    widths: np.ndarray,
    dim: Dimension,
) -> np.ndarray:
    components = rng.integers(0, observations.size + 1, size=count)
    quantiles = rng.random(count)
    out = np.empty(count)
    for i in range(count):
        c = int(components[i])
        if c == 0:
            out[i] = dim.low + quantiles[i] * dim.range
        else:
            mu, sigma = observations[c - 1], widths[c - 1]
            a, b = (dim.low - mu) / sigma, (dim.high - mu) / sigma
            out[i] = truncnorm.ppf(quantiles[i], a, b, loc=mu, scale=sigma)
    return np.clip(out, dim.low, dim.high)


def tpe_suggest(
    history: Sequence[TrialRecord],
    space: SearchSpace,
    config: TPEConfig = TPEConfig(),
    seed: int = 0,
) -> dict[str, float]:
    """Suggest the next point to evaluate.

    Before n_startup trials exist, points are drawn uniformly. Afterwards
    candidates are sampled from the good-set density and ranked by the
    good/rest density ratio. Deterministic per (seed, len(history)).
    """
    rng = stream(seed, "tpe", len(history))
    if len(history) < config.n_startup:
        return _uniform_point(space, rng)
    objectives = [record.objective for record in history]
    if all(value == objectives[0] for value in objectives):
        warnings.warn("all recorded objectives are identical; sampling uniformly")
        return _uniform_point(space, rng)
    good, rest = _split_history(history, config.gamma)
    log_ratio = np.zeros(config.n_candidates)
    candidates = np.empty((config.n_candidates, len(space.dimensions)))
    for d, dim in enumerate(space.dimensions):
        good_obs = np.array([r.params[dim.name] for r in good])
        rest_obs = np.array([r.params[dim.name] for r in rest])
        good_widths = _bandwidths(good_obs, dim)
        rest_widths = _bandwidths(rest_obs, dim)
        xs = _sample_parzen(rng, config.n_candidates, good_obs, good_widths, dim)
        candidates[:, d] = xs
        log_ratio += np.log(_parzen_pdf(xs, good_obs, good_widths, dim))
        log_ratio -= np.log(_parzen_pdf(xs, rest_obs, rest_widths, dim))
    return space.params_of(candidates[int(np.argmax(log_ratio))])


# ---------------------------------------------------------------------------
# Driver and trial log


def optimize(
    space: SearchSpace,
    objective: Callable[[Mapping[str, float]], float],
    *,
    method: str,
    budget: int,
    seed: int = 0,
    resolution: int | Sequence[int] | None = None,
    tpe: TPEConfig = TPEConfig(),
    log_path: str | Path | None = None,
    resume: bool = False,
) -> tuple[TrialRecord, list[TrialRecord]]:
    """Run a search for up to `budget` evaluations and return (best, history).

    Grid search walks the grid in lexicographic order and stops early when
    the budget runs out. With a log path every trial is appended as a JSON
    line; resume=True continues from whatever the log already holds and
    reproduces the uninterrupted run exactly.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}, expected one of {METHODS}")
    if budget < 1:
        raise ValueError(f"budget must be at least 1, got {budget}")
    history: list[TrialRecord] = []
    if log_path is not None and resume and Path(log_path).exists():
        history = read_trial_log(log_path)

    def run(params: dict[str, float]) -> None:
        record = TrialRecord(len(history), params, _evaluated(objective, params))
        history.append(record)
        if log_path is not None:
            append_trial(log_path, record)

    if method == "grid":
        if resolution is None:
            raise ValueError("grid search needs a resolution")
        points = islice(iter_grid(space, resolution), len(history), budget)
        for params in points:
            run(params)
    else:
        while len(history) < budget:
            run(tpe_suggest(history, space, tpe, seed))
    if not history:
        raise ValueError("search produced no trials; budget may be below the resumed log size")
    best = max(history, key=lambda r: (r.objective, -r.index))
    return best, history


def append_trial(path: str | Path, record: TrialRecord) -> None:
    line = json.dumps(
        {"trial": record.index, "params": record.params, "objective": record.objective},
        ensure_ascii=False,
        separators=(",", ":"),
    )
    with open(path, "a", encoding="utf-8", newline="\n") as handle:
        handle.write(line + "\n")


def read_trial_log(path: str | Path) -> list[TrialRecord]:
    path = Path(path)
    records: list[TrialRecord] = []
    for line_no, line in enumerate(path.read_text("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc.msg}", line=line_no, source=str(path)) from None
        if not isinstance(raw, dict) or set(raw) != {"trial", "params", "objective"}:
            raise FormatError(
                "trial record needs exactly the keys trial, params, objective",
                line=line_no,
                source=str(path),
            )
        if not isinstance(raw["params"], dict):
            raise FormatError("'params' must be an object", line=line_no, source=str(path))
        try:
            record = TrialRecord(
                int(raw["trial"]),
                {k: float(v) for k, v in raw["params"].items()},
                float(raw["objective"]),
            )
        except (TypeError, ValueError) as exc:
            raise FormatError(str(exc), line=line_no, source=str(path)) from None
        if record.index != len(records):
            raise FormatError(
                f"trial indices must be sequential; expected {len(records)}, got {record.index}",
                line=line_no,
                source=str(path),
            )
        records.append(record)
    return records


def ensemble_search_space(
    n_models: int, threshold_bounds: tuple[float, float] = (0.05, 0.95)
) -> SearchSpace:
    """Weights w0..wN in [0, 1] plus the decision threshold."""
    if n_models < 1:
        raise ValueError(f"need at least one model, got {n_models}")
    low, high = threshold_bounds
    if not 0.0 < low < high < 1.0:
        raise ValueError(f"threshold bounds must satisfy 0 < low < high < 1, got {threshold_bounds}")
    dims = [Dimension(f"w{i}", 0.0, 1.0) for i in range(n_models)]
    dims.append(Dimension("threshold", low, high))
    return SearchSpace(tuple(dims))
