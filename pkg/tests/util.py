"""Independent reference implementations the tests check against.

Everything here is deliberately written the slow, obvious way, with no
imports from the package under test, so a bug in the package cannot hide
in its own oracle.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction


def levenshtein(a: str, b: str) -> int:
    """Full dynamic-programming edit distance."""
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(
                    previous[j] + 1,
                    current[j - 1] + 1,
                    previous[j - 1] + (ca != cb),
                )
            )
        previous = current
    return previous[-1]


def max_matching(
    gold: list[tuple[int, int]],
    pred: list[tuple[int, int]],
    *,
    strict: bool,
) -> int:
    """Maximum one-to-one matching size, by brute force over injections.

    Feasible for the small span counts used in tests (≤ 6 per side).
    """

    def compatible(g: tuple[int, int], p: tuple[int, int]) -> bool:
        if strict:
            return g == p
        return g[0] < p[1] and p[0] < g[1]

    # compatible() is symmetric, so matching from the smaller side suffices
    smaller, larger = sorted((gold, pred), key=len)
    best = 0
    for assignment in itertools.permutations(range(len(larger)), len(smaller)):
        size = sum(1 for i, j in enumerate(assignment) if compatible(smaller[i], larger[j]))
        best = max(best, size)
    return best


def char_scores(
    tracks: list[list[float]], weights: list[float]
) -> list[float]:
    """Naive per-character weighted mean over dense probability rows."""
    total = sum(weights)
    length = len(tracks[0])
    out = []
    for position in range(length):
        numer = sum(w * row[position] for w, row in zip(weights, tracks))
        out.append(numer / total)
    return out


def spans_from_scores(scores: list[float], threshold: float) -> list[tuple[int, int]]:
    """Maximal runs where score >= threshold, by linear scan."""
    spans = []
    start = None
    for index, value in enumerate(scores):
        if value >= threshold:
            if start is None:
                start = index
        elif start is not None:
            spans.append((start, index))
            start = None
    if start is not None:
        spans.append((start, len(scores)))
    return spans


def minimal_upsample_copies(n_pos: int, n_total: int, target: float) -> int:
    """Smallest duplicate count reaching the target ratio, by counting up."""
    target_fraction = Fraction(target)
    copies = 0
    while Fraction(n_pos + copies, n_total + copies) < target_fraction:
        copies += 1
    return copies


def truncnorm_pdf(x: float, low: float, high: float, loc: float, scale: float) -> float:
    """Truncated-normal density via the error function."""

    def phi(z: float) -> float:
        return math.exp(-z * z / 2) / math.sqrt(2 * math.pi)

    def cdf(z: float) -> float:
        return (1 + math.erf(z / math.sqrt(2))) / 2

    if not low <= x <= high:
        return 0.0
    a = (low - loc) / scale
    b = (high - loc) / scale
    z = (x - loc) / scale
    return phi(z) / (scale * (cdf(b) - cdf(a)))


def parzen_density(
    x: float,
    observations: list[float],
    widths: list[float],
    low: float,
    high: float,
) -> float:
    """Uniform prior mixed with one truncated-Gaussian kernel per point."""
    total = 1.0 / (high - low)
    for center, width in zip(observations, widths):
        total += truncnorm_pdf(x, low, high, center, width)
    return total / (len(observations) + 1)
