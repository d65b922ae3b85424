"""Drug-name lexicons with per-source occurrence counts.

A lexicon remembers where each entry came from ("corpus" for names observed
as gold spans, "manual" for curated lists) and how often it was seen. Entry
strings keep their original casing; lookups and counting fold case.
"""

from __future__ import annotations

from collections import Counter
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Mapping

from .exceptions import FormatError

if TYPE_CHECKING:
    from .corpus import Dataset

CORPUS = "corpus"
MANUAL = "manual"


class Lexicon:
    """Immutable multiset of drug names tagged with their sources."""

    def __init__(self, entries: Iterable[tuple[str, str]] = ()) -> None:
        counts: dict[str, Counter[str]] = {}
        for name, source in entries:
            if not name or not name.strip():
                raise ValueError("lexicon entries must not be empty or whitespace-only")
            counts.setdefault(name, Counter())[source] += 1
        self._counts: Mapping[str, Counter[str]] = counts
        self._folded: dict[str, list[str]] = {}
        for name in counts:
            self._folded.setdefault(name.casefold(), []).append(name)

    @classmethod
    def from_file(cls, path: str | Path) -> Lexicon:
        """Read a manual drug list: one name per line, '#' starts a comment line."""
        path = Path(path)
        entries = []
        for line_no, line in enumerate(path.read_text("utf-8").splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            entries.append((stripped, MANUAL))
        if not entries:
            raise FormatError("drug list contains no entries", source=str(path))
        return cls(entries)

    @classmethod
    def from_dataset(cls, dataset: Dataset) -> Lexicon:
        """Collect gold-span surfaces as corpus entries, one count per occurrence.

        Whitespace-only surfaces are skipped; they cannot act as drug names.
        """
        entries = []
        for tweet in dataset:
            for surface in tweet.surfaces():
                if surface.strip():
                    entries.append((surface, CORPUS))
        return cls(entries)

    def __len__(self) -> int:
        return len(self._counts)

    def __contains__(self, name: str) -> bool:
        return name.casefold() in self._folded

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Lexicon):
            return NotImplemented
        return self._counts == other._counts

    def __repr__(self) -> str:
        return f"Lexicon({len(self)} entries)"

    def __or__(self, other: Lexicon) -> Lexicon:
        return Lexicon(list(self._pairs()) + list(other._pairs()))

    def _pairs(self) -> Iterable[tuple[str, str]]:
        for name, sources in self._counts.items():
            for source, count in sources.items():
                for _ in range(count):
                    yield name, source

    @property
    def entries(self) -> frozenset[str]:
        return frozenset(self._counts)

    def sorted_entries(self) -> tuple[str, ...]:
        return tuple(sorted(self._counts))

    def count(self, name: str) -> int:
        """Total occurrences across sources, matching case-insensitively."""
        total = 0
        for variant in self._folded.get(name.casefold(), ()):
            total += sum(self._counts[variant].values())
        return total

    def sources(self, name: str) -> frozenset[str]:
        found: set[str] = set()
        for variant in self._folded.get(name.casefold(), ()):
            found.update(self._counts[variant])
        return frozenset(found)
