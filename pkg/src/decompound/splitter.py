"""Frequency-driven compound splitting and the segmenter interface.

The baseline splitter scores every way of cutting a word into up to
``max_parts`` parts by the geometric mean of the parts' corpus frequencies,
with the unsplit word competing as its own one-part candidate. A part may
shed one trailing linking morpheme before lookup, so ``arbeitsmarkt`` can
resolve to ``arbeit + markt``. Comparisons use exact integer arithmetic, so
ties resolve the same way on every platform.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from itertools import combinations
from typing import Protocol

from .align import align_fast
from .mine import FrequencyTable
from .text import Boundaries, Word, nfc, unsplit_boundaries

DEFAULT_MIN_PART_LEN = 3
DEFAULT_LINKING_MORPHEMES = frozenset({"", "s", "es"})
DEFAULT_MAX_PARTS = 4


@dataclass(frozen=True)
class SplitterConfig:
    min_part_len: int = DEFAULT_MIN_PART_LEN
    linking_morphemes: frozenset[str] = DEFAULT_LINKING_MORPHEMES
    max_parts: int = DEFAULT_MAX_PARTS

    def __post_init__(self) -> None:
        if self.min_part_len < 1:
            raise ValueError("min_part_len must be at least 1")
        if self.max_parts < 1:
            raise ValueError("max_parts must be at least 1")
        if "" not in self.linking_morphemes:
            raise ValueError('linking_morphemes must include the empty morpheme ""')


class Segmenter(Protocol):
    """Anything that can place boundaries in a word."""

    def boundaries(self, word: Word) -> Boundaries: ...


@dataclass(frozen=True)
class SplitResult:
    boundaries: Boundaries
    constituents: tuple[str, ...]

    @property
    def is_split(self) -> bool:
        return len(self.constituents) >= 2


def _normalize_part(
    part: str, counts: Mapping[str, int], morphemes: Sequence[str]
) -> tuple[int, str] | None:
    # Pick the normalization with the highest frequency; the morpheme list
    # comes pre-sorted (shortest first), so ties keep the shorter morpheme.
    best: tuple[int, str] | None = None
    for morpheme in morphemes:
        if morpheme and not part.endswith(morpheme):
            continue
        base = part[: len(part) - len(morpheme)] if morpheme else part
        if not base:
            continue
        count = counts.get(base, 0)
        if count >= 1 and (best is None or count > best[0]):
            best = (count, base)
    return best


def _beats(
    challenger: tuple[int, int, tuple[int, ...]],
    champion: tuple[int, int, tuple[int, ...]],
) -> bool:
    """Exact comparison of (frequency product, part count, cuts) candidates.

    Geometric means compare as ``product_a ** k_b`` versus
    ``product_b ** k_a``; ties prefer fewer parts, then smaller cuts.
    """
    prod_a, k_a, cuts_a = challenger
    prod_b, k_b, cuts_b = champion
    lhs, rhs = prod_a**k_b, prod_b**k_a
    if lhs != rhs:
        return lhs > rhs
    if k_a != k_b:
        return k_a < k_b
    return cuts_a < cuts_b


def freq_split(
    word: Word, table: FrequencyTable, config: SplitterConfig = SplitterConfig()
) -> SplitResult:
    """Split a word by part frequencies, or leave it whole."""
    text = word.text
    n = len(text)
    counts = table.counts
    morphemes = sorted(config.linking_morphemes, key=lambda m: (len(m), m))

    champion = (counts.get(text, 0), 1, ())  # the unsplit candidate
    champion_parts: tuple[str, ...] = (text,)

    for k in range(2, config.max_parts + 1):
        if k * config.min_part_len > n:
            break
        for cuts in combinations(range(1, n), k - 1):
            edges = (0, *cuts, n)
            if any(
                b - a < config.min_part_len for a, b in zip(edges, edges[1:])
            ):
                continue
            product = 1
            parts: list[str] = []
            for i, (a, b) in enumerate(zip(edges, edges[1:])):
                surface = text[a:b]
                if i < k - 1:
                    resolved = _normalize_part(surface, counts, morphemes)
                else:
                    count = counts.get(surface, 0)
                    resolved = (count, surface) if count >= 1 else None
                if resolved is None:
                    break
                product *= resolved[0]
                parts.append(resolved[1])
            else:
                candidate = (product, k, cuts)
                if _beats(candidate, champion):
                    champion = candidate
                    champion_parts = tuple(parts)

    cuts = champion[2]
    return SplitResult(Boundaries((0, *cuts, n)), champion_parts)


@dataclass(frozen=True)
class FrequencySegmenter:
    """Segmenter backed by the frequency splitter."""

    table: FrequencyTable
    config: SplitterConfig = SplitterConfig()

    def boundaries(self, word: Word) -> Boundaries:
        return freq_split(word, self.table, self.config).boundaries

    def split(self, word: Word) -> SplitResult:
        return freq_split(word, self.table, self.config)


def segment_with_predictions(
    word: Word, constituents: Sequence[str]
) -> Boundaries:
    """Surface boundaries for predicted (normalized) constituents."""
    return align_fast(word, tuple(constituents)).boundaries


class ConstituentSegmenter:
    """Segmenter looking words up in a word -> constituents mapping.

    Works for gold annotations and model predictions alike. Words without an
    entry stay unsplit.
    """

    def __init__(self, constituents_by_word: Mapping[str, Sequence[str]]):
        self._table = {
            nfc(word): tuple(nfc(c) for c in parts)
            for word, parts in constituents_by_word.items()
        }

    def boundaries(self, word: Word) -> Boundaries:
        parts = self._table.get(word.text)
        if parts is None or len(parts) < 2:
            return unsplit_boundaries(len(word))
        return segment_with_predictions(word, parts)
