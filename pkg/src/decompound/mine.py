"""Mining self-supervised decompounding pairs from raw text.

Positive pairs come from words written with an interior hyphen: the input is
the hyphen-stripped form, the target restores the hyphens. Because hyphens
also show up in line-breaking artifacts and other noise, a form only counts
as a positive when it is rare to see the same word written solid, or when
the solid form never occurs at all. Negatives are the most frequent plain
words, paired with themselves, in equal number to the positives.
"""

from __future__ import annotations

import logging
import math
import unicodedata
from collections import Counter
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from pathlib import Path

from .text import DataError, nfc

logger = logging.getLogger(__name__)

# Frequency ratio below which a hyphenated form is considered noise.
DEFAULT_RATIO_THRESHOLD = math.exp(-6)

HYPHEN = "-"


@dataclass(frozen=True)
class MineConfig:
    threshold: float = DEFAULT_RATIO_THRESHOLD
    use_ratio_filter: bool = True
    hyphens: frozenset[str] = frozenset({HYPHEN})

    def __post_init__(self) -> None:
        if self.threshold <= 0:
            raise ValueError("threshold must be positive")
        if not self.hyphens:
            raise ValueError("at least one hyphen character is required")


@dataclass
class FrequencyTable:
    """Case-sensitive word counts for one language."""

    lang: str
    counts: Counter[str] = field(default_factory=Counter)

    def merge(self, other: "FrequencyTable") -> "FrequencyTable":
        if other.lang != self.lang:
            raise ValueError(f"cannot merge tables for {self.lang!r} and {other.lang!r}")
        merged = Counter(self.counts)
        merged.update(other.counts)
        return FrequencyTable(self.lang, merged)


@dataclass(frozen=True)
class MinedPair:
    input: str
    target: str
    lang: str
    hyphenated: bool

    def __post_init__(self) -> None:
        if strip_hyphens(self.target) != self.input:
            raise ValueError(
                f"target {self.target!r} does not strip to input {self.input!r}"
            )


def strip_hyphens(text: str, hyphens: frozenset[str] = frozenset({HYPHEN})) -> str:
    for h in hyphens:
        text = text.replace(h, "")
    return text


def _canonical_token(raw: str) -> str | None:
    # NFC first, then shed leading and trailing punctuation. Interior
    # punctuation (hyphens in particular) stays untouched.
    token = nfc(raw)
    start, stop = 0, len(token)
    while start < stop and unicodedata.category(token[start]).startswith("P"):
        start += 1
    while stop > start and unicodedata.category(token[stop - 1]).startswith("P"):
        stop -= 1
    token = token[start:stop]
    return token or None


def count_words(stream: Iterable[bytes], lang: str) -> FrequencyTable:
    """Count whitespace-separated tokens, one document per line.

    The stream yields raw bytes. Lines that do not decode as UTF-8 are
    skipped with a warning naming the byte offset of the offending data.
    """
    raw_counts: Counter[str] = Counter()
    offset = 0
    for line in stream:
        try:
            decoded = line.decode("utf-8")
        except UnicodeDecodeError as exc:
            logger.warning(
                "skipping undecodable line at byte offset %d (%s)",
                offset + exc.start,
                exc.reason,
            )
        else:
            raw_counts.update(decoded.split())
        offset += len(line)

    table = FrequencyTable(lang)
    # Canonicalize once per distinct raw token; the counting above stays
    # cheap no matter how often a token repeats.
    for raw, count in raw_counts.items():
        token = _canonical_token(raw)
        if token is not None:
            table.counts[token] += count
    return table


def ratio_filter(
    freq_hyphenated: int, freq_plain: int, threshold: float = DEFAULT_RATIO_THRESHOLD
) -> bool:
    """Keep a hyphenated form iff its solid spelling is absent or rare."""
    if freq_hyphenated < 1:
        raise ValueError("hyphenated frequency must be at least 1")
    if freq_plain < 0:
        raise ValueError("plain frequency must not be negative")
    if freq_plain == 0:
        return True
    return freq_hyphenated / freq_plain > threshold


def _is_digit(ch: str) -> bool:
    return unicodedata.category(ch).startswith("N")


def _positive_shape_ok(form: str, hyphens: frozenset[str]) -> bool:
    if form[0] in hyphens or form[-1] in hyphens:
        return False
    previous_hyphen = False
    for ch in form:
        if ch in hyphens:
            if previous_hyphen:
                return False  # doubled hyphen
            previous_hyphen = True
            continue
        previous_hyphen = False
        if _is_digit(ch) or unicodedata.category(ch).startswith("P"):
            return False
    return True


def _negative_shape_ok(form: str) -> bool:
    return not any(
        _is_digit(ch) or unicodedata.category(ch).startswith("P") for ch in form
    )


def mine_pairs(table: FrequencyTable, config: MineConfig = MineConfig()) -> list[MinedPair]:
    """Extract positive and negative pairs from a frequency table.

    Returns positives followed by an equal number of negatives, each group
    ordered by descending frequency with lexicographic tie-breaking.
    """
    if not table.counts:
        raise DataError(f"{table.lang}: empty frequency table")
    hyphens = config.hyphens

    positives: list[tuple[int, str, str]] = []
    for form, count in table.counts.items():
        if not any(h in form for h in hyphens):
            continue
        if not _positive_shape_ok(form, hyphens):
            continue
        plain = strip_hyphens(form, hyphens)
        if config.use_ratio_filter and not ratio_filter(
            count, table.counts.get(plain, 0), config.threshold
        ):
            continue
        positives.append((count, form, plain))
    positives.sort(key=lambda item: (-item[0], item[1]))

    taken = {plain for _, _, plain in positives}
    candidates = [
        (count, form)
        for form, count in table.counts.items()
        if form not in taken
        and not any(h in form for h in hyphens)
        and _negative_shape_ok(form)
    ]
    candidates.sort(key=lambda item: (-item[0], item[1]))
    if len(candidates) < len(positives):
        raise DataError(
            f"{table.lang}: need {len(positives)} negatives but only "
            f"{len(candidates)} plain forms are available"
        )

    pairs = [
        MinedPair(plain, form, table.lang, True) for _, form, plain in positives
    ]
    pairs.extend(
        MinedPair(form, form, table.lang, False)
        for _, form in candidates[: len(positives)]
    )
    return pairs


def write_table(table: FrequencyTable, path: str | Path) -> None:
    """Persist as TSV, most frequent first, ties in form order."""
    rows = sorted(table.counts.items(), key=lambda item: (-item[1], item[0]))
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for form, count in rows:
            handle.write(f"{form}\t{count}\n")


def read_table(path: str | Path, lang: str) -> FrequencyTable:
    table = FrequencyTable(lang)
    with open(path, "rb") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.decode("utf-8").rstrip("\n")
            if not line:
                continue
            form, sep, count_text = line.partition("\t")
            if not sep or not form:
                raise DataError(f"{path}:{lineno}: expected form<TAB>count")
            try:
                count = int(count_text)
            except ValueError:
                raise DataError(f"{path}:{lineno}: bad count {count_text!r}") from None
            if count < 1:
                raise DataError(f"{path}:{lineno}: counts must be positive")
            table.counts[nfc(form)] += count
    return table


def iter_shards(paths: Iterable[str | Path], lang: str) -> Iterator[FrequencyTable]:
    for path in paths:
        with open(path, "rb") as handle:
            yield count_words(handle, lang)
