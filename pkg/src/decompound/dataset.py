"""Building a decompounding dataset from an annotated compound lexicon.

The source lexicon annotates each compound with its top-level constituents
only. Construction expands those annotations to a fixed point (constituents
that are themselves compounds get split further), derives negatives from
constituents that never head an entry of their own, and cuts deterministic
train/eval splits per language.
"""

from __future__ import annotations

import logging
import random
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

from .text import CompoundEntry, DataError, Word, nfc

logger = logging.getLogger(__name__)

MAX_EXPANSION_DEPTH = 16
MIN_LANG_SIZE = 100
EVAL_CAP = 1000

# word -> ordered top-level constituents, one language at a time
Lexicon = dict[str, tuple[str, ...]]


def load_lexicon(path: str | Path) -> dict[str, Lexicon]:
    """Parse a TSV lexicon: word, comma-joined constituents, language.

    The first occurrence of a word wins; later contradictory rows are logged
    and dropped.
    """
    by_lang: dict[str, Lexicon] = {}
    with open(path, "rb") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.decode("utf-8").rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise DataError(
                    f"{path}:{lineno}: expected word<TAB>constituents<TAB>lang, "
                    f"got {len(fields)} fields"
                )
            word, joined, lang = (nfc(f) for f in fields)
            constituents = tuple(c for c in joined.split(",") if c)
            if len(constituents) < 2:
                raise DataError(
                    f"{path}:{lineno}: {word!r} needs at least two constituents"
                )
            lexicon = by_lang.setdefault(lang, {})
            seen = lexicon.get(word)
            if seen is not None:
                if seen != constituents:
                    logger.warning(
                        "%s:%d: dropping contradictory row for %r (keeping first)",
                        path,
                        lineno,
                        word,
                    )
                continue
            lexicon[word] = constituents
    return by_lang


def recursive_split(
    lexicon: Mapping[str, Sequence[str]],
    word: str,
    *,
    max_depth: int = MAX_EXPANSION_DEPTH,
) -> tuple[str, ...]:
    """Expand a compound's constituents to a fixed point.

    A constituent equal to the word it expands from is kept as is, which
    permits entries like ``a -> a, b``. Anything deeper than ``max_depth``
    levels of expansion is reported as a cyclic entry.
    """
    if word not in lexicon:
        raise DataError(f"{word!r} is not in the lexicon")

    def expand(current: str, depth: int) -> list[str]:
        if depth > max_depth:
            raise DataError(
                f"{word!r}: constituent expansion exceeded depth {max_depth}, "
                "the lexicon is probably cyclic"
            )
        parts: list[str] = []
        for constituent in lexicon[current]:
            if constituent != current and constituent in lexicon:
                parts.extend(expand(constituent, depth + 1))
            else:
                parts.append(constituent)
        return parts

    return tuple(expand(word, 1))


def derive_negatives(lexicon: Mapping[str, Sequence[str]]) -> list[str]:
    """Constituent forms that are not compounds themselves, sorted."""
    constituents = {c for parts in lexicon.values() for c in parts}
    return sorted(constituents - set(lexicon))


def build_entries(by_lang: Mapping[str, Lexicon]) -> dict[str, list[CompoundEntry]]:
    """Expand every language's lexicon into positives plus derived negatives."""
    out: dict[str, list[CompoundEntry]] = {}
    for lang in sorted(by_lang):
        lexicon = by_lang[lang]
        expanded = {word: recursive_split(lexicon, word) for word in lexicon}
        entries = [
            CompoundEntry(Word(word, lang), parts)
            for word, parts in expanded.items()
        ]
        entries.extend(
            CompoundEntry(Word(form, lang), (form,))
            for form in derive_negatives(expanded)
        )
        out[lang] = entries
    return out


@dataclass(frozen=True)
class DatasetSplit:
    train: tuple[CompoundEntry, ...]
    eval: tuple[CompoundEntry, ...]
    dropped_languages: tuple[str, ...] = ()


def make_splits(
    entries_by_lang: Mapping[str, Sequence[CompoundEntry]],
    seed: int,
    *,
    min_lang_size: int = MIN_LANG_SIZE,
    eval_cap: int = EVAL_CAP,
) -> DatasetSplit:
    """Shuffle per language and cut an eval split off the front.

    Languages below ``min_lang_size`` entries are dropped entirely. The eval
    split takes ``min(eval_cap, N // 2)`` entries so it never exceeds half a
    language's data. The shuffle is seeded per language, so adding one
    language never reorders another.
    """
    train: list[CompoundEntry] = []
    eval_: list[CompoundEntry] = []
    dropped: list[str] = []
    for lang in sorted(entries_by_lang):
        entries = list(entries_by_lang[lang])
        if len(entries) < min_lang_size:
            dropped.append(lang)
            logger.info(
                "dropping %s: %d entries is below the minimum of %d",
                lang,
                len(entries),
                min_lang_size,
            )
            continue
        rng = random.Random(f"{seed}\x1f{lang}")
        rng.shuffle(entries)
        cut = min(eval_cap, len(entries) // 2)
        eval_.extend(entries[:cut])
        train.extend(entries[cut:])
    return DatasetSplit(tuple(train), tuple(eval_), tuple(dropped))


@dataclass(frozen=True)
class LanguageStats:
    positives: int = 0
    negatives: int = 0

    @property
    def total(self) -> int:
        return self.positives + self.negatives


def split_stats(entries: Sequence[CompoundEntry]) -> dict[str, LanguageStats]:
    counts: dict[str, list[int]] = {}
    for entry in entries:
        bucket = counts.setdefault(entry.word.lang, [0, 0])
        bucket[0 if entry.is_compound else 1] += 1
    return {
        lang: LanguageStats(positives, negatives)
        for lang, (positives, negatives) in sorted(counts.items())
    }


def dataset_stats(split: DatasetSplit) -> dict[str, dict[str, dict[str, int]]]:
    """Nested per-split, per-language counts, ready for serialization."""
    out: dict[str, dict[str, dict[str, int]]] = {}
    for name, entries in (("train", split.train), ("eval", split.eval)):
        out[name] = {
            lang: {
                "positives": stats.positives,
                "negatives": stats.negatives,
                "total": stats.total,
            }
            for lang, stats in split_stats(entries).items()
        }
    return out
