"""Shared text conventions and domain types.

Every offset, length and boundary in this package counts Unicode scalar
values, never bytes. Text is NFC-normalized the moment it enters a domain
type, so downstream equality checks do not depend on which source a string
came from.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass


class DecompoundError(Exception):
    """Base class for errors raised by this package."""


class DataError(DecompoundError):
    """Malformed input data: a bad file, record or field."""


_LANG_RE = re.compile(r"[a-z]{2,3}")


def nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def char_len(text: str) -> int:
    """Number of Unicode scalar values in ``text``."""
    return len(text)


def slice_chars(text: str, start: int, stop: int) -> str:
    """Scalar values ``start..stop`` (half-open). Out-of-range indices raise."""
    if not 0 <= start <= stop <= len(text):
        raise ValueError(
            f"slice [{start}:{stop}] out of range for text of length {len(text)}"
        )
    return text[start:stop]


@dataclass(frozen=True, slots=True)
class Word:
    """A single whitespace-free token tagged with its language."""

    text: str
    lang: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "text", nfc(self.text))
        if not self.text:
            raise ValueError("word text must be non-empty")
        if any(ch.isspace() for ch in self.text):
            raise ValueError(f"word text must not contain whitespace: {self.text!r}")
        if not _LANG_RE.fullmatch(self.lang):
            raise ValueError(
                f"lang must be a lowercase two or three letter code, got {self.lang!r}"
            )

    def __len__(self) -> int:
        return len(self.text)


@dataclass(frozen=True, slots=True)
class CompoundEntry:
    """A word together with its ordered normalized constituents.

    Entries with two or more constituents are compounds. A non-compound
    carries exactly one constituent, the word itself.
    """

    word: Word
    constituents: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "constituents", tuple(nfc(c) for c in self.constituents)
        )
        if not self.constituents:
            raise ValueError(f"{self.word.text!r}: constituent list must be non-empty")
        if any(not c for c in self.constituents):
            raise ValueError(f"{self.word.text!r}: constituents must be non-empty")
        if len(self.constituents) == 1 and self.constituents[0] != self.word.text:
            raise ValueError(
                f"{self.word.text!r}: a non-compound entry must list the word "
                f"itself as its only constituent, got {self.constituents[0]!r}"
            )

    @property
    def is_compound(self) -> bool:
        return len(self.constituents) >= 2


@dataclass(frozen=True, slots=True)
class Boundaries:
    """Strictly increasing cut positions ``0 = r0 < r1 < ... < rk``.

    The first index is always 0 and the last one is the length of the word
    the boundaries belong to; interior indices are the actual cuts.
    """

    indices: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "indices", tuple(self.indices))
        if len(self.indices) < 2:
            raise ValueError("boundaries need at least a start and an end index")
        if self.indices[0] != 0:
            raise ValueError(f"boundaries must start at 0, got {self.indices[0]}")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise ValueError(f"boundary indices must be strictly increasing: {self.indices}")

    @property
    def end(self) -> int:
        return self.indices[-1]

    @property
    def segment_count(self) -> int:
        return len(self.indices) - 1

    def __iter__(self):
        return iter(self.indices)


def unsplit_boundaries(length: int) -> Boundaries:
    """The one-segment boundaries of a word of the given length."""
    return Boundaries((0, length))


@dataclass(frozen=True, slots=True)
class Segmentation:
    """A word cut into contiguous non-empty segments."""

    word: Word
    boundaries: Boundaries

    def __post_init__(self) -> None:
        if self.boundaries.end != len(self.word):
            raise ValueError(
                f"boundaries end at {self.boundaries.end} but "
                f"{self.word.text!r} has length {len(self.word)}"
            )

    @property
    def segments(self) -> tuple[str, ...]:
        text = self.word.text
        ix = self.boundaries.indices
        return tuple(text[a:b] for a, b in zip(ix, ix[1:]))
