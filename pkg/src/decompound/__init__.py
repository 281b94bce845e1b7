"""Decompounding toolkit.

Corpus mining of self-supervised decompounding pairs, edit-distance
alignment of normalized constituents onto surface forms, dataset
construction, a frequency-based splitting baseline, compound-aware unigram
subword tokenization, and evaluation of segmentation and normalization
predictions.
"""

from importlib.metadata import PackageNotFoundError
from importlib.metadata import version as _dist_version

try:
    __version__ = _dist_version("decompound")
except PackageNotFoundError:  # running from a source tree without metadata
    __version__ = "0.0.0"

from .align import (
    AlignmentResult,
    align_bruteforce,
    align_fast,
    enumerate_offsets,
    levenshtein,
    tie_break,
    total_cost,
)
from .text import (
    Boundaries,
    CompoundEntry,
    DataError,
    DecompoundError,
    Segmentation,
    Word,
    char_len,
    slice_chars,
)

__all__ = [
    "AlignmentResult",
    "Boundaries",
    "CompoundEntry",
    "DataError",
    "DecompoundError",
    "Segmentation",
    "Word",
    "__version__",
    "align_bruteforce",
    "align_fast",
    "char_len",
    "enumerate_offsets",
    "levenshtein",
    "slice_chars",
    "tie_break",
    "total_cost",
]
