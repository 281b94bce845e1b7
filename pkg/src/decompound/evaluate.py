"""Scoring decompounding predictions against gold annotations.

A prediction is correct only when it is entirely correct. What that means
depends on the mode: exact constituent match (normalization), matching
surface boundaries (segmentation), or the head/modifier rule used for
head-annotated lexicons. Negatives are correct when the prediction is a
single constituent equal to the word, in every mode.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

from .align import AlignmentError, align_fast
from .text import CompoundEntry, DataError, nfc
from .unigram import TokenizerModel, gold_boundaries, is_hard

logger = logging.getLogger(__name__)

MODES = ("segmentation", "normalization", "germanet_head")

PredictionKey = tuple[str, str]  # (word text, lang)
Predictions = Mapping[PredictionKey, tuple[str, ...]]


def predictions_from_records(
    records: Iterable[tuple[str, str, Sequence[str]]]
) -> dict[PredictionKey, tuple[str, ...]]:
    """Index (word, lang, constituents) records; duplicate keys are an error."""
    out: dict[PredictionKey, tuple[str, ...]] = {}
    for word, lang, constituents in records:
        key = (nfc(word), lang)
        if key in out:
            raise DataError(f"duplicate prediction for {word!r} ({lang})")
        out[key] = tuple(nfc(c) for c in constituents)
    return out


@dataclass
class ClassScore:
    correct: int = 0
    total: int = 0

    def add(self, is_correct: bool) -> None:
        self.correct += int(is_correct)
        self.total += 1

    @property
    def accuracy(self) -> float | None:
        if self.total == 0:
            return None
        return 100.0 * self.correct / self.total


@dataclass
class LanguageScore:
    positives: ClassScore = field(default_factory=ClassScore)
    negatives: ClassScore = field(default_factory=ClassScore)

    @property
    def combined(self) -> ClassScore:
        return ClassScore(
            self.positives.correct + self.negatives.correct,
            self.positives.total + self.negatives.total,
        )


def _macro(values: Iterable[float | None]) -> float | None:
    present = [v for v in values if v is not None]
    if not present:
        return None
    return sum(present) / len(present)


@dataclass
class EvalReport:
    mode: str
    per_language: dict[str, LanguageScore]
    missing: int = 0

    @property
    def languages(self) -> list[str]:
        return sorted(self.per_language)

    @property
    def macro_positive(self) -> float | None:
        return _macro(self.per_language[l].positives.accuracy for l in self.languages)

    @property
    def macro_negative(self) -> float | None:
        return _macro(self.per_language[l].negatives.accuracy for l in self.languages)

    @property
    def macro_all(self) -> float | None:
        return _macro(self.per_language[l].combined.accuracy for l in self.languages)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "missing_predictions": self.missing,
            "languages": {
                lang: {
                    "positive": _class_dict(score.positives),
                    "negative": _class_dict(score.negatives),
                    "all": _class_dict(score.combined),
                }
                for lang, score in sorted(self.per_language.items())
            },
            "macro": {
                "positive": self.macro_positive,
                "negative": self.macro_negative,
                "all": self.macro_all,
            },
        }


def _class_dict(score: ClassScore) -> dict:
    return {
        "correct": score.correct,
        "total": score.total,
        "accuracy": score.accuracy,
    }


def _segmentation_matches(entry: CompoundEntry, predicted: tuple[str, ...]) -> bool:
    try:
        predicted_boundaries = align_fast(entry.word, predicted).boundaries
    except AlignmentError as exc:
        logger.warning("unalignable prediction for %r: %s", entry.word.text, exc)
        return False
    return predicted_boundaries == gold_boundaries(entry)


def is_correct(entry: CompoundEntry, predicted: Sequence[str], mode: str) -> bool:
    """Judge one prediction. ``predicted`` holds normalized constituents."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    predicted = tuple(nfc(c) for c in predicted)
    if not predicted or any(not c for c in predicted):
        return False
    if not entry.is_compound:
        return len(predicted) == 1 and predicted[0] == entry.word.text
    if mode == "normalization":
        return predicted == entry.constituents
    if mode == "germanet_head":
        # Correct when the first constituent matches the modifier or the
        # last constituent matches the head.
        return (
            predicted[0] == entry.constituents[0]
            or predicted[-1] == entry.constituents[-1]
        )
    return _segmentation_matches(entry, predicted)


def score(
    gold: Iterable[CompoundEntry], predictions: Predictions, mode: str
) -> EvalReport:
    """Score predictions against gold entries.

    Every gold entry is scored exactly once. Entries without a prediction
    count as wrong and are tallied in the report's ``missing`` field.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    report = EvalReport(mode=mode, per_language={})
    for entry in gold:
        lang_score = report.per_language.setdefault(entry.word.lang, LanguageScore())
        predicted = predictions.get((entry.word.text, entry.word.lang))
        if predicted is None:
            report.missing += 1
            logger.warning(
                "no prediction for %r (%s)", entry.word.text, entry.word.lang
            )
            correct = False
        else:
            correct = is_correct(entry, predicted, mode)
        (lang_score.positives if entry.is_compound else lang_score.negatives).add(
            correct
        )
    if not report.per_language:
        raise DataError("no gold entries to score")
    return report


@dataclass
class HardEasyBreakdown:
    easy: ClassScore
    hard: ClassScore


def hard_easy_breakdown(
    gold: Iterable[CompoundEntry],
    predictions: Predictions,
    model: TokenizerModel,
    mode: str = "segmentation",
) -> HardEasyBreakdown:
    """Positive-class accuracy split by tokenizer hardness."""
    easy, hard = ClassScore(), ClassScore()
    for entry in gold:
        if not entry.is_compound:
            continue
        predicted = predictions.get((entry.word.text, entry.word.lang))
        correct = predicted is not None and is_correct(entry, predicted, mode)
        bucket = hard if is_hard(entry.word, gold_boundaries(entry), model) else easy
        bucket.add(correct)
    return HardEasyBreakdown(easy=easy, hard=hard)


def format_report(report: EvalReport) -> str:
    """Aligned plain-text accuracy table, one column per language plus macro."""
    langs = report.languages
    columns = langs + ["macro"]
    rows = [
        ("P", [report.per_language[l].positives.accuracy for l in langs]
         + [report.macro_positive]),
        ("N", [report.per_language[l].negatives.accuracy for l in langs]
         + [report.macro_negative]),
        ("All", [report.per_language[l].combined.accuracy for l in langs]
         + [report.macro_all]),
    ]

    def cell(value: float | None) -> str:
        return "-" if value is None else f"{value:.1f}"

    widths = [
        max(len(col), *(len(cell(values[i])) for _, values in rows))
        for i, col in enumerate(columns)
    ]
    label_width = max(len(label) for label, _ in rows)
    header = " ".join(
        [" " * label_width]
        + [col.rjust(width) for col, width in zip(columns, widths)]
    )
    lines = [header]
    for label, values in rows:
        lines.append(
            " ".join(
                [label.ljust(label_width)]
                + [cell(v).rjust(w) for v, w in zip(values, widths)]
            )
        )
    return "\n".join(lines)
