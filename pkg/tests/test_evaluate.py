import math

import pytest

from decompound.evaluate import (
    ClassScore,
    format_report,
    hard_easy_breakdown,
    is_correct,
    predictions_from_records,
    score,
)
from decompound.text import CompoundEntry, DataError, Word
from decompound.unigram import TokenizerModel


def entry(word, constituents, lang="en"):
    return CompoundEntry(Word(word, lang), tuple(constituents))


# ------------------------------------------------------------- is_correct


def test_normalization_requires_exact_constituents():
    e = entry("bridesmaid", ("bride", "maid"))
    assert is_correct(e, ("bride", "maid"), "normalization")
    assert not is_correct(e, ("brides", "maid"), "normalization")
    assert not is_correct(e, ("bride", "maid", "x"), "normalization")


def test_segmentation_compares_surface_boundaries():
    e = entry("bridesmaid", ("bride", "maid"))
    # Both normalize to the same surface cut (0, 6, 10).
    assert is_correct(e, ("bride", "maid"), "segmentation")
    assert is_correct(e, ("brides", "maid"), "segmentation")
    assert not is_correct(e, ("bri", "desmaid"), "segmentation")


def test_segmentation_rejects_unalignable_prediction(caplog):
    # eleven constituents cannot map onto ten characters
    e = entry("bridesmaid", ("bride", "maid"))
    parts = tuple("bridesmaid") + ("x",)
    with caplog.at_level("WARNING"):
        assert not is_correct(e, parts, "segmentation")
    assert any("unalignable" in r.message for r in caplog.records)


def test_germanet_head_accepts_modifier_or_head_match():
    e = entry("kunstausstellung", ("kunst", "ausstellung"), "de")
    assert is_correct(e, ("kunst", "ausstellung"), "germanet_head")
    assert is_correct(e, ("kunst", "wrong"), "germanet_head")  # modifier hits
    assert is_correct(e, ("wrong", "ausstellung"), "germanet_head")  # head hits
    assert not is_correct(e, ("wrong", "alsowrong"), "germanet_head")


def test_negatives_need_identity_in_every_mode():
    e = entry("maid", ("maid",))
    for mode in ("segmentation", "normalization", "germanet_head"):
        assert is_correct(e, ("maid",), mode)
        assert not is_correct(e, ("ma", "id"), mode)
        assert not is_correct(e, ("other",), mode)


def test_empty_predictions_are_wrong():
    e = entry("bridesmaid", ("bride", "maid"))
    assert not is_correct(e, (), "normalization")
    assert not is_correct(e, ("bride", ""), "normalization")


def test_is_correct_normalizes_prediction_text():
    e = entry("caféhaus", ("café", "haus"), "de")
    assert is_correct(e, ("café", "haus"), "normalization")


def test_unknown_mode_is_rejected():
    with pytest.raises(ValueError):
        is_correct(entry("ab", ("a", "b")), ("a", "b"), "exact")


# ------------------------------------------------------------------ score


def fixture_gold():
    return [
        entry("bridesmaid", ("bride", "maid")),
        entry("highwayman", ("high", "way", "man")),
        entry("maid", ("maid",)),
        entry("hausboot", ("haus", "boot"), "de"),
        entry("boot", ("boot",), "de"),
    ]


def test_gold_as_predictions_scores_everything_correct():
    gold = fixture_gold()
    predictions = {
        (e.word.text, e.word.lang): e.constituents for e in gold
    }
    for mode in ("segmentation", "normalization", "germanet_head"):
        report = score(gold, predictions, mode)
        assert report.macro_positive == 100.0
        assert report.macro_negative == 100.0
        assert report.macro_all == 100.0
        assert report.missing == 0


def test_score_known_error_fixture():
    gold = fixture_gold()
    predictions = {
        ("bridesmaid", "en"): ("bride", "maid"),  # right
        ("highwayman", "en"): ("highway", "man"),  # wrong: missing a cut
        ("maid", "en"): ("ma", "id"),  # wrong: split negative
        ("hausboot", "de"): ("haus", "boot"),  # right
        ("boot", "de"): ("boot",),  # right
    }
    report = score(gold, predictions, "segmentation")
    en = report.per_language["en"]
    de = report.per_language["de"]
    assert (en.positives.correct, en.positives.total) == (1, 2)
    assert (en.negatives.correct, en.negatives.total) == (0, 1)
    assert (de.positives.correct, de.positives.total) == (1, 1)
    assert (de.negatives.correct, de.negatives.total) == (1, 1)
    assert report.macro_positive == pytest.approx(75.0)
    assert report.macro_negative == pytest.approx(50.0)
    # en all: 1/3, de all: 2/2 -> macro (33.33 + 100) / 2
    assert report.macro_all == pytest.approx((100 / 3 + 100.0) / 2)


def test_missing_predictions_count_as_wrong(caplog):
    gold = fixture_gold()
    with caplog.at_level("WARNING"):
        report = score(gold, {}, "normalization")
    assert report.missing == 5
    assert report.macro_positive == 0.0
    assert sum("no prediction" in r.message for r in caplog.records) == 5


def test_language_without_negatives_is_excluded_from_negative_macro():
    gold = [
        entry("bridesmaid", ("bride", "maid")),
        entry("hausboot", ("haus", "boot"), "de"),
        entry("boot", ("boot",), "de"),
    ]
    predictions = {(e.word.text, e.word.lang): e.constituents for e in gold}
    report = score(gold, predictions, "normalization")
    assert report.per_language["en"].negatives.accuracy is None
    assert report.macro_negative == 100.0  # de only
    assert report.macro_all == 100.0


def test_score_requires_gold_entries():
    with pytest.raises(DataError):
        score([], {}, "segmentation")


def test_report_dict_shape():
    gold = fixture_gold()
    predictions = {(e.word.text, e.word.lang): e.constituents for e in gold}
    data = score(gold, predictions, "segmentation").to_dict()
    assert data["mode"] == "segmentation"
    assert data["missing_predictions"] == 0
    assert data["languages"]["en"]["positive"] == {
        "correct": 2,
        "total": 2,
        "accuracy": 100.0,
    }
    assert data["macro"]["all"] == 100.0
    assert list(data["languages"]) == ["de", "en"]


# -------------------------------------------------- predictions_from_records


def test_predictions_from_records_normalizes_and_indexes():
    records = [("caféhaus", "de", ["café", "haus"])]
    predictions = predictions_from_records(records)
    assert predictions[("caféhaus", "de")] == ("café", "haus")


def test_predictions_from_records_rejects_duplicates():
    records = [("a b".replace(" ", ""), "en", ["a", "b"]), ("ab", "en", ["ab"])]
    with pytest.raises(DataError, match="duplicate"):
        predictions_from_records(records)


# ------------------------------------------------------ hard/easy breakdown


def test_hard_easy_breakdown_buckets_by_tokenizer():
    # swimsuit is stored whole (hard); hausboot splits cleanly (easy).
    lp = math.log(0.25)
    model = TokenizerModel(
        (("▁swimsuit", lp), ("▁haus", lp), ("boot", lp), ("▁", lp))
    )
    gold = [
        entry("swimsuit", ("swim", "suit")),
        entry("hausboot", ("haus", "boot"), "de"),
        entry("boot", ("boot",), "de"),  # negatives are ignored here
    ]
    predictions = {
        ("swimsuit", "en"): ("swim", "suit"),
        ("hausboot", "de"): ("haus", "wrong"),
    }
    breakdown = hard_easy_breakdown(gold, predictions, model, "normalization")
    assert (breakdown.hard.correct, breakdown.hard.total) == (1, 1)
    assert (breakdown.easy.correct, breakdown.easy.total) == (0, 1)


# ---------------------------------------------------------------- the table


def test_format_report_layout():
    gold = [
        entry("bridesmaid", ("bride", "maid")),
        entry("highwayman", ("high", "way", "man")),
        entry("maid", ("maid",)),
    ]
    predictions = {
        ("bridesmaid", "en"): ("bride", "maid"),
        ("highwayman", "en"): ("high", "way", "man"),
        ("maid", "en"): ("ma", "id"),
    }
    text = format_report(score(gold, predictions, "segmentation"))
    lines = text.splitlines()
    assert len(lines) == 4
    header, p_row, n_row, all_row = lines
    assert header.split() == ["en", "macro"]
    assert p_row.split() == ["P", "100.0", "100.0"]
    assert n_row.split() == ["N", "0.0", "0.0"]
    assert all_row.split() == ["All", "66.7", "66.7"]
    # columns line up
    assert header.index("macro") == p_row.index("100.0", p_row.index("100.0") + 1) - 0


def test_format_report_handles_empty_classes():
    gold = [entry("bridesmaid", ("bride", "maid"))]
    predictions = {("bridesmaid", "en"): ("bride", "maid")}
    text = format_report(score(gold, predictions, "segmentation"))
    n_row = text.splitlines()[2]
    assert n_row.split() == ["N", "-", "-"]


def test_class_score_accuracy():
    s = ClassScore()
    assert s.accuracy is None
    s.add(True)
    s.add(False)
    assert s.accuracy == 50.0
