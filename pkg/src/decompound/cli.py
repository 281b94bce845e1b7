"""Command line interface.

Exit codes: 0 on success, 1 on data errors (with file and line diagnostics
on stderr), 2 on usage errors. All JSONL flows through UTF-8; ``-`` means
stdin or stdout. Every run logs its resolved configuration to stderr, and
reruns with identical inputs and flags produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import multiprocessing
import re
import sys
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path

from . import __version__
from .align import align_fast
from .dataset import (
    EVAL_CAP,
    MIN_LANG_SIZE,
    build_entries,
    dataset_stats,
    load_lexicon,
    make_splits,
)
from .evaluate import (
    format_report,
    hard_easy_breakdown,
    predictions_from_records,
    score,
)
from .mine import (
    DEFAULT_RATIO_THRESHOLD,
    FrequencyTable,
    MineConfig,
    count_words,
    mine_pairs,
    read_table,
    write_table,
)
from .splitter import (
    ConstituentSegmenter,
    FrequencySegmenter,
    Segmenter,
    SplitterConfig,
    freq_split,
)
from .text import Boundaries, CompoundEntry, DataError, DecompoundError, Word
from .unigram import (
    TokenizerModel,
    TrainConfig,
    encode,
    is_hard,
    load_model,
    sample_corpus,
    save_model,
    token_origins,
    train_unigram,
)

logger = logging.getLogger("decompound")


def _dumps(obj: object) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


@contextmanager
def _text_out(path: str):
    if path == "-":
        writer = io.TextIOWrapper(sys.stdout.buffer, encoding="utf-8", newline="\n")
        try:
            yield writer
        finally:
            writer.flush()
            writer.detach()
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            yield handle


@contextmanager
def _text_in(path: str):
    if path == "-":
        reader = io.TextIOWrapper(sys.stdin.buffer, encoding="utf-8")
        try:
            yield reader
        finally:
            reader.detach()
    else:
        with open(path, encoding="utf-8") as handle:
            yield handle


def _read_jsonl(path: str) -> Iterator[tuple[str, dict]]:
    with _text_in(path) as stream:
        for lineno, line in enumerate(stream, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{'<stdin>' if path == '-' else path}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{where}: not valid JSON ({exc.msg})") from None
            if not isinstance(obj, dict):
                raise DataError(f"{where}: expected a JSON object")
            yield where, obj


def _require(obj: dict, key: str, kind: type, where: str):
    value = obj.get(key)
    if not isinstance(value, kind):
        raise DataError(f"{where}: missing or invalid {key!r}")
    return value


def _constituents(obj: dict, where: str) -> tuple[str, ...]:
    raw = _require(obj, "constituents", list, where)
    if not raw or not all(isinstance(c, str) and c for c in raw):
        raise DataError(f"{where}: constituents must be non-empty strings")
    return tuple(raw)


def _entry(obj: dict, where: str) -> CompoundEntry:
    word = _require(obj, "word", str, where)
    lang = _require(obj, "lang", str, where)
    try:
        return CompoundEntry(Word(word, lang), _constituents(obj, where))
    except ValueError as exc:
        raise DataError(f"{where}: {exc}") from None


def _read_entries(path: str) -> list[CompoundEntry]:
    return [_entry(obj, where) for where, obj in _read_jsonl(path)]


# ---------------------------------------------------------------------- mine


def _count_file(task: tuple[str, str]) -> FrequencyTable:
    path, lang = task
    with open(path, "rb") as handle:
        return count_words(handle, lang)


def _cmd_mine(args: argparse.Namespace) -> int:
    tasks = [(path, args.lang) for path in args.corpus]
    if args.threads > 1 and len(tasks) > 1:
        with multiprocessing.Pool(min(args.threads, len(tasks))) as pool:
            shards = pool.map(_count_file, tasks)
    else:
        shards = [_count_file(task) for task in tasks]
    table = shards[0]
    for shard in shards[1:]:
        table = table.merge(shard)
    if args.freq_out:
        write_table(table, args.freq_out)
    config = MineConfig(
        threshold=args.threshold, use_ratio_filter=not args.no_ratio_filter
    )
    pairs = mine_pairs(table, config)
    with _text_out(args.out) as out:
        for pair in pairs:
            out.write(
                _dumps(
                    {
                        "input": pair.input,
                        "target": pair.target,
                        "lang": pair.lang,
                        "hyphenated": pair.hyphenated,
                    }
                )
                + "\n"
            )
    logger.info("mined %d pairs (%d positives)", len(pairs), len(pairs) // 2)
    return 0


# -------------------------------------------------------------- build-dataset


def _cmd_build_dataset(args: argparse.Namespace) -> int:
    by_lang = load_lexicon(args.lexicon)
    entries = build_entries(by_lang)
    split = make_splits(
        entries,
        args.seed,
        min_lang_size=args.min_lang_size,
        eval_cap=args.eval_cap,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, rows in (("train", split.train), ("eval", split.eval)):
        with open(out_dir / f"{name}.jsonl", "w", encoding="utf-8", newline="\n") as out:
            for entry in rows:
                out.write(
                    _dumps(
                        {
                            "word": entry.word.text,
                            "lang": entry.word.lang,
                            "constituents": list(entry.constituents),
                        }
                    )
                    + "\n"
                )
    stats = dataset_stats(split)
    with open(out_dir / "stats.json", "w", encoding="utf-8", newline="\n") as out:
        json.dump(stats, out, ensure_ascii=False, sort_keys=True, indent=2)
        out.write("\n")
    logger.info(
        "wrote %d train and %d eval entries (%d languages dropped)",
        len(split.train),
        len(split.eval),
        len(split.dropped_languages),
    )
    return 0


# --------------------------------------------------------------------- align


def _cmd_align(args: argparse.Namespace) -> int:
    with _text_out(args.out) as out:
        for where, obj in _read_jsonl(args.infile):
            entry = _entry(obj, where)
            result = align_fast(
                entry.word, entry.constituents, candidate_cap=args.candidate_cap
            )
            obj["boundaries"] = list(result.boundaries.indices)
            obj["segments"] = list(result.segments)
            obj["cost"] = result.total_cost
            out.write(_dumps(obj) + "\n")
    return 0


# ------------------------------------------------------------- split-predict


def _splitter_config(path: str | None) -> SplitterConfig:
    if path is None:
        return SplitterConfig()
    with open(path, encoding="utf-8") as handle:
        raw = json.load(handle)
    try:
        return SplitterConfig(
            min_part_len=raw.get("min_part_len", SplitterConfig.min_part_len),
            linking_morphemes=frozenset(
                raw.get("linking_morphemes", sorted(SplitterConfig.linking_morphemes))
            ),
            max_parts=raw.get("max_parts", SplitterConfig.max_parts),
        )
    except (TypeError, ValueError) as exc:
        raise DataError(f"{path}: {exc}") from None


def _cmd_split_predict(args: argparse.Namespace) -> int:
    table = read_table(args.freq_table, args.lang)
    config = _splitter_config(args.config)
    with _text_out(args.out) as out:
        for where, obj in _read_jsonl(args.infile):
            word_text = _require(obj, "word", str, where)
            lang = _require(obj, "lang", str, where)
            try:
                word = Word(word_text, lang)
            except ValueError as exc:
                raise DataError(f"{where}: {exc}") from None
            result = freq_split(word, table, config)
            out.write(
                _dumps(
                    {
                        "word": word.text,
                        "lang": word.lang,
                        "constituents": list(result.constituents),
                    }
                )
                + "\n"
            )
    return 0


# ------------------------------------------------------------ train-tokenizer


_LANG_TAG = re.compile(r"[a-z]{2,3}")


def _parse_tagged(value: str, flag: str) -> tuple[str, str]:
    lang, sep, path = value.partition("=")
    if sep and _LANG_TAG.fullmatch(lang):
        if not path:
            raise DataError(f"{flag}: empty path in {value!r}")
        return lang, path
    return "und", value


def _load_segmenter(spec: str) -> Segmenter:
    kind, sep, path = spec.partition(":")
    if not sep or not path:
        raise DataError(
            f"--segmenter must look like gold:FILE, freq:FILE or "
            f"predictions:FILE, got {spec!r}"
        )
    if kind in ("gold", "predictions"):
        mapping = {}
        for where, obj in _read_jsonl(path):
            word = _require(obj, "word", str, where)
            mapping[word] = _constituents(obj, where)
        return ConstituentSegmenter(mapping)
    if kind == "freq":
        return FrequencySegmenter(read_table(path, "und"))
    raise DataError(f"unknown segmenter kind {kind!r}")


def _cmd_train_tokenizer(args: argparse.Namespace) -> int:
    lines_by_lang: dict[str, list[str]] = {}
    for value in args.corpus:
        lang, path = _parse_tagged(value, "--corpus")
        with open(path, encoding="utf-8") as handle:
            lines_by_lang.setdefault(lang, []).extend(
                line.rstrip("\n") for line in handle
            )
    if args.sample_size is not None:
        lines = sample_corpus(lines_by_lang, args.alpha, args.sample_size, args.seed)
    else:
        lines = [
            line for lang in sorted(lines_by_lang) for line in lines_by_lang[lang]
        ]
    segmenter = _load_segmenter(args.segmenter) if args.segmenter else None
    config = TrainConfig(
        max_piece_len=args.max_piece_len,
        min_substring_count=args.min_substring_count,
    )
    model = train_unigram(
        lines, args.vocab_size, args.mode, segmenter, config=config
    )
    save_model(model, args.out)
    logger.info("saved %d pieces to %s", len(model.pieces), args.out)
    return 0


# -------------------------------------------------------------------- encode


def _cmd_encode(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    with _text_out(args.out) as out:
        with _text_in(args.infile) as stream:
            for line in stream:
                pieces, boundaries = encode(model, line.rstrip("\n"))
                out.write(
                    _dumps(
                        {
                            "pieces": pieces,
                            "word_boundaries": [
                                list(b.indices) for b in boundaries
                            ],
                        }
                    )
                    + "\n"
                )
    return 0


# ------------------------------------------------------------------ hardness


def _gold_items(path: str) -> Iterator[tuple[Word, Boundaries]]:
    for where, obj in _read_jsonl(path):
        word_text = _require(obj, "word", str, where)
        lang = _require(obj, "lang", str, where)
        try:
            word = Word(word_text, lang)
        except ValueError as exc:
            raise DataError(f"{where}: {exc}") from None
        if "boundaries" in obj:
            raw = obj["boundaries"]
            if not isinstance(raw, list) or not all(
                isinstance(i, int) for i in raw
            ):
                raise DataError(f"{where}: boundaries must be a list of ints")
            try:
                boundaries = Boundaries(tuple(raw))
            except ValueError as exc:
                raise DataError(f"{where}: {exc}") from None
            if boundaries.end != len(word):
                raise DataError(
                    f"{where}: boundaries end at {boundaries.end}, "
                    f"word length is {len(word)}"
                )
        else:
            constituents = _constituents(obj, where)
            if len(constituents) < 2:
                continue
            boundaries = align_fast(word, constituents).boundaries
        if boundaries.segment_count < 2:
            continue
        yield word, boundaries


def _cmd_hardness(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    counts: dict[str, list[int]] = {}
    per_word = []
    for word, boundaries in _gold_items(args.gold):
        hard = is_hard(word, boundaries, model)
        bucket = counts.setdefault(word.lang, [0, 0])
        bucket[0] += int(hard)
        bucket[1] += 1
        per_word.append({"word": word.text, "lang": word.lang, "hard": hard})
    if not counts:
        raise DataError(f"{args.gold}: no compounds to measure")
    if args.per_word:
        with _text_out(args.per_word) as out:
            for row in per_word:
                out.write(_dumps(row) + "\n")
    rates = {
        lang: {
            "compounds": total,
            "hard": hard,
            "rate": 100.0 * hard / total,
        }
        for lang, (hard, total) in sorted(counts.items())
    }
    macro = sum(r["rate"] for r in rates.values()) / len(rates)
    report = {"per_language": rates, "macro": macro}
    report_path = args.report
    if report_path is None:
        report_path = None if args.per_word == "-" else "-"
    if report_path is not None:
        with _text_out(report_path) as out:
            json.dump(report, out, ensure_ascii=False, sort_keys=True, indent=2)
            out.write("\n")
    logger.info("macro hardness rate: %.2f", macro)
    return 0


# ------------------------------------------------------------- token-origins


def _cmd_token_origins(args: argparse.Namespace) -> int:
    multilingual = load_model(args.multi)
    monos: dict[str, TokenizerModel] = {}
    for value in args.mono:
        lang, path = _parse_tagged(value, "--mono")
        if lang == "und":
            raise DataError(f"--mono needs a language tag: LANG={value}")
        monos[lang] = load_model(path)
    with _text_out(args.out) as out:
        for piece, origins in token_origins(multilingual, monos):
            out.write(_dumps({"piece": piece, "origins": origins}) + "\n")
    return 0


# ---------------------------------------------------------------------- eval


def _cmd_eval(args: argparse.Namespace) -> int:
    gold = _read_entries(args.gold)
    records = []
    for where, obj in _read_jsonl(args.pred):
        word = _require(obj, "word", str, where)
        lang = _require(obj, "lang", str, where)
        records.append((word, lang, _constituents(obj, where)))
    predictions = predictions_from_records(records)
    mode = args.mode.replace("-", "_")
    report = score(gold, predictions, mode)
    document = report.to_dict()
    if args.model:
        model = load_model(args.model)
        breakdown = hard_easy_breakdown(gold, predictions, model, mode)
        document["hard_easy"] = {
            "easy": {
                "correct": breakdown.easy.correct,
                "total": breakdown.easy.total,
                "accuracy": breakdown.easy.accuracy,
            },
            "hard": {
                "correct": breakdown.hard.correct,
                "total": breakdown.hard.total,
                "accuracy": breakdown.hard.accuracy,
            },
        }
    if args.report:
        with _text_out(args.report) as out:
            json.dump(document, out, ensure_ascii=False, sort_keys=True, indent=2)
            out.write("\n")
    with _text_out("-") as out:
        out.write(format_report(report) + "\n")
        if args.model:
            easy, hard = document["hard_easy"]["easy"], document["hard_easy"]["hard"]
            out.write(
                "easy: {} of {}, hard: {} of {}\n".format(
                    easy["correct"], easy["total"], hard["correct"], hard["total"]
                )
            )
    if report.missing:
        logger.warning("%d gold entries had no prediction", report.missing)
    return 0


# -------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="decompound",
        description="Mining, aligning, splitting and tokenizing compounds.",
    )
    parser.add_argument(
        "--version", action="version", version=f"decompound {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mine", help="mine decompounding pairs from raw text")
    p.add_argument("--corpus", action="append", required=True, metavar="FILE")
    p.add_argument("--lang", required=True)
    p.add_argument("--threshold", type=float, default=DEFAULT_RATIO_THRESHOLD)
    p.add_argument("--no-ratio-filter", action="store_true")
    p.add_argument("--freq-out", metavar="FILE")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default="-", metavar="FILE")
    p.set_defaults(func=_cmd_mine)

    p = sub.add_parser("build-dataset", help="expand a lexicon into splits")
    p.add_argument("--lexicon", required=True, metavar="FILE")
    p.add_argument("--min-lang-size", type=int, default=MIN_LANG_SIZE)
    p.add_argument("--eval-cap", type=int, default=EVAL_CAP)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True, metavar="DIR")
    p.set_defaults(func=_cmd_build_dataset)

    p = sub.add_parser("align", help="align constituents onto surface forms")
    p.add_argument("--in", dest="infile", default="-", metavar="FILE")
    p.add_argument("--out", default="-", metavar="FILE")
    p.add_argument("--candidate-cap", type=int, default=10_000_000)
    p.set_defaults(func=_cmd_align)

    p = sub.add_parser("split-predict", help="split words by part frequencies")
    p.add_argument("--freq-table", required=True, metavar="FILE")
    p.add_argument("--lang", default="und")
    p.add_argument("--config", metavar="FILE")
    p.add_argument("--in", dest="infile", default="-", metavar="FILE")
    p.add_argument("--out", default="-", metavar="FILE")
    p.set_defaults(func=_cmd_split_predict)

    p = sub.add_parser("train-tokenizer", help="train a unigram tokenizer")
    p.add_argument(
        "--corpus", action="append", required=True, metavar="[LANG=]FILE"
    )
    p.add_argument("--vocab-size", type=int, required=True)
    p.add_argument("--mode", choices=("whitespace", "compound"), default="whitespace")
    p.add_argument("--segmenter", metavar="KIND:FILE")
    p.add_argument("--alpha", type=float, default=0.2)
    p.add_argument("--sample-size", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-piece-len", type=int, default=16)
    p.add_argument("--min-substring-count", type=int, default=2)
    p.add_argument("--out", required=True, metavar="FILE")
    p.set_defaults(func=_cmd_train_tokenizer)

    p = sub.add_parser("encode", help="encode text with a trained model")
    p.add_argument("--model", required=True, metavar="FILE")
    p.add_argument("--in", dest="infile", default="-", metavar="FILE")
    p.add_argument("--out", default="-", metavar="FILE")
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("hardness", help="measure hard-compound rates")
    p.add_argument("--model", required=True, metavar="FILE")
    p.add_argument("--gold", required=True, metavar="FILE")
    p.add_argument("--per-word", metavar="FILE")
    p.add_argument("--report", metavar="FILE")
    p.set_defaults(func=_cmd_hardness)

    p = sub.add_parser("token-origins", help="map pieces to their languages")
    p.add_argument("--multi", required=True, metavar="FILE")
    p.add_argument("--mono", action="append", required=True, metavar="LANG=FILE")
    p.add_argument("--out", default="-", metavar="FILE")
    p.set_defaults(func=_cmd_token_origins)

    p = sub.add_parser("eval", help="score predictions against gold entries")
    p.add_argument("--gold", required=True, metavar="FILE")
    p.add_argument("--pred", required=True, metavar="FILE")
    p.add_argument(
        "--mode",
        choices=("segmentation", "normalization", "germanet-head"),
        required=True,
    )
    p.add_argument("--model", metavar="FILE")
    p.add_argument("--report", metavar="FILE")
    p.set_defaults(func=_cmd_eval)

    return parser


def _config_json(args: argparse.Namespace) -> str:
    config = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    return json.dumps(config, ensure_ascii=False, sort_keys=True, default=str)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    logger.info("resolved config: %s", _config_json(args))
    try:
        return args.func(args)
    except (DecompoundError, OSError) as exc:
        logger.error("%s", exc)
        return 1
