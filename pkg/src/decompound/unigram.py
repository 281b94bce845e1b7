"""Unigram language-model subword tokenizer with compound-aware training.

Training follows the usual expectation-maximization recipe for unigram
models: seed a large substring vocabulary, re-estimate piece probabilities
with forward-backward passes over each pretoken's segmentation lattice, and
repeatedly drop the pieces whose removal costs the least corpus likelihood
until the vocabulary fits. The training-time pretokenizer may cut compounds
at their constituent boundaries so that pieces never straddle them; at
inference time pretokenization is always plain whitespace splitting, which
is what makes the hard-compound measurements below meaningful.
"""

from __future__ import annotations

import json
import logging
import math
import random
from bisect import bisect_right
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from itertools import accumulate
from pathlib import Path

from .align import align_fast
from .splitter import Segmenter
from .text import Boundaries, CompoundEntry, DataError, Word, nfc

logger = logging.getLogger(__name__)

MARKER = "▁"
UNK_PIECE = "<unk>"
# Score for a character no piece covers. Unknown characters never compete
# with real pieces, so any finite constant gives the same segmentations.
UNK_LOGPROB = -100.0

MODEL_VERSION = 1
PRETOKENIZATION_MODES = ("whitespace", "compound")

_NEG_INF = float("-inf")
# Expected counts below this are treated as zero; single-character pieces
# are floored here instead of being dropped, preserving character coverage.
_COUNT_FLOOR = 1e-12


@dataclass(frozen=True)
class TrainConfig:
    max_piece_len: int = 16
    min_substring_count: int = 2
    seed_cap_factor: int = 20
    keep_ratio: float = 0.75
    em_subiters: int = 2

    def __post_init__(self) -> None:
        if self.max_piece_len < 2:
            raise ValueError("max_piece_len must be at least 2")
        if self.min_substring_count < 1:
            raise ValueError("min_substring_count must be at least 1")
        if self.seed_cap_factor < 1:
            raise ValueError("seed_cap_factor must be at least 1")
        if not 0.0 < self.keep_ratio < 1.0:
            raise ValueError("keep_ratio must be strictly between 0 and 1")
        if self.em_subiters < 1:
            raise ValueError("em_subiters must be at least 1")


@dataclass(frozen=True)
class TokenizerModel:
    """An ordered piece inventory with log probabilities."""

    pieces: tuple[tuple[str, float], ...]
    marker: str = MARKER
    unk_piece: str = UNK_PIECE
    training_pretokenization: str = "whitespace"
    version: int = MODEL_VERSION

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "pieces", tuple((text, float(lp)) for text, lp in self.pieces)
        )
        if not self.pieces:
            raise ValueError("a model needs at least one piece")
        if not self.marker:
            raise ValueError("marker must be non-empty")
        if self.training_pretokenization not in PRETOKENIZATION_MODES:
            raise ValueError(
                f"unknown pretokenization {self.training_pretokenization!r}"
            )
        index: dict[str, float] = {}
        for text, lp in self.pieces:
            if not text:
                raise ValueError("piece texts must be non-empty")
            if text in index:
                raise ValueError(f"duplicate piece {text!r}")
            if lp > 1e-9:
                raise ValueError(f"piece {text!r} has log probability {lp} > 0")
            index[text] = lp
        mass = sum(math.exp(lp) for lp in index.values())
        if abs(mass - 1.0) > 1e-4:
            raise ValueError(f"piece probabilities sum to {mass}, expected 1")
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_max_len", max(len(t) for t in index))

    def logprob(self, piece: str) -> float | None:
        return self._index.get(piece)  # type: ignore[attr-defined]

    def __contains__(self, piece: str) -> bool:
        return piece in self._index  # type: ignore[attr-defined]

    @property
    def max_piece_len(self) -> int:
        return self._max_len  # type: ignore[attr-defined]


def pretokenize(
    text: str,
    mode: str = "whitespace",
    segmenter: Segmenter | None = None,
    *,
    lang: str = "und",
    marker: str = MARKER,
) -> list[str]:
    """Split text into pretokens, each word carrying one leading marker.

    In compound mode every word is additionally cut at the segmenter's
    boundaries; only the word-initial piece keeps the marker.
    """
    if mode not in PRETOKENIZATION_MODES:
        raise ValueError(f"unknown pretokenization mode {mode!r}")
    if mode == "compound" and segmenter is None:
        raise ValueError("compound pretokenization requires a segmenter")
    out: list[str] = []
    for token in nfc(text).split():
        if mode == "whitespace":
            out.append(marker + token)
            continue
        word = Word(token, lang)
        ix = segmenter.boundaries(word).indices
        if ix[-1] != len(token):
            raise DataError(
                f"segmenter returned boundaries ending at {ix[-1]} "
                f"for {token!r} of length {len(token)}"
            )
        for i, (a, b) in enumerate(zip(ix, ix[1:])):
            out.append(marker + token[a:b] if i == 0 else token[a:b])
    return out


def _logadd(a: float, b: float) -> float:
    if a == _NEG_INF:
        return b
    if b == _NEG_INF:
        return a
    if a < b:
        a, b = b, a
    return a + math.log1p(math.exp(b - a))


def _seed_pieces(
    pretokens: Sequence[tuple[str, int]], vocab_size: int, config: TrainConfig
) -> dict[str, float]:
    """Initial vocabulary: frequent substrings plus full character coverage."""
    substrings: Counter[str] = Counter()
    char_counts: Counter[str] = Counter()
    for text, count in pretokens:
        length = len(text)
        for ch in text:
            char_counts[ch] += count
        for piece_len in range(2, min(config.max_piece_len, length) + 1):
            for start in range(length - piece_len + 1):
                substrings[text[start : start + piece_len]] += count

    candidates = [
        (count * len(text), text)
        for text, count in substrings.items()
        if count >= config.min_substring_count
    ]
    candidates.sort(key=lambda item: (-item[0], item[1]))
    del candidates[config.seed_cap_factor * vocab_size :]

    scores: dict[str, int] = {ch: char_counts[ch] for ch in sorted(char_counts)}
    for score, text in candidates:
        scores[text] = score
    log_total = math.log(sum(scores.values()))
    return {text: math.log(score) - log_total for text, score in scores.items()}


def _e_step(
    pretokens: Sequence[tuple[str, int]], logprobs: Mapping[str, float]
) -> tuple[dict[str, float], float]:
    """Expected piece counts and total corpus log likelihood."""
    max_len = max(len(p) for p in logprobs)
    expected: dict[str, float] = {}
    likelihood = 0.0
    for text, count in pretokens:
        m = len(text)
        window = min(max_len, m)
        alpha = [_NEG_INF] * (m + 1)
        alpha[0] = 0.0
        for j in range(1, m + 1):
            acc = _NEG_INF
            for i in range(max(0, j - window), j):
                if alpha[i] == _NEG_INF:
                    continue
                lp = logprobs.get(text[i:j])
                if lp is not None:
                    acc = _logadd(acc, alpha[i] + lp)
            alpha[j] = acc
        z = alpha[m]
        if z == _NEG_INF:
            raise DataError(f"pretoken {text!r} has no segmentation under the seed")
        beta = [_NEG_INF] * (m + 1)
        beta[m] = 0.0
        for i in range(m - 1, -1, -1):
            acc = _NEG_INF
            for j in range(i + 1, min(m, i + window) + 1):
                if beta[j] == _NEG_INF:
                    continue
                lp = logprobs.get(text[i:j])
                if lp is not None:
                    acc = _logadd(acc, lp + beta[j])
            beta[i] = acc
        likelihood += count * z
        for i in range(m):
            if alpha[i] == _NEG_INF:
                continue
            for j in range(i + 1, min(m, i + window) + 1):
                lp = logprobs.get(text[i:j])
                if lp is None or beta[j] == _NEG_INF:
                    continue
                posterior = math.exp(alpha[i] + lp + beta[j] - z)
                piece = text[i:j]
                expected[piece] = expected.get(piece, 0.0) + count * posterior
    return expected, likelihood


def _m_step(
    logprobs: Mapping[str, float], expected: Mapping[str, float]
) -> dict[str, float]:
    counts: dict[str, float] = {}
    for piece in logprobs:
        count = expected.get(piece, 0.0)
        if len(piece) == 1:
            counts[piece] = max(count, _COUNT_FLOOR)
        elif count > 0.0:
            counts[piece] = count
    log_total = math.log(sum(counts.values()))
    return {piece: math.log(count) - log_total for piece, count in counts.items()}


def _best_logprob(
    text: str, logprobs: Mapping[str, float], *, exclude_full: bool = False
) -> float:
    """Viterbi log probability of a string; optionally forbid the one-piece path."""
    m = len(text)
    max_len = max(len(p) for p in logprobs)
    window = min(max_len, m)
    best = [_NEG_INF] * (m + 1)
    best[0] = 0.0
    for j in range(1, m + 1):
        top = _NEG_INF
        for i in range(max(0, j - window), j):
            if best[i] == _NEG_INF:
                continue
            if exclude_full and i == 0 and j == m:
                continue
            lp = logprobs.get(text[i:j])
            if lp is not None and best[i] + lp > top:
                top = best[i] + lp
        best[j] = top
    return best[m]


def _prune(
    logprobs: dict[str, float], expected: Mapping[str, float], target: int
) -> dict[str, float]:
    """Drop the multi-character pieces whose removal loses the least likelihood."""
    multis = sorted(p for p in logprobs if len(p) > 1)
    single_count = len(logprobs) - len(multis)
    keep = max(target - single_count, 0)
    if keep >= len(multis):
        return logprobs
    ranked = []
    for piece in multis:
        frequency = expected.get(piece, 0.0)
        alternative = _best_logprob(piece, logprobs, exclude_full=True)
        loss = frequency * (logprobs[piece] - alternative)
        ranked.append((-loss, piece))
    ranked.sort()
    kept = {piece for _, piece in ranked[:keep]}
    pruned = {
        piece: lp
        for piece, lp in logprobs.items()
        if len(piece) == 1 or piece in kept
    }
    return _renormalized(pruned)


def _renormalized(logprobs: dict[str, float]) -> dict[str, float]:
    total = _NEG_INF
    for lp in logprobs.values():
        total = _logadd(total, lp)
    return {piece: lp - total for piece, lp in logprobs.items()}


def train_unigram(
    corpus: Iterable[str],
    vocab_size: int,
    mode: str = "whitespace",
    segmenter: Segmenter | None = None,
    *,
    lang: str = "und",
    config: TrainConfig = TrainConfig(),
) -> TokenizerModel:
    """Train a unigram model on an iterable of text lines.

    Training is deterministic: the same corpus and configuration produce a
    byte-identical model file.
    """
    pretoken_counts: Counter[str] = Counter()
    for line in corpus:
        pretoken_counts.update(pretokenize(line, mode, segmenter, lang=lang))
    if not pretoken_counts:
        raise DataError("the training corpus contains no words")
    pretokens = sorted(pretoken_counts.items())

    alphabet_size = len({ch for text, _ in pretokens for ch in text})
    if vocab_size < alphabet_size:
        raise DataError(
            f"vocab_size {vocab_size} is below the corpus alphabet size "
            f"{alphabet_size}"
        )

    logprobs = _seed_pieces(pretokens, vocab_size, config)
    logger.info(
        "seeded %d pieces (%d single characters)", len(logprobs), alphabet_size
    )
    while True:
        expected: Mapping[str, float] = {}
        for _ in range(config.em_subiters):
            expected, likelihood = _e_step(pretokens, logprobs)
            logprobs = _m_step(logprobs, expected)
        logger.debug(
            "EM round done: %d pieces, log likelihood %.4f",
            len(logprobs),
            likelihood,
        )
        if len(logprobs) <= vocab_size:
            break
        target = max(vocab_size, int(len(logprobs) * config.keep_ratio))
        logprobs = _prune(logprobs, expected, target)

    logprobs = _renormalized(logprobs)
    pieces = tuple(
        sorted(logprobs.items(), key=lambda item: (-item[1], item[0]))
    )
    return TokenizerModel(pieces=pieces, training_pretokenization=mode)


@dataclass(frozen=True)
class WordEncoding:
    pieces: tuple[str, ...]
    boundaries: Boundaries


def _encode_pretoken(
    pretoken: str, model: TokenizerModel
) -> list[tuple[str, int, int]]:
    """Viterbi-decode one pretoken into (piece, start, stop) triples."""
    index: Mapping[str, float] = model._index  # type: ignore[attr-defined]
    m = len(pretoken)
    window = min(model.max_piece_len, m)
    best = [_NEG_INF] * (m + 1)
    best[0] = 0.0
    back: list[tuple[int, str] | None] = [None] * (m + 1)
    for j in range(1, m + 1):
        top = _NEG_INF
        choice: tuple[int, str] | None = None
        for i in range(max(0, j - window), j):
            if best[i] == _NEG_INF:
                continue
            piece = pretoken[i:j]
            lp = index.get(piece)
            if lp is not None and best[i] + lp > top:
                top = best[i] + lp
                choice = (i, piece)
        if pretoken[j - 1] not in index:
            # No piece covers this character; an unk edge fills the gap.
            unk_score = best[j - 1] + UNK_LOGPROB
            if unk_score > top:
                top = unk_score
                choice = (j - 1, model.unk_piece)
        best[j] = top
        back[j] = choice
    assert back[m] is not None  # single-character edges or unk always connect
    triples: list[tuple[str, int, int]] = []
    j = m
    while j > 0:
        i, piece = back[j]  # type: ignore[misc]
        triples.append((piece, i, j))
        j = i
    triples.reverse()
    return triples


def encode(
    model: TokenizerModel, text: str
) -> tuple[list[str], list[Boundaries]]:
    """Viterbi-encode text, whitespace-pretokenized no matter how trained.

    Returns the flat piece sequence and, per word, the token boundaries
    measured in the raw word (the marker occupies no position).
    """
    pieces: list[str] = []
    word_boundaries: list[Boundaries] = []
    marker_len = len(model.marker)
    for token in nfc(text).split():
        triples = _encode_pretoken(model.marker + token, model)
        pieces.extend(piece for piece, _, _ in triples)
        n = len(token)
        cuts = {0, n}
        for _, _, stop in triples[:-1]:
            raw = max(stop - marker_len, 0)
            if 0 < raw < n:
                cuts.add(raw)
        word_boundaries.append(Boundaries(tuple(sorted(cuts))))
    return pieces, word_boundaries


def decode(model: TokenizerModel, pieces: Iterable[str]) -> str:
    """Inverse of encode on fully covered text: join pieces, markers to spaces."""
    return "".join(pieces).replace(model.marker, " ").strip()


def is_hard(word: Word | str, gold: Boundaries, model: TokenizerModel) -> bool:
    """Whether the tokenizer fails to put a token edge on every gold boundary."""
    text = word.text if isinstance(word, Word) else nfc(word)
    if gold.end != len(text):
        raise ValueError(
            f"gold boundaries end at {gold.end} but {text!r} has length {len(text)}"
        )
    _, boundaries = encode(model, text)
    return not set(gold.indices) <= set(boundaries[0].indices)


def gold_boundaries(entry: CompoundEntry) -> Boundaries:
    """Surface boundaries of a compound's constituents."""
    return align_fast(entry.word, entry.constituents).boundaries


def iter_hardness(
    entries: Iterable[CompoundEntry], model: TokenizerModel
) -> Iterable[tuple[CompoundEntry, bool]]:
    """Classify each compound entry; non-compounds are skipped."""
    for entry in entries:
        if not entry.is_compound:
            continue
        yield entry, is_hard(entry.word, gold_boundaries(entry), model)


@dataclass(frozen=True)
class HardnessReport:
    # lang -> (hard count, compound count)
    per_language: dict[str, tuple[int, int]]

    def rate(self, lang: str) -> float:
        hard, total = self.per_language[lang]
        return 100.0 * hard / total

    @property
    def macro(self) -> float:
        rates = [self.rate(lang) for lang in sorted(self.per_language)]
        return sum(rates) / len(rates)


def hardness_rate(
    entries: Iterable[CompoundEntry], model: TokenizerModel
) -> HardnessReport:
    """Percentage of compounds whose gold boundaries the tokenizer misses."""
    counts: dict[str, list[int]] = {}
    for entry, hard in iter_hardness(entries, model):
        bucket = counts.setdefault(entry.word.lang, [0, 0])
        bucket[0] += int(hard)
        bucket[1] += 1
    if not counts:
        raise DataError("no compound entries to measure")
    return HardnessReport(
        {lang: (hard, total) for lang, (hard, total) in sorted(counts.items())}
    )


def sample_corpus(
    lines_by_lang: Mapping[str, Sequence[str]],
    alpha: float,
    size: int,
    seed: int,
) -> list[str]:
    """Draw lines with replacement, languages weighted by size ** alpha.

    The language is drawn first (a power-law over corpus sizes, so low-resource
    languages are upsampled for alpha < 1), then a line uniformly within it.
    """
    if alpha < 0:
        raise ValueError("alpha must not be negative")
    if size < 0:
        raise ValueError("size must not be negative")
    langs = sorted(lang for lang, lines in lines_by_lang.items() if lines)
    if not langs:
        raise DataError("no language has any lines to sample")
    cumulative = list(
        accumulate(float(len(lines_by_lang[lang])) ** alpha for lang in langs)
    )
    total = cumulative[-1]
    rng = random.Random(seed)
    out: list[str] = []
    for _ in range(size):
        pick = bisect_right(cumulative, rng.random() * total)
        lines = lines_by_lang[langs[min(pick, len(langs) - 1)]]
        out.append(lines[rng.randrange(len(lines))])
    return out


def token_origins(
    multilingual: TokenizerModel, mono_models: Mapping[str, TokenizerModel]
) -> list[tuple[str, list[str]]]:
    """For each piece, the languages whose own model carries it.

    Languages are ordered by the piece's probability under their model,
    most probable first; ties fall back to language order.
    """
    out: list[tuple[str, list[str]]] = []
    for piece, _ in multilingual.pieces:
        hits = [
            (-mono.logprob(piece), lang)  # type: ignore[operator]
            for lang, mono in mono_models.items()
            if piece in mono
        ]
        hits.sort()
        out.append((piece, [lang for _, lang in hits]))
    return out


def dumps_model(model: TokenizerModel) -> str:
    """Canonical single-line JSON; floats keep 17 significant digits."""

    def js(value: str) -> str:
        return json.dumps(value, ensure_ascii=False)

    body = ",".join(
        f"[{js(text)},{format(lp, '.17g')}]" for text, lp in model.pieces
    )
    return (
        f'{{"version":{model.version},"type":"unigram",'
        f'"marker":{js(model.marker)},"unk_piece":{js(model.unk_piece)},'
        f'"training_pretokenization":{js(model.training_pretokenization)},'
        f'"pieces":[{body}]}}'
    )


def save_model(model: TokenizerModel, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(dumps_model(model))
        handle.write("\n")


def load_model(path: str | Path) -> TokenizerModel:
    try:
        with open(path, encoding="utf-8") as handle:
            raw = json.load(handle)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise DataError(f"{path}: expected a JSON object")
    for key in ("version", "type", "marker", "unk_piece",
                "training_pretokenization", "pieces"):
        if key not in raw:
            raise DataError(f"{path}: missing key {key!r}")
    if raw["type"] != "unigram":
        raise DataError(f"{path}: unsupported model type {raw['type']!r}")
    if raw["version"] != MODEL_VERSION:
        raise DataError(f"{path}: unsupported model version {raw['version']!r}")
    pieces = []
    for i, item in enumerate(raw["pieces"]):
        if (
            not isinstance(item, list)
            or len(item) != 2
            or not isinstance(item[0], str)
            or not isinstance(item[1], (int, float))
        ):
            raise DataError(f"{path}: piece {i} must be [text, logprob]")
        pieces.append((item[0], float(item[1])))
    try:
        return TokenizerModel(
            pieces=tuple(pieces),
            marker=raw["marker"],
            unk_piece=raw["unk_piece"],
            training_pretokenization=raw["training_pretokenization"],
            version=raw["version"],
        )
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None
