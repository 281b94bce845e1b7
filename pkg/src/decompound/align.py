"""Aligning normalized constituents onto the surface form of a compound.

Given a word and a list of constituents in their normalized (base) form, the
task is to cut the word into as many segments as there are constituents so
that the summed character edit distance between segments and constituents is
minimal. The brute-force search scores every possible cut combination; the
fast search enumerates candidate segmentations in order of a lower bound on
their cost (the summed absolute length offsets between segments and
constituents) and therefore never has to look beyond the first cost level at
which a candidate materializes.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterator

from .text import Boundaries, DecompoundError, Segmentation, Word

DEFAULT_CANDIDATE_CAP = 10_000_000


class AlignmentError(DecompoundError):
    """The constituents cannot be aligned onto the word."""


class SearchBudgetExceeded(DecompoundError):
    """The candidate cap was reached before the search finished."""


def levenshtein(a: str, b: str) -> int:
    """Minimal number of unit-cost character edits turning ``a`` into ``b``."""
    if a == b:
        return 0
    # Keep the inner loop over the shorter string.
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        append = current.append
        for j, cb in enumerate(b, start=1):
            if ca == cb:
                append(previous[j - 1])
            else:
                append(1 + min(previous[j - 1], previous[j], current[j - 1]))
        previous = current
    return previous[-1]


@dataclass(frozen=True)
class AlignmentResult:
    segmentation: Segmentation
    per_segment_costs: tuple[int, ...]
    total_cost: int

    @property
    def boundaries(self) -> Boundaries:
        return self.segmentation.boundaries

    @property
    def segments(self) -> tuple[str, ...]:
        return self.segmentation.segments


def total_cost(
    word: Word, boundaries: Boundaries, constituents: tuple[str, ...] | list[str]
) -> AlignmentResult:
    """Score one fixed segmentation against the constituents."""
    constituents = tuple(constituents)
    if boundaries.segment_count != len(constituents):
        raise AlignmentError(
            f"{word.text!r}: {boundaries.segment_count} segments for "
            f"{len(constituents)} constituents"
        )
    segmentation = Segmentation(word, boundaries)
    costs = tuple(
        levenshtein(s, c) for s, c in zip(segmentation.segments, constituents)
    )
    return AlignmentResult(segmentation, costs, sum(costs))


def _preference_key(
    total: int, costs: tuple[int, ...], cuts: tuple[int, ...]
) -> tuple[int, tuple[int, ...], tuple[int, ...]]:
    # Lower total first. Among equal totals the lexicographically greater
    # cost vector wins (edits preferably land on early segments), then the
    # lexicographically smaller boundary list for a total order.
    return total, tuple(-c for c in costs), cuts


def tie_break(a: AlignmentResult, b: AlignmentResult) -> AlignmentResult:
    """Pick the preferred of two equal-cost alignments of the same word."""
    if a.total_cost != b.total_cost:
        raise ValueError("tie_break expects results with equal total cost")
    key_a = _preference_key(a.total_cost, a.per_segment_costs, a.boundaries.indices)
    key_b = _preference_key(b.total_cost, b.per_segment_costs, b.boundaries.indices)
    return a if key_a <= key_b else b


def _check_alignable(word: Word, constituents: tuple[str, ...]) -> None:
    if not constituents:
        raise AlignmentError(f"{word.text!r}: constituent list is empty")
    if any(not c for c in constituents):
        raise AlignmentError(f"{word.text!r}: constituents must be non-empty")
    if len(word) < len(constituents):
        raise AlignmentError(
            f"{word.text!r} has {len(word)} characters, too short for "
            f"{len(constituents)} non-empty segments"
        )


def _memoized_segment_cost(
    text: str, constituents: tuple[str, ...]
) -> Callable[[int, int, int], int]:
    # Candidate segmentations share segments, so cache per (span, constituent).
    cache: dict[tuple[int, int, int], int] = {}

    def cost(start: int, stop: int, index: int) -> int:
        key = (start, stop, index)
        hit = cache.get(key)
        if hit is None:
            hit = cache[key] = levenshtein(text[start:stop], constituents[index])
        return hit

    return cost


def _build_result(
    word: Word,
    constituents: tuple[str, ...],
    cuts: tuple[int, ...],
    costs: tuple[int, ...],
) -> AlignmentResult:
    boundaries = Boundaries((0, *cuts, len(word)))
    return AlignmentResult(Segmentation(word, boundaries), costs, sum(costs))


def align_bruteforce(
    word: Word,
    constituents: tuple[str, ...] | list[str],
    *,
    candidate_cap: int = DEFAULT_CANDIDATE_CAP,
) -> AlignmentResult:
    """Exhaustive reference search over every cut combination."""
    constituents = tuple(constituents)
    _check_alignable(word, constituents)
    text = word.text
    n, k = len(text), len(constituents)
    segment_cost = _memoized_segment_cost(text, constituents)

    best_key = None
    best: tuple[tuple[int, ...], tuple[int, ...]] | None = None
    examined = 0
    for cuts in combinations(range(1, n), k - 1):
        examined += 1
        if examined > candidate_cap:
            raise SearchBudgetExceeded(
                f"{word.text!r}: more than {candidate_cap} candidate segmentations"
            )
        edges = (0, *cuts, n)
        costs = tuple(
            segment_cost(edges[i], edges[i + 1], i) for i in range(k)
        )
        key = _preference_key(sum(costs), costs, cuts)
        if best_key is None or key < best_key:
            best_key, best = key, (cuts, costs)
    assert best is not None  # n >= k guarantees at least one candidate
    return _build_result(word, constituents, best[0], best[1])


def enumerate_offsets(k: int, delta: int, bound: int) -> Iterator[tuple[int, ...]]:
    """All integer k-vectors with ``sum(|o|) == bound`` and ``sum(o) == delta``.

    Yields nothing when the bound is parity-incompatible with delta or too
    small to reach it. The order is deterministic: earlier positions take
    larger offsets first.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if bound < abs(delta) or (bound - delta) % 2 != 0:
        return

    def rec(pos: int, rest_bound: int, rest_delta: int, prefix: tuple[int, ...]):
        if pos == k - 1:
            if abs(rest_delta) == rest_bound:
                yield (*prefix, rest_delta)
            return
        for o in range(rest_bound, -rest_bound - 1, -1):
            next_bound = rest_bound - abs(o)
            next_delta = rest_delta - o
            if abs(next_delta) <= next_bound and (next_bound - next_delta) % 2 == 0:
                yield from rec(pos + 1, next_bound, next_delta, (*prefix, o))

    yield from rec(0, bound, delta, ())


def align_fast(
    word: Word,
    constituents: tuple[str, ...] | list[str],
    *,
    candidate_cap: int = DEFAULT_CANDIDATE_CAP,
    trace: list[tuple[int, int]] | None = None,
) -> AlignmentResult:
    """Best-first alignment search, equivalent to :func:`align_bruteforce`.

    Candidates are generated in rounds of increasing offset bound. Since the
    edit distance of a segment is at least the absolute difference of the
    lengths involved, the bound understates the true cost of every candidate
    it generates; the search may therefore stop once the bound passes the
    best cost seen. Candidates at a bound equal to the best cost are still
    enumerated so that ties resolve exactly as in the exhaustive search.

    When ``trace`` is given, a ``(bound, cost)`` pair is appended for every
    candidate examined.
    """
    constituents = tuple(constituents)
    _check_alignable(word, constituents)
    text = word.text
    n, k = len(text), len(constituents)
    lengths = tuple(len(c) for c in constituents)
    delta = n - sum(lengths)
    segment_cost = _memoized_segment_cost(text, constituents)

    best_key = None
    best: tuple[tuple[int, ...], tuple[int, ...]] | None = None
    examined = 0
    bound = abs(delta)
    # No candidate can have a larger offset sum than this, so the loop below
    # terminates even if an improvement never shows up.
    max_bound = n + sum(lengths)
    while bound <= max_bound:
        if best_key is not None and bound > best_key[0]:
            break
        for offsets in enumerate_offsets(k, delta, bound):
            if any(length + o < 1 for length, o in zip(lengths, offsets)):
                continue  # would create an empty segment
            examined += 1
            if examined > candidate_cap:
                raise SearchBudgetExceeded(
                    f"{word.text!r}: more than {candidate_cap} candidate segmentations"
                )
            cuts = []
            edge = 0
            for length, o in zip(lengths[:-1], offsets[:-1]):
                edge += length + o
                cuts.append(edge)
            cuts = tuple(cuts)
            edges = (0, *cuts, n)
            costs = tuple(
                segment_cost(edges[i], edges[i + 1], i) for i in range(k)
            )
            if trace is not None:
                trace.append((bound, sum(costs)))
            key = _preference_key(sum(costs), costs, cuts)
            if best_key is None or key < best_key:
                best_key, best = key, (cuts, costs)
        bound += 2  # offset sums share delta's parity
    assert best is not None
    return _build_result(word, constituents, best[0], best[1])
