#!/usr/bin/env python3
"""Regenerate the binding parity vectors under bindings/testdata/.

Every expected output is the raw stdout line of the decompound CLI, so the
vector file pins the exact bytes the bindings must reproduce. Rerunning the
script is byte-stable: the fixture models retrain identically under their
pinned seeds and the case sampler is seeded.
"""

from __future__ import annotations

import json
import random
import subprocess
import sys
from pathlib import Path

TESTDATA = Path(__file__).resolve().parent.parent / "bindings" / "testdata"
CLI = [sys.executable, "-m", "decompound"]

ROOTS = [
    "haus", "boot", "markt", "wasser", "berg", "schiff", "zeit", "spiel",
    "hand", "buch", "land", "bahn",
]
N_ALIGN = 500
N_ENCODE = 300
N_IS_HARD = 200


def run_cli(args: list[str], stdin_text: str) -> list[str]:
    proc = subprocess.run(
        CLI + args, input=stdin_text, capture_output=True, text=True
    )
    if proc.returncode != 0:
        raise SystemExit(f"decompound {' '.join(args)} failed:\n{proc.stderr}")
    return proc.stdout.splitlines()


def build_corpus(rng: random.Random, path: Path) -> list[str]:
    """A small compounding corpus: frequent roots, occasional two-root words."""
    lines = []
    for _ in range(500):
        words = [rng.choice(ROOTS) for _ in range(rng.randint(3, 6))]
        if rng.random() < 0.5:
            words.append(rng.choice(ROOTS) + rng.choice(ROOTS))
        lines.append(" ".join(words))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return lines


def train(corpus: Path, vocab: int, out: Path) -> None:
    run_cli(
        [
            "train-tokenizer",
            "--corpus", f"de={corpus}",
            "--vocab-size", str(vocab),
            "--seed", "99",
            "--out", str(out),
        ],
        "",
    )


def alphabet_size(lines: list[str]) -> int:
    chars = set("▁")
    for line in lines:
        for word in line.split():
            chars.update(word)
    return len(chars)


def align_cases(rng: random.Random) -> list[dict]:
    cases = [
        {"word": "bridesmaid", "constituents": ["bride", "maid"], "lang": "en"},
        {"word": "maid", "constituents": ["maid"], "lang": "en"},
        {"word": "arbeitsmarkt", "constituents": ["arbeit", "markt"], "lang": "de"},
        {"word": "hausboot", "constituents": ["haus", "boot"], "lang": "de"},
        {"word": "schifffahrt", "constituents": ["schiff", "fahrt"], "lang": "de"},
        {"word": "körperteil", "constituents": ["körper", "teil"], "lang": "de"},
        {"word": "highwayman", "constituents": ["high", "way", "man"], "lang": "en"},
    ]
    while len(cases) < N_ALIGN:
        # every fourth case uses a one-letter alphabet to stress tie-breaking
        alphabet = "a" if len(cases) % 4 == 0 else "abcd"
        n = rng.randint(1, 12)
        word = "".join(rng.choice(alphabet) for _ in range(n))
        k = rng.randint(1, min(3, n))
        if k == 1:
            # single-constituent records must be identity pairs
            constituents = [word]
        else:
            constituents = [
                "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 6)))
                for _ in range(k)
            ]
        lang = "de" if len(cases) % 2 else "en"
        cases.append({"word": word, "constituents": constituents, "lang": lang})
    return cases


def encode_cases(rng: random.Random, corpus_lines: list[str]) -> list[dict]:
    texts = ["a", "h", "z", "haus", "hausboot", "wasserberg zeitspiel"]
    words = sorted({w for line in corpus_lines for w in line.split()})
    while len(texts) < N_ENCODE:
        kind = len(texts) % 5
        if kind == 0:
            text = " ".join(rng.choice(words) for _ in range(rng.randint(1, 4)))
        elif kind == 1:
            text = rng.choice(ROOTS) + rng.choice(ROOTS)
        elif kind == 2:
            # characters outside the training alphabet exercise the unk path
            text = rng.choice(ROOTS) + rng.choice("xyq!7")
        elif kind == 3:
            text = "".join(rng.choice("abcdehmrstuwz") for _ in range(rng.randint(1, 9)))
        else:
            text = rng.choice(ROOTS) + " " + rng.choice(ROOTS) + rng.choice(ROOTS)
        texts.append(text)
    return [{"model": "model_toy.json", "text": t} for t in texts]


def is_hard_cases(rng: random.Random) -> list[dict]:
    cases = []
    while len(cases) < N_IS_HARD:
        model = "model_chars.json" if len(cases) % 5 == 0 else "model_toy.json"
        parts = [rng.choice(ROOTS) for _ in range(2 if len(cases) % 3 else 3)]
        word = "".join(parts)
        if len(cases) % 7 == 0:
            # an off-constituent cut, still a valid interior boundary
            cuts = sorted(rng.sample(range(1, len(word)), len(parts) - 1))
        else:
            cuts, total = [], 0
            for part in parts[:-1]:
                total += len(part)
                cuts.append(total)
        boundaries = [0, *cuts, len(word)]
        lang = "de" if len(cases) % 2 else "nl"
        cases.append({"model": model, "word": word, "lang": lang,
                      "boundaries": boundaries})
    return cases


def main() -> None:
    TESTDATA.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20240819)

    corpus = TESTDATA / "corpus.txt"
    lines = build_corpus(rng, corpus)
    train(corpus, 48, TESTDATA / "model_toy.json")
    train(corpus, alphabet_size(lines), TESTDATA / "model_chars.json")
    chars_model = json.loads((TESTDATA / "model_chars.json").read_text("utf-8"))
    multi = [p for p, _ in chars_model["pieces"] if len(p) > 1]
    if multi:
        raise SystemExit(f"character model kept multi-char pieces: {multi[:5]}")
    corpus.unlink()

    vectors = []

    aligns = align_cases(rng)
    stdin_text = "".join(
        json.dumps(c, ensure_ascii=False, separators=(",", ":")) + "\n"
        for c in aligns
    )
    out = run_cli(["align"], stdin_text)
    assert len(out) == len(aligns)
    for case, line in zip(aligns, out):
        vectors.append({"op": "align", **case, "expected": line})

    encodes = encode_cases(rng, lines)
    stdin_text = "".join(c["text"] + "\n" for c in encodes)
    out = run_cli(
        ["encode", "--model", str(TESTDATA / "model_toy.json")], stdin_text
    )
    assert len(out) == len(encodes)
    for case, line in zip(encodes, out):
        vectors.append({"op": "encode", **case, "expected": line})

    hards = is_hard_cases(rng)
    for model in ("model_toy.json", "model_chars.json"):
        group = [c for c in hards if c["model"] == model]
        stdin_text = "".join(
            json.dumps(
                {"word": c["word"], "lang": c["lang"], "boundaries": c["boundaries"]},
                ensure_ascii=False, separators=(",", ":"),
            ) + "\n"
            for c in group
        )
        out = run_cli(
            [
                "hardness",
                "--model", str(TESTDATA / model),
                "--gold", "-",
                "--per-word", "-",
            ],
            stdin_text,
        )
        assert len(out) == len(group)
        for case, line in zip(group, out):
            vectors.append({"op": "is_hard", **case, "expected": line})

    assert len(vectors) == N_ALIGN + N_ENCODE + N_IS_HARD
    with open(TESTDATA / "vectors.jsonl", "w", encoding="utf-8") as handle:
        for i, vec in enumerate(vectors, start=1):
            row = {"id": i, **vec}
            handle.write(json.dumps(row, ensure_ascii=False, separators=(",", ":")))
            handle.write("\n")

    hard_lines = [v for v in vectors if v["op"] == "is_hard"]
    n_hard = sum(1 for v in hard_lines if '"hard":true' in v["expected"])
    print(f"wrote {len(vectors)} vectors to {TESTDATA / 'vectors.jsonl'}")
    print(f"is_hard split: {n_hard} hard / {len(hard_lines) - n_hard} easy")


if __name__ == "__main__":
    main()
