import json
import math
import subprocess
import sys

import pytest


def run(*args, stdin=None):
    return subprocess.run(
        [sys.executable, "-m", "decompound", *args],
        capture_output=True,
        text=True,
        input=stdin,
    )


def write_model(path, weights, mode="whitespace"):
    total = sum(weights.values())
    pieces = [[t, math.log(w / total)] for t, w in sorted(weights.items())]
    payload = {
        "version": 1,
        "type": "unigram",
        "marker": "▁",
        "unk_piece": "<unk>",
        "training_pretokenization": mode,
        "pieces": pieces,
    }
    path.write_text(json.dumps(payload, ensure_ascii=False), encoding="utf-8")


def jsonl(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


# ------------------------------------------------------------- plumbing


def test_version_and_help():
    result = run("--version")
    assert result.returncode == 0
    assert result.stdout.startswith("decompound ")
    assert run("--help").returncode == 0
    assert run("mine", "--help").returncode == 0


def test_unknown_subcommand_is_a_usage_error():
    assert run("frobnicate").returncode == 2


def test_missing_required_flag_is_a_usage_error():
    result = run("align", "--candidate-cap", "oops")
    assert result.returncode == 2


def test_every_run_logs_its_configuration(tmp_path):
    result = run("align", "--in", "-", "--out", "-", stdin="")
    assert "resolved config" in result.stderr


def test_missing_input_file_exits_one_with_message(tmp_path):
    result = run("mine", "--corpus", str(tmp_path / "nope.txt"), "--lang", "en")
    assert result.returncode == 1
    assert "nope.txt" in result.stderr
    assert "Traceback" not in result.stderr


# ------------------------------------------------------------------ mine


@pytest.fixture
def corpus_file(tmp_path):
    text = "\n".join(
        ["side-experiments"] * 5 + ["sideexperiments"] * 1000 + ["filler"] * 2000
    )
    path = tmp_path / "corpus.txt"
    path.write_text(text + "\n", encoding="utf-8")
    return path


def test_mine_emits_pairs_and_frequency_table(tmp_path, corpus_file):
    freq = tmp_path / "freq.tsv"
    result = run(
        "mine",
        "--corpus", str(corpus_file),
        "--lang", "en",
        "--freq-out", str(freq),
    )
    assert result.returncode == 0, result.stderr
    rows = jsonl(result.stdout)
    assert rows == [
        {
            "input": "sideexperiments",
            "target": "side-experiments",
            "lang": "en",
            "hyphenated": True,
        },
        {"input": "filler", "target": "filler", "lang": "en", "hyphenated": False},
    ]
    assert freq.read_text(encoding="utf-8") == (
        "filler\t2000\nsideexperiments\t1000\nside-experiments\t5\n"
    )


def test_mine_ratio_filter_drops_rare_hyphenations(tmp_path):
    path = tmp_path / "corpus.txt"
    path.write_text(
        "\n".join(["experi-ments"] + ["experiments"] * 1000 + ["filler"] * 50)
        + "\n",
        encoding="utf-8",
    )
    strict = run("mine", "--corpus", str(path), "--lang", "en")
    assert strict.returncode == 0
    assert jsonl(strict.stdout) == []  # no positives survive, so no negatives
    relaxed = run(
        "mine", "--corpus", str(path), "--lang", "en", "--no-ratio-filter"
    )
    assert relaxed.returncode == 0
    # "experiments" backs the positive, so the negative falls to "filler"
    targets = [row["target"] for row in jsonl(relaxed.stdout)]
    assert targets == ["experi-ments", "filler"]


def test_mine_reruns_are_byte_identical(tmp_path, corpus_file):
    out1, out2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for out in (out1, out2):
        assert (
            run(
                "mine", "--corpus", str(corpus_file), "--lang", "en",
                "--out", str(out),
            ).returncode
            == 0
        )
    assert out1.read_bytes() == out2.read_bytes()


def test_mine_threads_match_single_threaded_run(tmp_path):
    a = tmp_path / "a.txt"
    b = tmp_path / "b.txt"
    a.write_text("\n".join(["well-known"] * 3 + ["wellknown"] * 2), encoding="utf-8")
    b.write_text("\n".join(["wellknown"] * 5 + ["other"] * 9), encoding="utf-8")
    single = run(
        "mine", "--corpus", str(a), "--corpus", str(b), "--lang", "en",
        "--threads", "1",
    )
    threaded = run(
        "mine", "--corpus", str(a), "--corpus", str(b), "--lang", "en",
        "--threads", "2",
    )
    assert single.returncode == threaded.returncode == 0
    assert single.stdout == threaded.stdout


# --------------------------------------------------------------------- align


def test_align_stdin_to_stdout():
    record = {"word": "bridesmaid", "lang": "en", "constituents": ["bride", "maid"]}
    result = run("align", stdin=json.dumps(record) + "\n")
    assert result.returncode == 0, result.stderr
    row = jsonl(result.stdout)[0]
    assert row["boundaries"] == [0, 6, 10]
    assert row["segments"] == ["brides", "maid"]
    assert row["cost"] == 1


def test_align_reports_file_and_line_on_bad_input(tmp_path):
    path = tmp_path / "in.jsonl"
    path.write_text(
        '{"word":"ok","lang":"en","constituents":["o","k"]}\nnot json\n',
        encoding="utf-8",
    )
    result = run("align", "--in", str(path))
    assert result.returncode == 1
    assert f"{path}:2" in result.stderr


def test_align_rejects_invalid_language_tag():
    record = {"word": "ab", "lang": "ENGLISH", "constituents": ["a", "b"]}
    result = run("align", stdin=json.dumps(record) + "\n")
    assert result.returncode == 1
    assert "<stdin>:1" in result.stderr


# ------------------------------------------------------------- split-predict


def test_split_predict_uses_frequency_table(tmp_path):
    freq = tmp_path / "freq.tsv"
    freq.write_text("arbeit\t5000\nmarkt\t4000\n", encoding="utf-8")
    record = {"word": "arbeitsmarkt", "lang": "de"}
    result = run(
        "split-predict", "--freq-table", str(freq), "--lang", "de",
        stdin=json.dumps(record) + "\n",
    )
    assert result.returncode == 0, result.stderr
    assert jsonl(result.stdout) == [
        {"word": "arbeitsmarkt", "lang": "de", "constituents": ["arbeit", "markt"]}
    ]


def test_split_predict_honors_config_file(tmp_path):
    freq = tmp_path / "freq.tsv"
    freq.write_text("ab\t100\ncdef\t100\n", encoding="utf-8")
    config = tmp_path / "config.json"
    config.write_text('{"min_part_len": 2}', encoding="utf-8")
    record = {"word": "abcdef", "lang": "en"}
    without = run(
        "split-predict", "--freq-table", str(freq),
        stdin=json.dumps(record) + "\n",
    )
    assert jsonl(without.stdout)[0]["constituents"] == ["abcdef"]
    with_config = run(
        "split-predict", "--freq-table", str(freq), "--config", str(config),
        stdin=json.dumps(record) + "\n",
    )
    assert jsonl(with_config.stdout)[0]["constituents"] == ["ab", "cdef"]


# ------------------------------------------------------------- build-dataset


def test_build_dataset_writes_splits_and_stats(tmp_path):
    lexicon = tmp_path / "lexicon.tsv"
    lines = [f"p{i}q{i}\tp{i},q{i}\ten" for i in range(12)]
    lines.append("tiny\tti,ny\tzu")
    lexicon.write_text("\n".join(lines) + "\n", encoding="utf-8")
    out_dir = tmp_path / "data"
    result = run(
        "build-dataset", "--lexicon", str(lexicon), "--out-dir", str(out_dir),
        "--min-lang-size", "10", "--eval-cap", "5", "--seed", "3",
    )
    assert result.returncode == 0, result.stderr
    train = jsonl((out_dir / "train.jsonl").read_text(encoding="utf-8"))
    eval_rows = jsonl((out_dir / "eval.jsonl").read_text(encoding="utf-8"))
    # 12 positives + 24 negatives for en; zu has 3 entries and is dropped
    assert len(eval_rows) == 5
    assert len(train) == 31
    assert all(row["lang"] == "en" for row in train + eval_rows)
    stats = json.loads((out_dir / "stats.json").read_text(encoding="utf-8"))
    assert stats["eval"]["en"]["total"] == 5
    assert stats["train"]["en"]["total"] == 31
    assert (
        stats["train"]["en"]["positives"] + stats["eval"]["en"]["positives"] == 12
    )


def test_build_dataset_rebuilds_byte_identically(tmp_path):
    lexicon = tmp_path / "lexicon.tsv"
    lexicon.write_text(
        "\n".join(f"a{i}b{i}\ta{i},b{i}\ten" for i in range(40)) + "\n",
        encoding="utf-8",
    )
    dirs = (tmp_path / "one", tmp_path / "two")
    for out_dir in dirs:
        assert (
            run(
                "build-dataset", "--lexicon", str(lexicon),
                "--out-dir", str(out_dir), "--min-lang-size", "10", "--seed", "1",
            ).returncode
            == 0
        )
    for name in ("train.jsonl", "eval.jsonl", "stats.json"):
        assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes()


# ----------------------------------------------------- train-tokenizer/encode


def test_train_tokenizer_then_encode(tmp_path):
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("aaaa\n" * 100, encoding="utf-8")
    model_path = tmp_path / "model.json"
    result = run(
        "train-tokenizer", "--corpus", str(corpus), "--vocab-size", "3",
        "--out", str(model_path),
    )
    assert result.returncode == 0, result.stderr
    encoded = run("encode", "--model", str(model_path), stdin="aaaa\n")
    assert encoded.returncode == 0
    row = jsonl(encoded.stdout)[0]
    assert row["pieces"] == ["▁aaaa"]
    assert row["word_boundaries"] == [[0, 4]]


def test_train_tokenizer_is_deterministic(tmp_path):
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("the cat sat on the mat\n" * 20, encoding="utf-8")
    models = (tmp_path / "m1.json", tmp_path / "m2.json")
    for path in models:
        assert (
            run(
                "train-tokenizer", "--corpus", f"en={corpus}",
                "--vocab-size", "20", "--out", str(path),
            ).returncode
            == 0
        )
    assert models[0].read_bytes() == models[1].read_bytes()


def test_train_tokenizer_compound_mode_with_gold_segmenter(tmp_path):
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("hausboot\n" * 50 + "haus boot\n" * 5, encoding="utf-8")
    gold = tmp_path / "gold.jsonl"
    gold.write_text(
        '{"word":"hausboot","lang":"de","constituents":["haus","boot"]}\n',
        encoding="utf-8",
    )
    model_path = tmp_path / "model.json"
    result = run(
        "train-tokenizer", "--corpus", f"de={corpus}", "--vocab-size", "12",
        "--mode", "compound", "--segmenter", f"gold:{gold}",
        "--out", str(model_path),
    )
    assert result.returncode == 0, result.stderr
    model = json.loads(model_path.read_text(encoding="utf-8"))
    assert model["training_pretokenization"] == "compound"
    texts = [text for text, _ in model["pieces"]]
    assert "▁haus" in texts and "boot" in texts


def test_train_tokenizer_sampling_is_deterministic(tmp_path):
    en = tmp_path / "en.txt"
    de = tmp_path / "de.txt"
    en.write_text("the cat sat\n" * 90, encoding="utf-8")
    de.write_text("das boot faehrt\n" * 10, encoding="utf-8")
    models = (tmp_path / "m1.json", tmp_path / "m2.json")
    for path in models:
        result = run(
            "train-tokenizer", "--corpus", f"en={en}", "--corpus", f"de={de}",
            "--vocab-size", "25", "--sample-size", "80", "--alpha", "0.2",
            "--seed", "7", "--out", str(path),
        )
        assert result.returncode == 0, result.stderr
    assert models[0].read_bytes() == models[1].read_bytes()


def test_encode_rejects_malformed_model(tmp_path):
    bad = tmp_path / "model.json"
    bad.write_text("{}", encoding="utf-8")
    result = run("encode", "--model", str(bad), stdin="a\n")
    assert result.returncode == 1
    assert "missing key" in result.stderr


# ------------------------------------------------------------------ hardness


def test_hardness_report_and_per_word(tmp_path):
    model_path = tmp_path / "model.json"
    write_model(model_path, {"▁swimsuit": 0.4, "▁haus": 0.3, "boot": 0.3})
    gold = tmp_path / "gold.jsonl"
    gold.write_text(
        '{"word":"swimsuit","lang":"en","constituents":["swim","suit"]}\n'
        '{"word":"hausboot","lang":"de","boundaries":[0,4,8]}\n'
        '{"word":"maid","lang":"en","constituents":["maid"]}\n',
        encoding="utf-8",
    )
    per_word = tmp_path / "per_word.jsonl"
    result = run(
        "hardness", "--model", str(model_path), "--gold", str(gold),
        "--per-word", str(per_word),
    )
    assert result.returncode == 0, result.stderr
    report = json.loads(result.stdout)
    assert report["per_language"]["en"] == {
        "compounds": 1, "hard": 1, "rate": 100.0
    }
    assert report["per_language"]["de"] == {
        "compounds": 1, "hard": 0, "rate": 0.0
    }
    assert report["macro"] == 50.0
    rows = jsonl(per_word.read_text(encoding="utf-8"))
    assert {"word": "swimsuit", "lang": "en", "hard": True} in rows
    assert {"word": "hausboot", "lang": "de", "hard": False} in rows
    assert len(rows) == 2  # the non-compound row is skipped


def test_hardness_per_word_on_stdout_moves_report_to_file(tmp_path):
    model_path = tmp_path / "model.json"
    write_model(model_path, {"▁ab": 1.0})
    gold = tmp_path / "gold.jsonl"
    gold.write_text('{"word":"ab","lang":"en","boundaries":[0,1,2]}\n', encoding="utf-8")
    report_path = tmp_path / "report.json"
    result = run(
        "hardness", "--model", str(model_path), "--gold", str(gold),
        "--per-word", "-", "--report", str(report_path),
    )
    assert result.returncode == 0, result.stderr
    assert jsonl(result.stdout) == [{"word": "ab", "lang": "en", "hard": True}]
    assert json.loads(report_path.read_text(encoding="utf-8"))["macro"] == 100.0


def test_hardness_requires_compounds(tmp_path):
    model_path = tmp_path / "model.json"
    write_model(model_path, {"▁a": 1.0})
    gold = tmp_path / "gold.jsonl"
    gold.write_text('{"word":"a","lang":"en","constituents":["a"]}\n', encoding="utf-8")
    result = run("hardness", "--model", str(model_path), "--gold", str(gold))
    assert result.returncode == 1
    assert "no compounds" in result.stderr


# ------------------------------------------------------------- token-origins


def test_token_origins_ranks_languages(tmp_path):
    multi = tmp_path / "multi.json"
    write_model(multi, {"x": 0.5, "y": 0.5})
    en = tmp_path / "en.json"
    write_model(en, {"x": 0.4, "y": 0.6})
    de = tmp_path / "de.json"
    write_model(de, {"x": 0.9, "a": 0.1})
    result = run(
        "token-origins", "--multi", str(multi),
        "--mono", f"en={en}", "--mono", f"de={de}",
    )
    assert result.returncode == 0, result.stderr
    rows = {row["piece"]: row["origins"] for row in jsonl(result.stdout)}
    assert rows == {"x": ["de", "en"], "y": ["en"]}


def test_token_origins_requires_language_tags(tmp_path):
    multi = tmp_path / "multi.json"
    write_model(multi, {"x": 1.0})
    result = run("token-origins", "--multi", str(multi), "--mono", str(multi))
    assert result.returncode == 1
    assert "language tag" in result.stderr


# ---------------------------------------------------------------------- eval


def eval_fixture(tmp_path):
    gold = tmp_path / "gold.jsonl"
    gold.write_text(
        '{"word":"bridesmaid","lang":"en","constituents":["bride","maid"]}\n'
        '{"word":"highwayman","lang":"en","constituents":["high","way","man"]}\n'
        '{"word":"maid","lang":"en","constituents":["maid"]}\n',
        encoding="utf-8",
    )
    pred = tmp_path / "pred.jsonl"
    pred.write_text(
        '{"word":"bridesmaid","lang":"en","constituents":["brides","maid"]}\n'
        '{"word":"highwayman","lang":"en","constituents":["highway","man"]}\n'
        '{"word":"maid","lang":"en","constituents":["maid"]}\n',
        encoding="utf-8",
    )
    return gold, pred


def test_eval_prints_table_and_writes_report(tmp_path):
    gold, pred = eval_fixture(tmp_path)
    report_path = tmp_path / "report.json"
    result = run(
        "eval", "--gold", str(gold), "--pred", str(pred),
        "--mode", "segmentation", "--report", str(report_path),
    )
    assert result.returncode == 0, result.stderr
    lines = result.stdout.splitlines()
    assert lines[0].split() == ["en", "macro"]
    assert lines[1].split() == ["P", "50.0", "50.0"]
    assert lines[2].split() == ["N", "100.0", "100.0"]
    assert lines[3].split() == ["All", "66.7", "66.7"]
    report = json.loads(report_path.read_text(encoding="utf-8"))
    assert report["mode"] == "segmentation"
    assert report["languages"]["en"]["positive"]["correct"] == 1
    assert report["macro"]["all"] == pytest.approx(200 / 3)


def test_eval_modes_differ_on_normalization(tmp_path):
    gold, pred = eval_fixture(tmp_path)
    segmentation = run(
        "eval", "--gold", str(gold), "--pred", str(pred), "--mode", "segmentation"
    )
    normalization = run(
        "eval", "--gold", str(gold), "--pred", str(pred), "--mode", "normalization"
    )
    # brides+maid matches the surface cut but not the normalized constituents
    assert segmentation.stdout.splitlines()[1].split()[1] == "50.0"
    assert normalization.stdout.splitlines()[1].split()[1] == "0.0"


def test_eval_germanet_head_mode(tmp_path):
    gold = tmp_path / "gold.jsonl"
    gold.write_text(
        '{"word":"kunstausstellung","lang":"de",'
        '"constituents":["kunst","ausstellung"]}\n',
        encoding="utf-8",
    )
    pred = tmp_path / "pred.jsonl"
    pred.write_text(
        '{"word":"kunstausstellung","lang":"de",'
        '"constituents":["wrong","ausstellung"]}\n',
        encoding="utf-8",
    )
    result = run(
        "eval", "--gold", str(gold), "--pred", str(pred), "--mode", "germanet-head"
    )
    assert result.returncode == 0, result.stderr
    assert result.stdout.splitlines()[1].split()[1] == "100.0"


def test_eval_with_model_adds_hard_easy_breakdown(tmp_path):
    gold, pred = eval_fixture(tmp_path)
    model_path = tmp_path / "model.json"
    write_model(
        model_path,
        {"▁bridesmaid": 0.4, "▁high": 0.2, "way": 0.2, "man": 0.2},
    )
    report_path = tmp_path / "report.json"
    result = run(
        "eval", "--gold", str(gold), "--pred", str(pred),
        "--mode", "segmentation", "--model", str(model_path),
        "--report", str(report_path),
    )
    assert result.returncode == 0, result.stderr
    assert "easy:" in result.stdout and "hard:" in result.stdout
    report = json.loads(report_path.read_text(encoding="utf-8"))
    # bridesmaid is stored whole (hard, predicted right); highwayman splits
    # cleanly (easy, predicted wrong: the highway cut is missing)
    assert report["hard_easy"]["hard"] == {
        "correct": 1, "total": 1, "accuracy": 100.0
    }
    assert report["hard_easy"]["easy"] == {
        "correct": 0, "total": 1, "accuracy": 0.0
    }


def test_eval_missing_predictions_are_counted(tmp_path):
    gold, _ = eval_fixture(tmp_path)
    pred = tmp_path / "empty.jsonl"
    pred.write_text(
        '{"word":"maid","lang":"en","constituents":["maid"]}\n', encoding="utf-8"
    )
    result = run(
        "eval", "--gold", str(gold), "--pred", str(pred), "--mode", "segmentation"
    )
    assert result.returncode == 0
    assert "2 gold entries had no prediction" in result.stderr


# ------------------------------------------------------------------ pipeline


def test_mine_to_eval_pipeline(tmp_path):
    # mine a frequency table, split with it, align the splits, then score.
    corpus = tmp_path / "corpus.txt"
    corpus.write_text(
        "\n".join(
            ["arbeits-markt"] * 10
            + ["arbeitsmarkt"] * 100
            + ["arbeit"] * 5000
            + ["markt"] * 4000
        )
        + "\n",
        encoding="utf-8",
    )
    freq = tmp_path / "freq.tsv"
    assert (
        run(
            "mine", "--corpus", str(corpus), "--lang", "de",
            "--freq-out", str(freq), "--out", str(tmp_path / "pairs.jsonl"),
        ).returncode
        == 0
    )
    gold = tmp_path / "gold.jsonl"
    gold.write_text(
        '{"word":"arbeitsmarkt","lang":"de","constituents":["arbeit","markt"]}\n'
        '{"word":"markt","lang":"de","constituents":["markt"]}\n',
        encoding="utf-8",
    )
    pred = tmp_path / "pred.jsonl"
    assert (
        run(
            "split-predict", "--freq-table", str(freq), "--lang", "de",
            "--in", str(gold), "--out", str(pred),
        ).returncode
        == 0
    )
    aligned = run("align", "--in", str(pred))
    assert aligned.returncode == 0
    by_word = {row["word"]: row for row in jsonl(aligned.stdout)}
    assert by_word["arbeitsmarkt"]["boundaries"] == [0, 7, 12]
    assert by_word["arbeitsmarkt"]["segments"] == ["arbeits", "markt"]
    result = run(
        "eval", "--gold", str(gold), "--pred", str(pred), "--mode", "segmentation"
    )
    assert result.returncode == 0, result.stderr
    assert result.stdout.splitlines()[3].split() == ["All", "100.0", "100.0"]
