import json

import pytest

from slotpunct.cli import main, read_config
from slotpunct.eval import render_table, score
from slotpunct.slotmask import LabeledSequence, write_jsonl
from slotpunct.synthetic import generate_articles

TRAIN_FLAGS = [
    "--iterations", "20", "--eval-every", "10", "--warmup-steps", "5", "--batch-size", "8",
    "--lr-head", "1e-3", "--lr-encoder", "1e-3", "--seq-len", "96",
]  # fmt: skip


def run(capsys, *argv, stdin=None, monkeypatch=None):
    if stdin is not None:
        import io
        import sys

        monkeypatch.setattr(sys, "stdin", io.TextIOWrapper(io.BytesIO(stdin.encode("utf-8")), encoding="utf-8"))
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def checkpoint(tmp_path_factory):
    out = tmp_path_factory.mktemp("ck") / "en"
    assert main(["train", "--lang", "en", "--synthetic", "60", "-o", str(out), *TRAIN_FLAGS]) == 0
    return out


def test_normalize(capsys, monkeypatch):
    code, out, _ = run(capsys, "normalize", "--lang", "ms", stdin="Betul?!\nRM50 sahaja!\n", monkeypatch=monkeypatch)
    assert code == 0 and out == "betul?\nlima puluh ringgit sahaja.\n"


def test_segment_and_mask(capsys, monkeypatch):
    code, out, _ = run(capsys, "segment", "--lang", "zh", stdin="我们今天去北京\n", monkeypatch=monkeypatch)
    assert code == 0 and out == "我们 今天 去 北京\n"
    code, out, _ = run(capsys, "mask", "--lang", "en", stdin="Hello, world. How?\n", monkeypatch=monkeypatch)
    assert json.loads(out) == {"lang": "en", "words": ["hello", "world", "how"], "labels": ["C", "P", "Q"]}


def test_usage_errors_exit_1(capsys):
    code, _, err = run(capsys, "normalize", "--lang", "en", "--bogus")
    assert code == 1 and "usage" in err
    assert run(capsys, "nosuchcommand")[0] == 1
    assert run(capsys, "normalize", "--lang", "fr")[0] == 1


def test_data_errors_exit_2(capsys, tmp_path):
    assert run(capsys, "stats", "--lang", "en", str(tmp_path / "missing"))[0] == 2
    bad = tmp_path / "bad.txt"
    bad.write_bytes(b"caf\xff\n")
    assert run(capsys, "normalize", "--lang", "en", str(bad))[0] == 2


def test_stats_table(capsys, tmp_path):
    root = tmp_path / "ms"
    root.mkdir()
    for split in ("train", "valid", "test"):
        (root / f"{split}.txt").write_text("Satu dua, tiga. Empat?\n\nLima.\n", encoding="utf-8")
    code, out, _ = run(capsys, "stats", "--lang", "ms", str(tmp_path))
    header, row = out.strip().splitlines()
    assert code == 0 and "Train Word" in header
    assert [c.strip() for c in row.split("|")][:5] == ["ms", "5", "2", "1", "1"]


def test_stats_reads_corpus_root_from_env(capsys, tmp_path, monkeypatch):
    (tmp_path / "en").mkdir()
    (tmp_path / "en" / "test.txt").write_text("one two. three?\n", encoding="utf-8")
    monkeypatch.setenv("PUNCT_DATA_DIR", str(tmp_path))
    code, out, _ = run(capsys, "stats", "--lang", "en")
    assert code == 0 and "3" in out.splitlines()[1]


def test_split_and_oversample(capsys, tmp_path):
    corpus = tmp_path / "ms"
    corpus.mkdir()
    (corpus / "all.txt").write_text("\n\n".join(a.text for a in generate_articles("ms", 20, 0)), encoding="utf-8")
    code, out, _ = run(capsys, "split", "--lang", "ms", str(tmp_path), "-o", str(tmp_path / "splits"), "--seed", "3")
    assert code == 0 and out.split() == ["train", "16", "valid", "2", "test", "2"]
    train = tmp_path / "splits" / "train.txt"
    q_before = train.read_text(encoding="utf-8").count("?")
    code, _, _ = run(capsys, "oversample", "--lang", "ms", str(train), "-o", str(tmp_path / "over.txt"), "--multiplier", "2")
    assert code == 0
    assert (tmp_path / "over.txt").read_text(encoding="utf-8").count("?") == 2 * q_before


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# train overrides\niterations = 6\neval-every = 3\nlr_head = 1e-3\nlr_encoder = 1e-3\n", encoding="utf-8")
    assert read_config(cfg)["eval_every"] == "3"
    code, out, _ = run(capsys, "train", "--lang", "en", "--synthetic", "20", "-o", str(tmp_path / "ck"), "--config", str(cfg), "--iterations", "3")
    assert code == 0
    assert [line.split("\t")[0] for line in out.splitlines()] == ["step 3"]
    cfg.write_text("not_a_flag = 1\n", encoding="utf-8")
    assert run(capsys, "normalize", "--lang", "en", "--config", str(cfg))[0] == 1


def test_punctuate_stdin(checkpoint, capsys, monkeypatch):
    text = "why the river stone light the garden forest doctor\n"
    code, out, err = run(capsys, "punctuate", "--lang", "en", "--model", str(checkpoint), "--summary", stdin=text, monkeypatch=monkeypatch)
    assert code == 0
    assert out.replace(",", "").replace(".", "").replace("?", "").split() == text.split()
    assert json.loads(err.strip().splitlines()[-1])["slots"] == 9


def test_punctuate_rejects_bad_window(checkpoint, capsys):
    assert run(capsys, "punctuate", "--lang", "en", "--model", str(checkpoint), "--window", "40", "--overlap", "60")[0] == 1


def test_evaluate(tmp_path, capsys):
    ref = [LabeledSequence(["a", "b", "c", "d", "e"], ["P", "C", "O", "Q", "P"], "en")]
    pred = [LabeledSequence(["a", "b", "c", "d", "e"], ["P", "O", "O", "Q", "C"], "en")]
    write_jsonl(ref, tmp_path / "r.jsonl")
    write_jsonl(pred, tmp_path / "p.jsonl")
    code, out, _ = run(capsys, "evaluate", "--pred", str(tmp_path / "p.jsonl"), "--ref", str(tmp_path / "r.jsonl"), "--name", "model")
    assert code == 0 and out.strip() == render_table({"model": score(pred, ref)})
    assert "66.7/50.0/57.1" in out
    code, out, _ = run(capsys, "evaluate", "--pred", str(tmp_path / "p.jsonl"), "--ref", str(tmp_path / "r.jsonl"), "--json")
    (tmp_path / "a.json").write_text(out, encoding="utf-8")
    write_jsonl([LabeledSequence(["a"], ["O"], "en")], tmp_path / "short.jsonl")
    assert run(capsys, "evaluate", "--pred", str(tmp_path / "short.jsonl"), "--ref", str(tmp_path / "r.jsonl"))[0] == 2

    code, out, _ = run(capsys, "compare", str(tmp_path / "a.json"), str(tmp_path / "a.json"))
    assert code == 0 and "+0.0/+0.0/+0.0" in out


def test_compare_baselines(capsys):
    code, out, _ = run(capsys, "compare", "--baseline", "segmenter")
    assert code == 0 and "-17.2" in out.splitlines()[-1]
    code, out, _ = run(capsys, "compare", "--baseline", "mono-vs-multi")
    assert code == 0 and out.count("Mono-") == 3 * 2


def test_compare_report_against_published_table(tmp_path, capsys):
    seqs = [LabeledSequence(["a", "b", "c"], ["C", "P", "Q"], "zh")]
    (tmp_path / "ours.json").write_text(score(seqs, seqs).to_json(), encoding="utf-8")
    code, out, _ = run(capsys, "compare", "--baseline", "mandarin", str(tmp_path / "ours.json"))
    assert code == 0 and "| ours " in out
    delta = out.strip().splitlines()[-1]
    assert "ours - MLM-Punct" in delta and delta.split("|")[-2].strip() == "+31.4/+19.5/+26.2"
    assert run(capsys, "compare", str(tmp_path / "ours.json"))[0] == 1


def test_ablate_identical_checkpoints_give_zero_delta(checkpoint, tmp_path, capsys):
    (tmp_path / "en").mkdir()
    (tmp_path / "en" / "test.txt").write_text("\n\n".join(a.text for a in generate_articles("en", 5, 9)), encoding="utf-8")
    code, out, _ = run(capsys, "ablate", "--lang", "en", "--word-model", str(checkpoint), "--subword-model", str(checkpoint), "--data", str(tmp_path))
    assert code == 0
    delta_row = out.strip().splitlines()[-1]
    assert set(delta_row.split("|")[2].strip().split("/")) == {"+0.0"}


def test_ablate_missing_checkpoints(capsys, tmp_path):
    assert run(capsys, "ablate", "--data", str(tmp_path))[0] == 2
