import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

import synth
from extraphrase.cli import main
from extraphrase.config import ENDPOINT_ENV, config_hash, load_config, normalize
from extraphrase.corpus_io import ParallelPair, read_pairs, write_pairs
from extraphrase.errors import ConfigError

DATA = Path(__file__).parent / "data"

TWO = """1\tthe\tthe\tDET\t_\t_\t2\tdet\t_\t_
2\tcat\tcat\tNOUN\t_\t_\t3\tnsubj\t_\t_
3\tsat\tsat\tVERB\t_\t_\t0\troot\t_\t_
4\ton\ton\tADP\t_\t_\t7\tcase\t_\t_
5\tthe\tthe\tDET\t_\t_\t7\tdet\t_\t_
6\tred\tred\tADJ\t_\t_\t7\tamod\t_\t_
7\tmat\tmat\tNOUN\t_\t_\t3\tobl\t_\t_

1\tdogs\tdog\tNOUN\t_\t_\t2\tnsubj\t_\t_
2\tbark\tbark\tVERB\t_\t_\t0\troot\t_\t_

"""
BAD = "1\ta\ta\tX\t_\t_\t0\troot\t_\t_\n2\tb\tb\tX\t_\t_\t2\tdep\t_\t_\n\n"


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


def pairs_file(path, pairs):
    with open(path, "w", encoding="utf-8") as f:
        write_pairs(pairs, f)
    return str(path)


# -- config ----------------------------------------------------------------------

def test_defaults():
    cfg = load_config()
    assert cfg.roundtrip is None
    assert cfg.augment.doc_sentence_limit == 3
    assert "det" in cfg.compression.functional_deprels


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="bogus"):
        normalize({"augment": {"bogus": 1}})
    with pytest.raises(ConfigError):
        normalize({"roundtrip": {"forward": {"type": "identity", "x": 1},
                                 "backward": {"type": "identity"}}})


def test_config_file_and_overrides(tmp_path):
    path = write(tmp_path / "c.json", json.dumps({
        "compression": {"depth_rounding": "floor"},
        "roundtrip": {"forward": {"type": "dictionary", "table": {"cat": "Katze"}},
                      "backward": {"type": "identity"}, "batch_size": 4},
        "seed": 3,
    }))
    cfg = load_config(path, {"seed": 9, "augment": {"doc_sentence_limit": 1}})
    assert cfg.compression.depth_rounding == "floor"
    assert cfg.roundtrip.batch_size == 4
    assert cfg.seed == 9 and cfg.augment.doc_sentence_limit == 1
    assert cfg.augment.roundtrip is cfg.roundtrip
    assert cfg.hash == config_hash(normalize(cfg.normalized))


def test_endpoint_env_override(monkeypatch):
    raw = {"roundtrip": {"forward": {"type": "http", "endpoint": "http://a/", "model": "en-de"},
                         "backward": {"type": "http", "endpoint": "http://a/", "model": "de-en"}}}
    monkeypatch.setenv(ENDPOINT_ENV, "http://b/")
    cfg = load_config(None, raw)
    assert cfg.roundtrip.forward.endpoint == "http://b/"


# -- compress --------------------------------------------------------------------

def test_compress_two_sentences(tmp_path):
    out = tmp_path / "out.txt"
    assert main(["compress", write(tmp_path / "in.conllu", TWO), "-o", str(out)]) == 0
    assert out.read_text().splitlines() == ["the cat sat on the mat", "bark"]


def test_compress_strict_leaves_no_file(tmp_path):
    out = tmp_path / "out.txt"
    src = write(tmp_path / "in.conllu", TWO + BAD)
    assert main(["compress", src, "-o", str(out), "--strict"]) == 2
    assert not out.exists()
    assert os.listdir(tmp_path) == ["in.conllu"]
    assert main(["compress", src, "-o", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 2


def test_compress_golden(tmp_path):
    expected = (DATA / "ten.compressed.txt").read_bytes()
    for i in range(2):
        out = tmp_path / f"o{i}.txt"
        assert main(["compress", str(DATA / "ten.conllu"), "-o", str(out)]) == 0
        assert out.read_bytes() == expected


def test_missing_input_is_data_error(tmp_path):
    assert main(["compress", str(tmp_path / "nope.conllu")]) == 2


def test_bad_config_is_usage_error(tmp_path):
    cfg = write(tmp_path / "c.json", '{"nope": 1}')
    assert main(["compress", str(DATA / "ten.conllu"), "--config", cfg]) == 1


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["compress"])
    assert exc.value.code == 1


# -- augment ---------------------------------------------------------------------

def identity_config(tmp_path):
    return write(tmp_path / "id.json", json.dumps({"roundtrip": {
        "forward": {"type": "identity"}, "backward": {"type": "identity"}}}))


def test_augment_file_level(tmp_path):
    docs = synth.grammar_documents(20, seed=5)
    src = write(tmp_path / "in.conllu", synth.documents_to_conllu(docs))
    out = tmp_path / "pseudo.jsonl"
    assert main(["augment", src, "-o", str(out), "--config", identity_config(tmp_path)]) == 0
    pairs = read_pairs(out.open(encoding="utf-8"))
    assert len(pairs) == 20
    assert all(p.source.startswith("<Pseudo> ") and p.origin == "pseudo" for p in pairs)
    manifest = json.loads((tmp_path / "pseudo.jsonl.manifest.json").read_text())
    assert manifest["backends"] == {"forward": "identity", "backward": "identity"}
    assert len(manifest["config_hash"]) == 64
    assert manifest["counts"]["pairs"] == 20

    ablation = tmp_path / "ablation.jsonl"
    assert main(["augment", src, "-o", str(ablation), "--no-paraphrase"]) == 0
    assert ablation.read_bytes() == out.read_bytes()


def test_augment_http_backend(tmp_path, stub_server, monkeypatch):
    stub_server.table = {"cat": "Katze", "Katze": "feline"}
    cfg = write(tmp_path / "c.json", json.dumps({"roundtrip": {
        "forward": {"type": "http", "endpoint": "http://unused/", "model": "en-de"},
        "backward": {"type": "http", "endpoint": "http://unused/", "model": "de-en"},
        "retry": {"attempts": 1, "base_delay": 0, "max_delay": 0}}}))
    monkeypatch.setenv(ENDPOINT_ENV, stub_server.url)
    src = write(tmp_path / "in.conllu", TWO)
    out = tmp_path / "o.jsonl"
    assert main(["augment", src, "-o", str(out), "--config", cfg]) == 0
    pairs = read_pairs(out.open(encoding="utf-8"))
    assert [p.target for p in pairs] == ["the feline sat on the mat", "bark"]


def test_augment_backend_failure_strict(tmp_path, stub_server, monkeypatch):
    stub_server.fail_first = 100
    cfg = write(tmp_path / "c.json", json.dumps({"roundtrip": {
        "forward": {"type": "http", "endpoint": stub_server.url, "model": "en-de"},
        "backward": {"type": "identity"},
        "retry": {"attempts": 2, "base_delay": 0, "max_delay": 0}}}))
    out = tmp_path / "o.jsonl"
    rc = main(["augment", write(tmp_path / "in.conllu", TWO), "-o", str(out), "--config", cfg,
               "--strict"])
    assert rc == 3
    assert not out.exists()


# -- evaluate / stats ------------------------------------------------------------

REFS = [ParallelPair("a", "s", "the cat sat on the mat"), ParallelPair("b", "s", "the dog ran fast")]


def test_evaluate_self(tmp_path, capsys):
    ref = pairs_file(tmp_path / "r.jsonl", REFS)
    assert main(["evaluate", ref, ref]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["pair_count"] == 2
    for key in ("rouge1", "rouge2", "rougeL"):
        assert report[key]["f1"] == 1.0
    assert report["bleu"] == pytest.approx(1.0)
    assert report["length_stats"] == {"ratio": 1.0, "difference": 0.0}
    assert report["bertscore"] is None


def test_evaluate_toy_report_matches_hand_values(tmp_path):
    cands = [ParallelPair("b", "s", "a dog ran"), ParallelPair("a", "s", "the cat sat on the mat")]
    out = tmp_path / "rep.json"
    rc = main(["evaluate", pairs_file(tmp_path / "c.jsonl", cands),
               pairs_file(tmp_path / "r.jsonl", REFS), "--out", str(out)])
    assert rc == 0
    report = json.loads(out.read_text())
    # pair a: unigram overlap 6/6; pair b: 2/3 vs 2/4
    p_b, r_b = 2 / 3, 2 / 4
    f_b = 2 * p_b * r_b / (p_b + r_b)
    assert report["rouge1"]["f1"] == pytest.approx((1.0 + f_b) / 2, abs=1e-12)
    assert report["length_stats"]["ratio"] == pytest.approx(9 / 10)
    assert report["length_stats"]["difference"] == pytest.approx(-0.5)


def test_evaluate_id_mismatch(tmp_path, capsys):
    cands = [ParallelPair("a", "s", "x"), ParallelPair("zz", "s", "y")]
    rc = main(["evaluate", pairs_file(tmp_path / "c.jsonl", cands), pairs_file(tmp_path / "r.jsonl", REFS)])
    assert rc == 2
    assert "'zz'" in capsys.readouterr().err


def test_stats_text_files(tmp_path, capsys):
    c = write(tmp_path / "c.txt", "a b c\na b c d e\n")
    r = write(tmp_path / "r.txt", "a b c d\na b c d e f\n")
    assert main(["stats", c, r]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report == {"pair_count": 2, "ratio": 0.8, "difference": -1.0}
    assert main(["stats", r, r]) == 0
    assert json.loads(capsys.readouterr().out)["ratio"] == 1.0


def test_stats_empty_file(tmp_path):
    empty = write(tmp_path / "e.txt", "")
    assert main(["stats", empty, empty]) == 2


def test_console_script(tmp_path):
    out = tmp_path / "o.txt"
    proc = subprocess.run([sys.executable, "-m", "extraphrase.cli", "compress", "-", "-o", str(out)],
                          input=TWO, text=True, capture_output=True)
    assert proc.returncode == 0, proc.stderr
    assert out.read_text() == "the cat sat on the mat\nbark\n"
