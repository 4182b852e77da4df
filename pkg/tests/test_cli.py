import pytest

from apekit.cli import read_config, run, UsageError
from apekit.textio import load_corpus, synthetic_references, write_corpus

PIPELINE_SCORES = """\
system	RIBES	BLEU	1-gram	2-gram	3-gram	4-gram	BP	GeoMean	Ratio
corrupted	87.87	52.95	100.00	66.20	52.46	35.29	0.89	59.17	0.90
post-edited	92.80	63.93	95.45	71.79	57.35	46.55	0.98	65.40	0.98
"""


@pytest.fixture
def corpus(tmp_path):
    refs = synthetic_references(40, seed=2)
    write_corpus(tmp_path / "ref.txt", refs)
    write_corpus(tmp_path / "hyp.txt", [r[:-1] or r for r in refs])
    return tmp_path


def test_eval_bleu_identical(corpus, capsys):
    assert run(["eval-bleu", "--hyp", str(corpus / "ref.txt"), "--ref", str(corpus / "ref.txt")]) == 0
    out = capsys.readouterr().out
    assert "100.00" in out.split("\n")[2]
    assert out.count("\t") > 0


def test_eval_ribes_and_tsv_file(corpus, capsys):
    tsv = corpus / "r.tsv"
    assert run(["eval-ribes", "--hyp", str(corpus / "ref.txt"), "--ref", str(corpus / "ref.txt"),
                "--tsv", str(tsv)]) == 0
    assert "RIBES 100.00" in capsys.readouterr().out
    assert tsv.read_text(encoding="utf-8").splitlines()[1].endswith("\t100.00")


def test_sigtest_identical(corpus, capsys):
    h = str(corpus / "hyp.txt")
    assert run(["sigtest", "--hyp-a", h, "--hyp-b", h, "--ref", str(corpus / "ref.txt"),
                "--samples", "100", "--seed", "7"]) == 0
    assert "\t1.0000\t" in capsys.readouterr().out


def test_usage_errors(corpus, capsys):
    assert run([]) == 1
    assert run(["frobnicate"]) == 1
    assert run(["eval-bleu", "--hyp", "x", "--ref", "y", "--bogus"]) == 1
    h = str(corpus / "hyp.txt")
    assert run(["sigtest", "--hyp-a", h, "--hyp-b", h, "--ref", h]) == 1
    assert "--seed is required" in capsys.readouterr().err
    assert run(["--version"]) == 0


def test_data_errors(corpus, capsys):
    bad = corpus / "bad.txt"
    bad.write_bytes("a b\n".encode() + b"\xff\xfe\n")
    assert run(["eval-bleu", "--hyp", str(bad), "--ref", str(corpus / "ref.txt")]) == 2
    assert f"{bad}:2" in capsys.readouterr().err
    assert run(["eval-bleu", "--hyp", str(corpus / "missing.txt"), "--ref", str(corpus / "ref.txt")]) == 2
    short = corpus / "short.txt"
    write_corpus(short, [("a",)])
    assert run(["eval-bleu", "--hyp", str(short), "--ref", str(corpus / "ref.txt")]) == 2


def test_config_file_and_flag_precedence(corpus, capsys):
    cfg = corpus / "run.cfg"
    cfg.write_text("# sigtest settings\nseed = 7\nsamples=50\nmetric=ribes\n", encoding="utf-8")
    h, r = str(corpus / "hyp.txt"), str(corpus / "ref.txt")
    assert run(["sigtest", "--config", str(cfg), "--hyp-a", h, "--hyp-b", h, "--ref", r]) == 0
    assert "ribes\t1.0000\t0.0000\t50\t7" in capsys.readouterr().out
    assert run(["sigtest", "--config", str(cfg), "--hyp-a", h, "--hyp-b", h, "--ref", r, "--seed", "9"]) == 0
    assert "\t50\t9" in capsys.readouterr().out

    cfg.write_text("sead=7\n", encoding="utf-8")
    assert run(["sigtest", "--config", str(cfg), "--hyp-a", h, "--hyp-b", h, "--ref", r]) == 1
    cfg.write_text("seed=7\nmetric=ter\n", encoding="utf-8")
    assert run(["sigtest", "--config", str(cfg), "--hyp-a", h, "--hyp-b", h, "--ref", r]) == 1


def test_read_config_rejects_bare_words(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("seed\n", encoding="utf-8")
    with pytest.raises(UsageError):
        read_config(p)
    p.write_text("beam-size = 5 # narrow\n", encoding="utf-8")
    assert read_config(p) == {"beam_size": "5"}


def test_corrupt_is_seeded(corpus):
    a, b = corpus / "a.txt", corpus / "b.txt"
    args = ["corrupt", "--refs", str(corpus / "ref.txt"), "--seed", "42"]
    assert run(args + ["--output", str(a)]) == 0
    assert run(args + ["--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(load_corpus(a)) == 40


def test_train_apply_roundtrip(corpus):
    model = corpus / "model"
    assert run(["train", "--src", str(corpus / "hyp.txt"), "--ref", str(corpus / "ref.txt"),
                "--model", str(model), "--seed", "1", "--no-tune", "--lm-order", "3"]) == 0
    out = corpus / "out.txt"
    assert run(["apply", "--model", str(model), "--input", str(corpus / "hyp.txt"), "--output", str(out)]) == 0
    assert len(load_corpus(out)) == 40
    assert run(["train", "--src", str(corpus / "hyp.txt"), "--ref", str(corpus / "ref.txt"),
                "--model", str(model), "--seed", "1", "--tune-src", str(corpus / "hyp.txt")]) == 1


def test_analyze_and_maxbleu(corpus, capsys):
    r = str(corpus / "ref.txt")
    assert run(["analyze", "--hyp", str(corpus / "hyp.txt"), "--hyp", r, "--ref", r]) == 0
    out = capsys.readouterr().out
    assert "Max BLEU" in out and "match_part" in out
    assert run(["maxbleu", "--hyp", r, "--ref", r]) == 0
    assert "Max BLEU 100.00" in capsys.readouterr().out


def test_pipeline_report_is_pinned(tmp_path, capsys):
    toy = tmp_path / "toy.txt"
    write_corpus(toy, synthetic_references(200, seed=1))
    args = ["pipeline", "--refs", str(toy), "--seed", "42", "--no-tune", "--lm-order", "3"]
    assert run(args + ["--workdir", str(tmp_path / "w1")]) == 0
    out = capsys.readouterr().out
    assert "GeoMean" in out and "Ins Part" in out
    assert (tmp_path / "w1" / "scores.tsv").read_text(encoding="utf-8") == PIPELINE_SCORES
    assert run(args + ["--workdir", str(tmp_path / "w2"), "--threads", "4"]) == 0
    for name in ("test.ape", "scores.tsv", "errors.tsv", "model/phrase-table.txt", "model/lm.arpa"):
        assert (tmp_path / "w1" / name).read_bytes() == (tmp_path / "w2" / name).read_bytes()
