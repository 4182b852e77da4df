import warnings

import pytest
from hypothesis import given, strategies as st

from apekit.textio import (
    DEFAULT_PARTICLES, BlankLineWarning, CorpusFormatError, CorruptionSpec, as_tokens, corpus_checksum,
    corrupt, load_corpus, pair_corpora, synthetic_references, synthetic_vocabulary, write_corpus,
)

# first deterministic run of the generator and the corruptor
SYNTHETIC_SHA256 = "2fc71225fcc381566a1d35ee812bc2125b106f0fdbc8b9b8d2923158ffbb178f"
CORRUPTED_SHA256 = "d97acc40e283a848d26a51ebc9276de81004ea5d11580afa670ee94502c9ca86"

token = st.text(alphabet=st.characters(blacklist_categories=("Cs", "Zs", "Zl", "Zp", "Cc")), min_size=1, max_size=5)
sentence = st.lists(token, max_size=8).map(tuple)


def test_load_simple(tmp_path):
    p = tmp_path / "c.txt"
    p.write_bytes(b"a b\nc\n")
    assert load_corpus(p) == [("a", "b"), ("c",)]


def test_load_empty_file(tmp_path):
    p = tmp_path / "c.txt"
    p.write_bytes(b"")
    assert load_corpus(p) == []


def test_load_japanese(tmp_path):
    p = tmp_path / "c.txt"
    p.write_text("犬 は 黒 です\n", encoding="utf-8")
    assert load_corpus(p) == [("犬", "は", "黒", "です")]


def test_invalid_utf8_reports_line(tmp_path):
    p = tmp_path / "c.txt"
    p.write_bytes(b"ok\nfine\n\xff\xfe\n")
    with pytest.raises(CorpusFormatError) as err:
        load_corpus(p)
    assert err.value.lineno == 3
    assert ":3:" in str(err.value)


def test_bom_rejected(tmp_path):
    p = tmp_path / "c.txt"
    p.write_bytes(b"\xef\xbb\xbfa\n")
    with pytest.raises(CorpusFormatError):
        load_corpus(p)


def test_blank_lines_flagged(tmp_path):
    p = tmp_path / "c.txt"
    p.write_bytes(b"a\n\nb\n")
    with pytest.warns(BlankLineWarning):
        assert load_corpus(p) == [("a",), (), ("b",)]
    blanks = []
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        load_corpus(p, blank_lines=blanks)
    assert blanks == [2]


def test_as_tokens_rejects_whitespace():
    with pytest.raises(ValueError):
        as_tokens(["a b"])
    with pytest.raises(ValueError):
        as_tokens([""])


@given(st.lists(sentence.filter(len), max_size=6))
def test_write_load_roundtrip(tmp_path_factory, sents):
    p = tmp_path_factory.mktemp("rt") / "c.txt"
    write_corpus(p, sents)
    assert load_corpus(p) == sents


def test_pair_corpora():
    c = pair_corpora([("a",)], [("x",)])
    assert len(c) == 1 and c.dropped == 0
    with pytest.raises(ValueError, match="1.*2"):
        pair_corpora([("a",)], [("x",), ("y",)])
    c = pair_corpora([("a",)], [()], drop_empty=True)
    assert len(c) == 0 and c.dropped == 1
    with pytest.raises(ValueError):
        pair_corpora([("a",)], [()], drop_empty=False)


def test_corrupt_identity_and_forced_drop():
    refs = [("猫", "が", "走る"), ("a", "b", "c")]
    assert corrupt(refs, CorruptionSpec(0.0, 0.0, 1)) == refs
    assert corrupt([("猫", "が", "走る")], CorruptionSpec(1.0, 0.0, 1)) == [("猫", "走る")]


def test_corrupt_swaps_never_touch_particles():
    refs = [("a", "は", "b")] * 20
    assert corrupt(refs, CorruptionSpec(0.0, 1.0, 3)) == refs


def test_corrupt_forced_swap_single_pass():
    # pairs (a,b) and (c,d) swap; b is not swapped again with c
    assert corrupt([("a", "b", "c", "d", "e")], CorruptionSpec(0.0, 1.0, 0)) == [("b", "a", "d", "c", "e")]


def test_corruption_spec_validation():
    with pytest.raises(ValueError):
        CorruptionSpec(1.5, 0.0, 0)
    with pytest.raises(ValueError):
        CorruptionSpec(0.0, -0.1, 0)


@given(st.lists(st.lists(st.sampled_from(["a", "b", "c", "は", "を", "の"]), max_size=10).map(tuple), max_size=10),
       st.floats(0, 1), st.floats(0, 1), st.integers(0, 2**32))
def test_corrupt_properties(refs, drop, swap, seed):
    spec = CorruptionSpec(drop, swap, seed)
    out = corrupt(refs, spec)
    assert out == corrupt(refs, spec)
    assert len(out) == len(refs)
    for r, o in zip(refs, out):
        assert set(o) <= set(r)
        # non-particles are only permuted, never dropped
        assert sorted(t for t in o if t not in DEFAULT_PARTICLES) == sorted(t for t in r if t not in DEFAULT_PARTICLES)


def test_synthetic_corpus_pinned():
    refs = synthetic_references(2000, seed=0)
    assert corpus_checksum(refs) == SYNTHETIC_SHA256
    assert corpus_checksum(corrupt(refs, CorruptionSpec(0.3, 0.2, 42))) == CORRUPTED_SHA256
    vocab = set(synthetic_vocabulary())
    assert {w for s in refs for w in s} <= vocab
    assert DEFAULT_PARTICLES <= vocab
    assert 150 <= len(vocab) <= 250
