import math
from collections import defaultdict
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from apekit.wordalign import (
    NULL, AlignmentMatrix, TranslationTable, align_corpus, log_likelihood, symmetrize_gdfa,
    train_model1, viterbi_align,
)


def exact_model1(corpus, iterations):
    """Textbook EM in exact rational arithmetic."""
    tgt_vocab = sorted({w for _, t in corpus for w in t})
    t = defaultdict(lambda: Fraction(1, len(tgt_vocab)))
    for _ in range(iterations):
        counts, totals = defaultdict(Fraction), defaultdict(Fraction)
        for s, tt in corpus:
            src = (NULL,) + tuple(s)
            for f in tt:
                z = sum(t[e, f] for e in src)
                for e in src:
                    counts[e, f] += t[e, f] / z
                    totals[e] += t[e, f] / z
        t = defaultdict(Fraction, {k: v / totals[k[0]] for k, v in counts.items()})
    return t


def table_of(probs, null_row=None):
    src = frozenset(s for s, _ in probs if s != NULL)
    tgt = frozenset(t for _, t in probs)
    return TranslationTable(dict(probs), src, tgt)


def test_single_cooccurrence_is_certain():
    table = train_model1([(("a",), ("x",))], 5)
    assert table.probs["a", "x"] == pytest.approx(1.0, abs=1e-9)
    assert viterbi_align(table, [(("a",), ("x",))])[0].links == {(0, 0)}


def test_two_pair_corpus_matches_exact_em():
    corpus = [(("b", "c"), ("x", "y")), (("b",), ("x",))]
    table = train_model1(corpus, 10, prune=0)
    oracle = exact_model1(corpus, 10)
    assert set(table.probs) == set(oracle)
    for k, v in oracle.items():
        assert table.probs[k] == pytest.approx(float(v), abs=1e-12)
    assert table.probs["b", "x"] == pytest.approx(0.9490356112177926, abs=1e-12)
    assert table.probs["b", "x"] > 0.9


def test_zero_iterations_uniform():
    corpus = [(("a", "b"), ("x", "y", "z")), (("a",), ("x",))]
    table = train_model1(corpus, 0)
    for s in (NULL, "a", "b"):
        for t in ("x", "y", "z"):
            assert table.probs[s, t] == pytest.approx(1 / 3)


def test_empty_corpus_rejected():
    with pytest.raises(ValueError):
        train_model1([], 5)


def test_viterbi_examples():
    ident = table_of({("a", "a"): 1.0, ("b", "b"): 1.0, (NULL, "a"): 0.5, (NULL, "b"): 0.5})
    assert viterbi_align(ident, [(("a", "b"), ("a", "b"))])[0].links == {(0, 0), (1, 1)}
    t = table_of({("a", "x"): 1.0})
    assert viterbi_align(t, [(("a",), ("x", "x"))])[0].links == {(0, 0), (0, 1)}
    tied = table_of({("a", "x"): 0.5, ("b", "x"): 0.5})
    assert viterbi_align(tied, [(("a", "b"), ("x",))])[0].links == {(0, 0)}


def test_viterbi_drops_null_links():
    t = table_of({(NULL, "x"): 0.9, ("a", "x"): 0.1, ("a", "y"): 0.9})
    assert viterbi_align(t, [(("a",), ("x", "y"))])[0].links == {(0, 1)}


def test_gdfa_fixtures():
    a = AlignmentMatrix(frozenset({(0, 0), (1, 1)}), 2, 2)
    assert symmetrize_gdfa(a, a) == a
    # intersection empty, final-and restores the lone forward link
    out = symmetrize_gdfa(AlignmentMatrix(frozenset({(0, 0)}), 1, 1), AlignmentMatrix(frozenset(), 1, 1))
    assert out.links == {(0, 0)}
    # grow from (0,0) diagonally to (1,1), then sideways to (1,2) whose target is unaligned
    fwd = AlignmentMatrix(frozenset({(0, 0), (1, 1)}), 2, 3)
    rev = AlignmentMatrix(frozenset({(0, 0), (1, 2)}), 2, 3)
    assert symmetrize_gdfa(fwd, rev).links == {(0, 0), (1, 1), (1, 2)}


def test_gdfa_dimension_mismatch():
    with pytest.raises(ValueError):
        symmetrize_gdfa(AlignmentMatrix(frozenset(), 1, 2), AlignmentMatrix(frozenset(), 2, 1))


def test_alignment_bounds_and_pharaoh():
    with pytest.raises(ValueError):
        AlignmentMatrix(frozenset({(2, 0)}), 2, 2)
    a = AlignmentMatrix(frozenset({(1, 0), (0, 2)}), 2, 3)
    assert a.to_pharaoh() == "0-2 1-0"
    assert AlignmentMatrix.from_pharaoh(a.to_pharaoh(), 2, 3) == a
    assert a.transposed().transposed() == a


@st.composite
def link_pair(draw):
    n = draw(st.integers(1, 6))
    m = draw(st.integers(1, 6))
    cells = st.tuples(st.integers(0, n - 1), st.integers(0, m - 1))
    fwd = draw(st.frozensets(cells))
    rev = draw(st.frozensets(cells))
    return AlignmentMatrix(fwd, n, m), AlignmentMatrix(rev, n, m)


@given(link_pair())
def test_gdfa_between_intersection_and_union(pair):
    fwd, rev = pair
    out = symmetrize_gdfa(fwd, rev).links
    assert fwd.links & rev.links <= out <= fwd.links | rev.links


vocab_sentence = st.lists(st.sampled_from("abcdef"), min_size=1, max_size=5).map(tuple)
toy_corpus = st.lists(st.tuples(vocab_sentence, vocab_sentence.map(lambda s: tuple(w.upper() for w in s))),
                      min_size=1, max_size=6)


@settings(max_examples=40, deadline=None)
@given(toy_corpus)
def test_em_monotone_and_row_stochastic(corpus):
    table = train_model1(corpus, 10, prune=0)
    ll = table.log_likelihood
    assert all(b >= a - 1e-9 for a, b in zip(ll, ll[1:]))
    assert all(abs(v - 1) < 1e-6 for v in table.row_sums().values())
    assert all(0 <= p <= 1 for p in table.probs.values())
    pruned = train_model1(corpus, 10)
    assert all(abs(v - 1) < 1e-6 for v in pruned.row_sums().values())


def test_log_likelihood_matches_history():
    corpus = [(("a", "b"), ("x", "y")), (("a",), ("x",)), (("b", "c"), ("y", "z"))]
    t3 = train_model1(corpus, 3, prune=0)
    t4 = train_model1(corpus, 4, prune=0)
    assert t4.log_likelihood[3] == pytest.approx(log_likelihood(t3, corpus), abs=1e-9)


def test_table_roundtrip_and_determinism(tmp_path):
    corpus = [(("a", "b"), ("x", "y")), (("a",), ("x",)), (("b", "c"), ("y", "z"))]
    t1 = train_model1(corpus, 5)
    t1.write(tmp_path / "t.txt")
    t2 = train_model1(corpus, 5)
    t2.write(tmp_path / "t2.txt")
    assert (tmp_path / "t.txt").read_bytes() == (tmp_path / "t2.txt").read_bytes()
    back = TranslationTable.read(tmp_path / "t.txt")
    assert back.probs == t1.probs
    lines = (tmp_path / "t.txt").read_text().splitlines()
    assert lines == sorted(lines)


def test_align_corpus_shapes():
    corpus = [(("a", "b"), ("x", "y", "z")), (("a",), ("x",))]
    fwd, rev, sym = align_corpus(corpus, 5)
    assert [(a.source_len, a.target_len) for a in sym] == [(2, 3), (1, 1)]
    assert math.isclose(rev.row_sums()["x"], 1.0)
