"""Alignment-consistent phrase extraction and phrase-table scoring."""

from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Dict, Iterator, List, NamedTuple, Set, Tuple

from .wordalign import PROB_FLOOR, AlignmentMatrix, TranslationTable

MAX_PHRASE_LEN = 8

Span = Tuple[int, int]  # inclusive (start, end)


class PhrasePair(NamedTuple):
    source: Tuple[str, ...]
    target: Tuple[str, ...]


class PhraseScores(NamedTuple):
    phi_fwd: float  # P(target | source)
    lex_fwd: float
    phi_rev: float  # P(source | target)
    lex_rev: float


def is_consistent(links, src_span: Span, tgt_span: Span) -> bool:
    (s1, s2), (t1, t2) = src_span, tgt_span
    inside = False
    for i, j in links:
        in_s = s1 <= i <= s2
        in_t = t1 <= j <= t2
        if in_s != in_t:
            return False
        inside = inside or in_s
    return inside


def extract_phrases(pair, alignment: AlignmentMatrix, max_len: int = MAX_PHRASE_LEN):
    """All phrase pairs consistent with ``alignment``.

    Returns a set of ``(PhrasePair, (source span, target span))`` with
    inclusive spans. Unaligned words at target boundaries are absorbed into
    every consistent expansion; unaligned source words are covered because
    every source span is visited.
    """
    src, tgt = tuple(pair[0]), tuple(pair[1])
    n, m = len(src), len(tgt)
    tgt_links = defaultdict(list)
    src_links = defaultdict(list)
    for i, j in alignment.links:
        src_links[i].append(j)
        tgt_links[j].append(i)
    out = set()
    for s1 in range(n):
        for s2 in range(s1, min(n, s1 + max_len)):
            tmin, tmax = m, -1
            for i in range(s1, s2 + 1):
                for j in src_links[i]:
                    tmin = min(tmin, j)
                    tmax = max(tmax, j)
            if tmax < 0 or tmax - tmin >= max_len:
                continue
            if any(not s1 <= i <= s2 for j in range(tmin, tmax + 1) for i in tgt_links[j]):
                continue
            t1 = tmin
            while True:
                t2 = tmax
                while True:
                    if t2 - t1 >= max_len:
                        break
                    out.add((PhrasePair(src[s1:s2 + 1], tgt[t1:t2 + 1]), ((s1, s2), (t1, t2))))
                    t2 += 1
                    if t2 >= m or tgt_links[t2]:
                        break
                t1 -= 1
                if t1 < 0 or tgt_links[t1]:
                    break
    return out


def lexical_weight(src, tgt, links, table: TranslationTable) -> float:
    """Product over target words of the best linked ``t(target | source)``.

    Unlinked target words use the null-token probability.
    """
    by_target = defaultdict(list)
    for i, j in links:
        by_target[j].append(i)
    w = 1.0
    for j, f in enumerate(tgt):
        if by_target[j]:
            w *= max(table.prob(src[i], f, PROB_FLOOR) for i in by_target[j])
        else:
            w *= table.prob(table.null_token, f, PROB_FLOOR)
    return w


@dataclass
class PhraseTable:
    entries: Dict[PhrasePair, PhraseScores]
    max_len: int = MAX_PHRASE_LEN

    def __post_init__(self):
        self._by_source = defaultdict(list)
        for pp, sc in self.entries.items():
            self._by_source[pp.source].append((pp.target, sc))
        for opts in self._by_source.values():
            opts.sort()

    def __len__(self):
        return len(self.entries)

    def options(self, source) -> List[Tuple[Tuple[str, ...], PhraseScores]]:
        return self._by_source.get(tuple(source), [])

    def has_source(self, source) -> bool:
        return tuple(source) in self._by_source

    def sources(self):
        return self._by_source.keys()

    def lines(self) -> Iterator[str]:
        for pp in sorted(self.entries):
            sc = self.entries[pp]
            yield (
                f"{' '.join(pp.source)} ||| {' '.join(pp.target)} ||| "
                f"{sc.phi_fwd!r} {sc.lex_fwd!r} {sc.phi_rev!r} {sc.lex_rev!r}"
            )

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for line in self.lines():
                f.write(line + "\n")

    @classmethod
    def read(cls, path, max_len=MAX_PHRASE_LEN) -> "PhraseTable":
        entries = {}
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                fields = line.rstrip("\n").split(" ||| ")
                if len(fields) != 3:
                    raise ValueError(f"{path}:{lineno}: expected 3 fields")
                scores = [float(x) for x in fields[2].split()]
                if len(scores) != 4:
                    raise ValueError(f"{path}:{lineno}: expected 4 scores")
                pp = PhrasePair(tuple(fields[0].split()), tuple(fields[1].split()))
                entries[pp] = PhraseScores(*scores)
        return cls(entries, max_len)


def build_phrase_table(
    corpus,
    alignments,
    fwd_table: TranslationTable,
    rev_table: TranslationTable,
    max_len: int = MAX_PHRASE_LEN,
    min_count: int = 1,
) -> PhraseTable:
    """Relative-frequency phrase table with lexical weights.

    ``fwd_table`` holds ``t(target | source)`` and ``rev_table`` holds
    ``t(source | target)``. A pair seen with several internal alignments
    keeps its largest lexical weight, which makes the table independent of
    corpus order.
    """
    pairs = list(corpus)
    if len(pairs) != len(alignments):
        raise ValueError(f"{len(pairs)} sentence pairs but {len(alignments)} alignments")
    counts = Counter()
    lex_f = {}
    lex_r = {}
    for (src, tgt), al in zip(pairs, alignments):
        for pp, ((s1, s2), (t1, t2)) in extract_phrases((src, tgt), al, max_len):
            counts[pp] += 1
            local = [(i - s1, j - t1) for i, j in al.links if s1 <= i <= s2 and t1 <= j <= t2]
            lf = lexical_weight(pp.source, pp.target, local, fwd_table)
            lr = lexical_weight(pp.target, pp.source, [(j, i) for i, j in local], rev_table)
            if lf > lex_f.get(pp, 0.0):
                lex_f[pp] = lf
            if lr > lex_r.get(pp, 0.0):
                lex_r[pp] = lr
    src_totals = Counter()
    tgt_totals = Counter()
    for pp, c in counts.items():
        src_totals[pp.source] += c
        tgt_totals[pp.target] += c
    entries = {}
    for pp, c in counts.items():
        if c < min_count:
            continue
        entries[pp] = PhraseScores(
            c / src_totals[pp.source], lex_f[pp], c / tgt_totals[pp.target], lex_r[pp]
        )
    return PhraseTable(entries, max_len)
