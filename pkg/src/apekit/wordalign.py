"""IBM Model 1 lexical translation, Viterbi alignment and symmetrization."""

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Tuple

logger = logging.getLogger(__name__)

NULL = "<null>"
PROB_FLOOR = 1e-9
PRUNE_THRESHOLD = 1e-6


@dataclass
class TranslationTable:
    """Lexical probabilities ``t(target | source)`` keyed by ``(source, target)``."""

    probs: Dict[Tuple[str, str], float]
    source_vocab: FrozenSet[str]
    target_vocab: FrozenSet[str]
    null_token: str = NULL
    log_likelihood: List[float] = field(default_factory=list)

    def prob(self, source: str, target: str, floor: float = 0.0) -> float:
        p = self.probs.get((source, target), 0.0)
        return p if p > floor else floor

    def row_sums(self) -> Dict[str, float]:
        sums = defaultdict(float)
        for (s, _), p in self.probs.items():
            sums[s] += p
        return dict(sums)

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for (s, t) in sorted(self.probs):
                f.write(f"{s} {t} {self.probs[s, t]!r}\n")

    @classmethod
    def read(cls, path, null_token=NULL) -> "TranslationTable":
        probs = {}
        with open(path, encoding="utf-8") as f:
            for line in f:
                s, t, p = line.split()
                probs[s, t] = float(p)
        src = frozenset(s for s, _ in probs if s != null_token)
        tgt = frozenset(t for _, t in probs)
        return cls(probs, src, tgt, null_token)


@dataclass(frozen=True)
class AlignmentMatrix:
    links: FrozenSet[Tuple[int, int]]
    source_len: int
    target_len: int

    def __post_init__(self):
        object.__setattr__(self, "links", frozenset(self.links))
        for i, j in self.links:
            if not (0 <= i < self.source_len and 0 <= j < self.target_len):
                raise ValueError(f"link {i}-{j} outside {self.source_len}x{self.target_len}")

    def transposed(self) -> "AlignmentMatrix":
        return AlignmentMatrix(frozenset((j, i) for i, j in self.links), self.target_len, self.source_len)

    def to_pharaoh(self) -> str:
        return " ".join(f"{i}-{j}" for i, j in sorted(self.links))

    @classmethod
    def from_pharaoh(cls, line: str, source_len: int, target_len: int) -> "AlignmentMatrix":
        links = []
        for item in line.split():
            i, j = item.split("-")
            links.append((int(i), int(j)))
        return cls(frozenset(links), source_len, target_len)


def train_model1(corpus, iterations: int = 5, prune: float = PRUNE_THRESHOLD) -> TranslationTable:
    """Estimate ``t(target | source)`` with EM from a uniform start.

    A null token is prepended to every source sentence. The data
    log-likelihood (natural log, uniform alignment prior) under the
    parameters entering each iteration is stored in ``log_likelihood``.
    """
    pairs = [(tuple(s), tuple(t)) for s, t in corpus]
    if not pairs:
        raise ValueError("cannot train Model 1 on an empty corpus")
    if iterations < 0:
        raise ValueError("iterations must be non-negative")
    src_vocab = sorted({w for s, _ in pairs for w in s})
    tgt_vocab = sorted({w for _, t in pairs for w in t})
    uniform = 1.0 / len(tgt_vocab)
    frozen_src, frozen_tgt = frozenset(src_vocab), frozenset(tgt_vocab)

    if iterations == 0:
        probs = {(s, t): uniform for s in [NULL] + src_vocab for t in tgt_vocab}
        return TranslationTable(probs, frozen_src, frozen_tgt)

    # only co-occurring pairs ever receive mass
    probs = {}
    for s, t in pairs:
        for e in (NULL,) + s:
            for f in t:
                probs[e, f] = uniform

    history = []
    for it in range(iterations):
        counts = defaultdict(float)
        totals = defaultdict(float)
        ll = 0.0
        for s, t in pairs:
            src = (NULL,) + s
            norm = math.log(len(src))
            for f in t:
                row = [probs[e, f] for e in src]
                z = math.fsum(row)
                ll += math.log(z) - norm
                for e, p in zip(src, row):
                    c = p / z
                    counts[e, f] += c
                    totals[e] += c
        history.append(ll)
        logger.debug("model1 iteration %d: log-likelihood %.6f", it + 1, ll)
        probs = {k: c / totals[k[0]] for k, c in counts.items()}

    if prune > 0:
        probs = _prune(probs, prune)
    return TranslationTable(probs, frozen_src, frozen_tgt, NULL, history)


def _prune(probs, threshold):
    kept = {k: p for k, p in probs.items() if p >= threshold}
    sums = defaultdict(float)
    for (s, _), p in kept.items():
        sums[s] += p
    return {k: p / sums[k[0]] for k, p in kept.items()}


def log_likelihood(table: TranslationTable, corpus) -> float:
    """Model 1 data log-likelihood of ``corpus`` under ``table``."""
    ll = 0.0
    for s, t in corpus:
        src = (table.null_token,) + tuple(s)
        for f in t:
            z = math.fsum(table.prob(e, f) for e in src)
            ll += math.log(max(z, PROB_FLOOR)) - math.log(len(src))
    return ll


def viterbi_align(table: TranslationTable, corpus) -> List[AlignmentMatrix]:
    """Link each target word to its most probable source word.

    Real source words beat the null token on ties, and among source words
    the lowest index wins; null links are left out of the matrix.
    """
    out = []
    for s, t in corpus:
        links = []
        for j, f in enumerate(t):
            best_i, best_p = -1, table.prob(table.null_token, f, PROB_FLOOR)
            for i, e in enumerate(s):
                p = table.prob(e, f, PROB_FLOOR)
                if p > best_p or (p == best_p and best_i < 0):
                    best_i, best_p = i, p
            if best_i >= 0:
                links.append((best_i, j))
        out.append(AlignmentMatrix(frozenset(links), len(s), len(t)))
    return out


_NEIGHBOURS = ((-1, 0), (0, -1), (1, 0), (0, 1), (-1, -1), (-1, 1), (1, -1), (1, 1))


def symmetrize_gdfa(fwd: AlignmentMatrix, rev: AlignmentMatrix) -> AlignmentMatrix:
    """grow-diag-final-and over two alignments in the same (source, target) space.

    ``rev`` must already be transposed into source-target order.
    """
    if (fwd.source_len, fwd.target_len) != (rev.source_len, rev.target_len):
        raise ValueError(
            f"dimension mismatch: {fwd.source_len}x{fwd.target_len} vs {rev.source_len}x{rev.target_len}"
        )
    n, m = fwd.source_len, fwd.target_len
    union = fwd.links | rev.links
    alignment = set(fwd.links & rev.links)
    src_aligned = {i for i, _ in alignment}
    tgt_aligned = {j for _, j in alignment}

    def add(i, j):
        alignment.add((i, j))
        src_aligned.add(i)
        tgt_aligned.add(j)

    added = True
    while added:
        added = False
        for j in range(m):
            for i in range(n):
                if (i, j) not in alignment:
                    continue
                for di, dj in _NEIGHBOURS:
                    ni, nj = i + di, j + dj
                    if (ni, nj) in union and (ni, nj) not in alignment:
                        if ni not in src_aligned or nj not in tgt_aligned:
                            add(ni, nj)
                            added = True

    for links in (fwd.links, rev.links):
        for i, j in sorted(links, key=lambda l: (l[1], l[0])):
            if i not in src_aligned and j not in tgt_aligned:
                add(i, j)
    return AlignmentMatrix(frozenset(alignment), n, m)


def align_corpus(corpus, iterations: int = 5):
    """Train both directions and return (fwd table, rev table, symmetrized alignments)."""
    fwd_table = train_model1(corpus, iterations)
    rev_corpus = [(t, s) for s, t in corpus]
    rev_table = train_model1(rev_corpus, iterations)
    fwd = viterbi_align(fwd_table, corpus)
    rev = viterbi_align(rev_table, rev_corpus)
    sym = [symmetrize_gdfa(a, b.transposed()) for a, b in zip(fwd, rev)]
    return fwd_table, rev_table, sym
