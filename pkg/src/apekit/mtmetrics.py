"""Corpus BLEU with its decomposition, and sentence-averaged RIBES."""

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

NGRAM_ORDER = 4


def ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def sentence_stats(hyp, ref, max_n: int = NGRAM_ORDER) -> np.ndarray:
    """BLEU sufficient statistics ``[hyp_len, ref_len, m_1, t_1, ..., m_n, t_n]``."""
    stats = [len(hyp), len(ref)]
    for n in range(1, max_n + 1):
        h = ngram_counts(hyp, n)
        r = ngram_counts(ref, n)
        stats.append(sum(min(c, r[g]) for g, c in h.items()))
        stats.append(max(len(hyp) - n + 1, 0))
    return np.array(stats, dtype=np.int64)


def brevity_penalty(hyp_len: float, ref_len: float) -> float:
    if hyp_len >= ref_len:
        return 1.0
    if hyp_len == 0:
        return 0.0
    return math.exp(1.0 - ref_len / hyp_len)


@dataclass
class BleuReport:
    """BLEU and its parts; precisions, geo_mean and bleu are percentages."""

    precisions: List[float]
    brevity_penalty: float
    geo_mean: float
    length_ratio: float
    bleu: float
    hyp_len: int = 0
    ref_len: int = 0

    @classmethod
    def from_stats(cls, stats) -> "BleuReport":
        stats = [int(x) for x in stats]
        hyp_len, ref_len = stats[0], stats[1]
        matches = stats[2::2]
        totals = stats[3::2]
        precisions = [100.0 * m / t if t > 0 else 0.0 for m, t in zip(matches, totals)]
        ratio = hyp_len / ref_len if ref_len else 0.0
        bp = brevity_penalty(hyp_len, ref_len)
        report = cls.from_precisions(precisions, bp=bp)
        report.length_ratio = ratio
        report.hyp_len, report.ref_len = hyp_len, ref_len
        return report

    @classmethod
    def from_precisions(cls, precisions, length_ratio=None, bp=None) -> "BleuReport":
        """Rebuild BLEU from published per-n precisions (percent) and a ratio or BP."""
        if bp is None:
            if length_ratio is None:
                raise ValueError("need length_ratio or bp")
            bp = 1.0 if length_ratio >= 1 else (math.exp(1 - 1 / length_ratio) if length_ratio > 0 else 0.0)
        if min(precisions) <= 0:
            geo = 0.0
        else:
            geo = math.exp(sum(math.log(p / 100.0) for p in precisions) / len(precisions)) * 100.0
        ratio = length_ratio if length_ratio is not None else float("nan")
        return cls(list(precisions), bp, geo, ratio, bp * geo)

    def rounded(self) -> dict:
        return {
            "BLEU": round(self.bleu, 2),
            **{f"{n}-gram": round(p, 2) for n, p in enumerate(self.precisions, 1)},
            "BP": round(self.brevity_penalty, 2),
            "GeoMean": round(self.geo_mean, 2),
            "Ratio": round(self.length_ratio, 2),
        }


def _check_lengths(hyps, refs):
    if len(hyps) != len(refs):
        raise ValueError(f"{len(hyps)} hypotheses but {len(refs)} references")


def corpus_stats(hyps, refs, max_n: int = NGRAM_ORDER) -> np.ndarray:
    _check_lengths(hyps, refs)
    total = np.zeros(2 + 2 * max_n, dtype=np.int64)
    for h, r in zip(hyps, refs):
        total += sentence_stats(h, r, max_n)
    return total


def bleu_corpus(hyps, refs, max_n: int = NGRAM_ORDER) -> BleuReport:
    """Unsmoothed corpus BLEU against a single reference per hypothesis."""
    return BleuReport.from_stats(corpus_stats(hyps, refs, max_n))


def bleu_score(hyps, refs) -> float:
    return bleu_corpus(hyps, refs).bleu


def smoothed_bleu_from_stats(stats) -> float:
    """Sentence BLEU (percent) with add-one smoothing on orders two and up."""
    hyp_len, ref_len = stats[0], stats[1]
    if hyp_len == 0:
        return 0.0
    log_sum = 0.0
    max_n = (len(stats) - 2) // 2
    for n in range(max_n):
        m, t = stats[2 + 2 * n], stats[3 + 2 * n]
        if n > 0:
            m, t = m + 1, t + 1
        if m == 0:
            return 0.0
        log_sum += math.log(m / t)
    return 100.0 * brevity_penalty(hyp_len, ref_len) * math.exp(log_sum / max_n)


def sentence_bleu(hyp, ref, max_n: int = NGRAM_ORDER) -> float:
    return smoothed_bleu_from_stats(sentence_stats(hyp, ref, max_n))


# -- RIBES -------------------------------------------------------------------


@dataclass(frozen=True)
class RibesConfig:
    alpha: float = 0.25
    beta: float = 1.0

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be non-negative")


@dataclass
class RibesReport:
    score: float  # corpus mean in [0, 1]
    per_sentence: List[Tuple[float, float, float, float]] = field(default_factory=list)


def _find(seq, sub):
    k = len(sub)
    return [i for i in range(len(seq) - k + 1) if tuple(seq[i:i + k]) == sub]


def ribes_word_order(hyp, ref) -> List[int]:
    """Reference positions of aligned hypothesis words, in hypothesis order.

    A word unique in both sentences aligns directly. Otherwise the context
    window grows one word at a time, trying the right-hand n-gram and then
    the left-hand one, until it occurs exactly once on both sides.
    """
    hyp, ref = tuple(hyp), tuple(ref)
    order = []
    n = len(hyp)
    for i, w in enumerate(hyp):
        if w not in ref:
            continue
        if hyp.count(w) == 1 and ref.count(w) == 1:
            order.append(ref.index(w))
            continue
        for window in range(1, max(i + 1, n - i)):
            if i + window < n:
                right = hyp[i:i + window + 1]
                in_ref = _find(ref, right)
                if len(in_ref) == 1 and len(_find(hyp, right)) == 1:
                    order.append(in_ref[0])
                    break
            if window <= i:
                left = hyp[i - window:i + 1]
                in_ref = _find(ref, left)
                if len(in_ref) == 1 and len(_find(hyp, left)) == 1:
                    order.append(in_ref[0] + window)
                    break
    return order


def kendall_nkt(order: Sequence[int]) -> float:
    """Normalized Kendall's tau, (tau + 1) / 2; zero below two aligned words."""
    k = len(order)
    if k < 2:
        return 0.0
    concordant = sum(1 for a in range(k) for b in range(a + 1, k) if order[a] < order[b])
    return concordant / (k * (k - 1) / 2)


def ribes_sentence(hyp, ref, config: RibesConfig = RibesConfig()):
    """Return ``(nkt, unigram_precision, bp, score)`` for one sentence pair."""
    if not hyp or not ref:
        return (0.0, 0.0, 0.0, 0.0)
    order = ribes_word_order(hyp, ref)
    nkt = kendall_nkt(order)
    precision = len(order) / len(hyp)
    bp = min(1.0, math.exp(1.0 - len(ref) / len(hyp)))
    score = nkt * precision ** config.alpha * bp ** config.beta
    return (nkt, precision, bp, score)


def ribes_corpus(hyps, refs, config: RibesConfig = RibesConfig()) -> RibesReport:
    _check_lengths(hyps, refs)
    per = [ribes_sentence(h, r, config) for h, r in zip(hyps, refs)]
    score = math.fsum(p[3] for p in per) / len(per) if per else 0.0
    return RibesReport(score, per)


def ribes_score(hyps, refs) -> float:
    return 100.0 * ribes_corpus(hyps, refs).score


# -- report formatting ---------------------------------------------------------

REPORT_COLUMNS = ("RIBES", "BLEU", "1-gram", "2-gram", "3-gram", "4-gram", "BP", "GeoMean", "Ratio")


def report_row(hyps, refs) -> dict:
    """Scores under the usual report column names, rounded to two decimals."""
    bleu = bleu_corpus(hyps, refs)
    row = {"RIBES": round(ribes_score(hyps, refs), 2)}
    row.update(bleu.rounded())
    return row


def format_table(rows: dict) -> str:
    """Human-readable table; ``rows`` maps a system label to a report row."""
    label_w = max([len("System")] + [len(k) for k in rows])
    header = "System".ljust(label_w) + "".join(f"{c:>9}" for c in REPORT_COLUMNS)
    lines = [header, "-" * len(header)]
    for name, row in rows.items():
        lines.append(name.ljust(label_w) + "".join(f"{row[c]:>9.2f}" for c in REPORT_COLUMNS))
    return "\n".join(lines)


def format_tsv(rows: dict) -> str:
    lines = ["system\t" + "\t".join(REPORT_COLUMNS)]
    for name, row in rows.items():
        lines.append(name + "\t" + "\t".join(f"{row[c]:.2f}" for c in REPORT_COLUMNS))
    return "\n".join(lines)
