"""Particle-aware error analysis and the Max BLEU oracle.

A hypothesis is aligned to its reference with insert/delete edits only
(a longest common subsequence). Unmatched tokens of the same type on both
sides count as moved matches; leftover reference particles must be
inserted and leftover hypothesis particles deleted. From that analysis a
transformed hypothesis is built using only movements and particle
insertions/deletions, and Max BLEU is the corpus BLEU of those transforms.
"""

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, fields
from typing import FrozenSet, List, Tuple

from .mtmetrics import NGRAM_ORDER, BleuReport, bleu_corpus, brevity_penalty, corpus_stats, sentence_stats
from .textio import DEFAULT_PARTICLES


def load_particles(path) -> FrozenSet[str]:
    """One particle per line; blank lines and ``#`` comments are skipped."""
    out = set()
    with open(path, encoding="utf-8") as f:
        for line in f:
            tok = line.split("#", 1)[0].strip()
            if tok:
                out.add(tok)
    if not out:
        raise ValueError(f"{path}: particle set is empty")
    return frozenset(out)


@dataclass(frozen=True)
class EditAlignment:
    matched: Tuple[Tuple[int, int], ...]
    hyp_residual: Tuple[int, ...]
    ref_residual: Tuple[int, ...]


def align_dp(hyp, ref) -> EditAlignment:
    """Longest-common-subsequence alignment with a fixed backtrace.

    Walking back from the end, a match is taken whenever the tokens agree,
    otherwise a hypothesis token is consumed if that keeps the optimum.
    """
    hyp, ref = tuple(hyp), tuple(ref)
    n, m = len(hyp), len(ref)
    dp = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        hi = hyp[i - 1]
        row, prev = dp[i], dp[i - 1]
        for j in range(1, m + 1):
            if hi == ref[j - 1]:
                row[j] = prev[j - 1] + 1
            else:
                row[j] = max(prev[j], row[j - 1])
    matched = []
    i, j = n, m
    while i > 0 and j > 0:
        if hyp[i - 1] == ref[j - 1]:
            matched.append((i - 1, j - 1))
            i -= 1
            j -= 1
        elif dp[i - 1][j] == dp[i][j]:
            i -= 1
        else:
            j -= 1
    matched.reverse()
    hm = {a for a, _ in matched}
    rm = {b for _, b in matched}
    return EditAlignment(
        tuple(matched),
        tuple(a for a in range(n) if a not in hm),
        tuple(b for b in range(m) if b not in rm),
    )


@dataclass
class ErrorProfile:
    match_part: float = 0
    match_other: float = 0
    misalign_part: float = 0
    misalign_other: float = 0
    ins_part: float = 0
    del_part: float = 0
    hyp_other_residual: float = 0
    ref_other_residual: float = 0
    sentences: int = 1

    COLUMNS = ("match_part", "match_other", "misalign_part", "misalign_other", "ins_part", "del_part")

    def as_row(self) -> dict:
        return {c: getattr(self, c) for c in self.COLUMNS}


@dataclass
class SentenceAnalysis:
    profile: ErrorProfile
    alignment: EditAlignment
    moved: Tuple[Tuple[int, int], ...]
    inserted: Tuple[int, ...]  # reference positions of particles to insert
    deleted: Tuple[int, ...]  # hypothesis positions of particles to delete
    canonical: Tuple[str, ...]
    transform: Tuple[str, ...]


def _moved_pairs(hyp, ref, hyp_res, ref_res):
    by_type = defaultdict(list)
    for b in ref_res:
        by_type[ref[b]].append(b)
    taken = defaultdict(int)
    pairs = []
    for a in hyp_res:
        slots = by_type.get(hyp[a])
        k = taken[hyp[a]]
        if slots and k < len(slots):
            pairs.append((a, slots[k]))
            taken[hyp[a]] = k + 1
    return pairs


def canonical_transform(hyp, ref, covered_ref, anchors, leftovers):
    """Covered reference tokens in reference order, leftovers after their anchor.

    ``anchors`` maps covered hypothesis positions to reference positions;
    each leftover hypothesis position goes right after the nearest covered
    hypothesis token to its left, or at the start.
    """
    after = defaultdict(list)
    covered_h = sorted(anchors)
    for a in leftovers:
        prev = [h for h in covered_h if h < a]
        after[anchors[prev[-1]] if prev else -1].append(hyp[a])
    out = list(after[-1])
    for b in sorted(covered_ref):
        out.append(ref[b])
        out.extend(after.get(b, ()))
    return tuple(out)


class _Scorer:
    """Smoothed sentence BLEU against one fixed reference."""

    def __init__(self, ref, max_n=NGRAM_ORDER):
        self.ref_len = len(ref)
        self.max_n = max_n
        self.ref_counts = [Counter(tuple(ref[i:i + n]) for i in range(len(ref) - n + 1)) for n in range(1, max_n + 1)]
        self._memo = {}

    def __call__(self, seq) -> float:
        hit = self._memo.get(seq)
        if hit is not None:
            return hit
        L = len(seq)
        if L == 0:
            self._memo[seq] = 0.0
            return 0.0
        log_sum = 0.0
        for n in range(1, self.max_n + 1):
            rc = self.ref_counts[n - 1]
            h = Counter(seq[i:i + n] for i in range(L - n + 1))
            m = sum(min(c, rc[g]) for g, c in h.items() if g in rc)
            t = max(L - n + 1, 0)
            if n > 1:
                m, t = m + 1, t + 1
            if m == 0:
                self._memo[seq] = 0.0
                return 0.0
            log_sum += math.log(m / t)
        val = 100.0 * brevity_penalty(L, self.ref_len) * math.exp(log_sum / self.max_n)
        self._memo[seq] = val
        return val


def _neighbours(seq, pool, particles):
    """Sequences one allowed edit away: move a token, drop a particle, add one from ``pool``."""
    L = len(seq)
    for a in range(L):
        rest = seq[:a] + seq[a + 1:]
        tok = seq[a]
        for b in range(L):
            if b != a:
                yield rest[:b] + (tok,) + rest[b:], pool
        if tok in particles:
            yield rest, pool + (tok,)
    for k, tok in enumerate(pool):
        if tok in pool[:k]:
            continue
        left = pool[:k] + pool[k + 1:]
        for b in range(L + 1):
            yield seq[:b] + (tok,) + seq[b:], left


def _climb(seq, pool, score, particles):
    best = score(seq)
    while True:
        cand = None
        for nseq, npool in _neighbours(seq, pool, particles):
            s = score(nseq)
            if s > best + 1e-12:
                best, cand = s, (nseq, npool)
        if cand is None:
            return seq, pool, best
        seq, pool = cand


def _length_edits(seq, pool, particles):
    """Neighbours that drop a particle or insert one from ``pool``."""
    for a, tok in enumerate(seq):
        if tok in particles:
            yield seq[:a] + seq[a + 1:], pool + (tok,)
    for k, tok in enumerate(pool):
        if tok in pool[:k]:
            continue
        left = pool[:k] + pool[k + 1:]
        for b in range(len(seq) + 1):
            yield seq[:b] + (tok,) + seq[b:], left


def refine(start, pool, ref, particles, scorer=None):
    """Steepest-ascent search from ``start`` over allowed edits.

    ``pool`` is the multiset of particles that may still be inserted. Once
    no single edit helps, each length-changing edit is tried as a kick
    followed by another climb, since a deletion or insertion can pay off
    only after a movement.
    Returns the best sequence found and its smoothed sentence BLEU.
    """
    scorer = scorer or _Scorer(ref)
    seq, pool, best = _climb(tuple(start), tuple(pool), scorer, particles)
    improved = True
    while improved:
        improved = False
        for kseq, kpool in list(_length_edits(seq, pool, particles)):
            cseq, cpool, val = _climb(kseq, kpool, scorer, particles)
            if val > best + 1e-12:
                seq, pool, best, improved = cseq, cpool, val, True
                break
    return seq, best


def _categorize(hyp, ref, particles):
    al = align_dp(hyp, ref)
    moved = _moved_pairs(hyp, ref, al.hyp_residual, al.ref_residual)
    moved_h = {a for a, _ in moved}
    moved_r = {b for _, b in moved}
    hyp_left = [a for a in al.hyp_residual if a not in moved_h]
    ref_left = [b for b in al.ref_residual if b not in moved_r]
    inserted = tuple(b for b in ref_left if ref[b] in particles)
    deleted = tuple(a for a in hyp_left if hyp[a] in particles)
    leftovers = [a for a in hyp_left if hyp[a] not in particles]

    p = ErrorProfile()
    for a, _ in al.matched:
        if hyp[a] in particles:
            p.match_part += 1
        else:
            p.match_other += 1
    for a, _ in moved:
        if hyp[a] in particles:
            p.misalign_part += 1
        else:
            p.misalign_other += 1
    p.ins_part = len(inserted)
    p.del_part = len(deleted)
    p.hyp_other_residual = len(leftovers)
    p.ref_other_residual = len(ref_left) - len(inserted)
    return p, al, moved, inserted, deleted, leftovers


def error_profile(hyp, ref, particles=DEFAULT_PARTICLES) -> ErrorProfile:
    """Token categories for one pair, without the transform search."""
    return _categorize(tuple(hyp), tuple(ref), particles)[0]


def analyze(hyp, ref, particles=DEFAULT_PARTICLES) -> SentenceAnalysis:
    """Error profile and transformed hypothesis for one sentence pair."""
    hyp, ref = tuple(hyp), tuple(ref)
    p, al, moved, inserted, deleted, leftovers = _categorize(hyp, ref, particles)

    anchors = dict(al.matched)
    anchors.update(moved)
    covered = set(anchors.values()) | set(inserted)
    canon = canonical_transform(hyp, ref, covered, anchors, leftovers)

    scorer = _Scorer(ref)
    base = scorer(hyp)
    # climb from several deterministic starts; each carries the particles
    # it may still insert
    core = canonical_transform(hyp, ref, covered, anchors, [])
    rest = tuple(hyp[a] for a in leftovers)
    dropped = tuple(hyp[a] for a in deleted)
    starts = [
        (canon, dropped),
        (core + rest, dropped),
        (rest + core, dropped),
        (hyp, tuple(ref[b] for b in inserted)),
    ]
    transform, best = hyp, base
    for start, pool in starts:
        seq, val = refine(start, pool, ref, particles, scorer)
        if val > best + 1e-12:
            transform, best = seq, val
    return SentenceAnalysis(p, al, tuple(moved), inserted, deleted, canon, transform)


def _mean_profile(profiles: List[ErrorProfile]) -> ErrorProfile:
    out = ErrorProfile(sentences=len(profiles))
    if not profiles:
        return out
    for f in fields(ErrorProfile):
        if f.name == "sentences":
            continue
        setattr(out, f.name, sum(getattr(p, f.name) for p in profiles) / len(profiles))
    return out


def _check(hyps, refs):
    if len(hyps) != len(refs):
        raise ValueError(f"{len(hyps)} hypotheses but {len(refs)} references")


def analyze_corpus(hyps, refs, particles=DEFAULT_PARTICLES) -> ErrorProfile:
    """Per-sentence means of the error counts."""
    _check(hyps, refs)
    return _mean_profile([error_profile(h, r, particles) for h, r in zip(hyps, refs)])


def transformed_corpus(hyps, refs, particles=DEFAULT_PARTICLES) -> List[Tuple[str, ...]]:
    """Per-sentence transforms, with a corpus-level guard.

    Sentence-level gains do not always add up at corpus level (the brevity
    penalty is global), so a greedy pass reverts any sentence whose
    original raises corpus BLEU, and the originals win if still better.
    """
    _check(hyps, refs)
    hyps = [tuple(h) for h in hyps]
    refs = [tuple(r) for r in refs]
    trans = [analyze(h, r, particles).transform for h, r in zip(hyps, refs)]
    t_stats = [sentence_stats(t, r) for t, r in zip(trans, refs)]
    h_stats = [sentence_stats(h, r) for h, r in zip(hyps, refs)]
    total = sum(t_stats, corpus_stats([], []))
    cur = BleuReport.from_stats(total).bleu
    for i in range(len(trans)):
        if trans[i] == hyps[i]:
            continue
        alt = total - t_stats[i] + h_stats[i]
        val = BleuReport.from_stats(alt).bleu
        if val > cur:
            total, cur = alt, val
            trans[i] = hyps[i]
    base = BleuReport.from_stats(sum(h_stats, corpus_stats([], []))).bleu
    if base > cur:
        return list(hyps)
    return trans


def max_bleu(hyps, refs, particles=DEFAULT_PARTICLES) -> float:
    """Corpus BLEU (percent) of the transformed hypotheses."""
    trans = transformed_corpus(hyps, refs, particles)
    return bleu_corpus(trans, [tuple(r) for r in refs]).bleu


PROFILE_COLUMNS = ErrorProfile.COLUMNS + ("bleu", "max_bleu")


def profile_row(hyps, refs, particles=DEFAULT_PARTICLES) -> dict:
    prof = analyze_corpus(hyps, refs, particles)
    row = {c: round(v, 2) for c, v in prof.as_row().items()}
    row["bleu"] = round(bleu_corpus(hyps, refs).bleu, 2)
    row["max_bleu"] = round(max_bleu(hyps, refs, particles), 2)
    return row


def format_profile_tsv(rows: dict) -> str:
    lines = ["system\t" + "\t".join(PROFILE_COLUMNS)]
    for name, row in rows.items():
        lines.append(name + "\t" + "\t".join(f"{row[c]:.2f}" for c in PROFILE_COLUMNS))
    return "\n".join(lines)


def format_profile_table(rows: dict) -> str:
    heads = ("Match Part", "Match Other", "Misalign Part", "Misalign Other", "Ins Part", "Del Part", "BLEU", "Max BLEU")
    label_w = max([len("System")] + [len(k) for k in rows])
    header = "System".ljust(label_w) + "".join(f"{h:>15}" for h in heads)
    lines = [header, "-" * len(header)]
    for name, row in rows.items():
        lines.append(name.ljust(label_w) + "".join(f"{row[c]:>15.2f}" for c in PROFILE_COLUMNS))
    return "\n".join(lines)
