"""Log-linear phrase-based stack decoder and coordinate-ascent tuning.

Features are natural-log phrase probabilities and LM probability, the
negated target length (so the default weight of -1 rewards each output
word and offsets the LM's preference for short output), the negated
distance-based distortion, a phrase count and a count of passthrough
(unknown) tokens.
"""

import math
import random
from dataclasses import astuple, dataclass, field, fields, replace
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

from .ngramlm import BOS, EOS, NGramModel
from .phrasetab import MAX_PHRASE_LEN, PhraseScores, PhraseTable

LN10 = math.log(10.0)
TIE_EPS = 1e-9

FEATURES = (
    "phi_fwd",
    "phi_rev",
    "lex_fwd",
    "lex_rev",
    "lm",
    "word_penalty",
    "distortion",
    "phrase_penalty",
    "unknown",
)
TUNABLE = FEATURES[:-1]


@dataclass(frozen=True)
class FeatureWeights:
    phi_fwd: float = 0.2
    phi_rev: float = 0.2
    lex_fwd: float = 0.2
    lex_rev: float = 0.2
    lm: float = 0.5
    word_penalty: float = -1.0
    distortion: float = 0.3
    phrase_penalty: float = 0.0
    unknown: float = -10.0  # fixed passthrough penalty, not tuned

    def __post_init__(self):
        for f in fields(self):
            if not math.isfinite(getattr(self, f.name)):
                raise ValueError(f"weight {f.name} must be finite")

    def vector(self) -> Tuple[float, ...]:
        return astuple(self)

    def dot(self, feats: Sequence[float]) -> float:
        return math.fsum(w * x for w, x in zip(self.vector(), feats))

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for name in FEATURES:
                f.write(f"{name} {getattr(self, name)!r}\n")

    @classmethod
    def read(cls, path) -> "FeatureWeights":
        vals = {}
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                if not line.strip():
                    continue
                name, value = line.split()
                if name not in FEATURES:
                    raise ValueError(f"{path}:{lineno}: unknown weight {name!r}")
                vals[name] = float(value)
        return cls(**vals)


@dataclass(frozen=True)
class DecoderConfig:
    beam_size: int = 100
    distortion_limit: int = 6
    max_phrase_len: int = MAX_PHRASE_LEN
    ttable_limit: int = 20

    def __post_init__(self):
        if self.beam_size < 1:
            raise ValueError("beam_size must be positive")
        if self.distortion_limit < 0:
            raise ValueError("distortion_limit must be non-negative")
        if self.ttable_limit < 1 or self.max_phrase_len < 1:
            raise ValueError("ttable_limit and max_phrase_len must be positive")


class Segment(NamedTuple):
    source_span: Tuple[int, int]  # inclusive
    target: Tuple[str, ...]
    scores: Optional[PhraseScores]  # None for a passthrough token


@dataclass
class Derivation:
    target: Tuple[str, ...]
    segments: List[Segment]
    model_score: float
    feature_vector: Tuple[float, ...]


class _Option(NamedTuple):
    target: Tuple[str, ...]
    scores: Optional[PhraseScores]
    feats: Tuple[float, ...]  # LM and distortion slots left at zero
    lm_est: float  # context-free log10 LM score of the target


def phrase_features(target, scores: Optional[PhraseScores]) -> Tuple[float, ...]:
    """Feature vector of one phrase application, without LM and distortion."""
    if scores is None:
        return (0.0, 0.0, 0.0, 0.0, 0.0, -float(len(target)), 0.0, 1.0, float(len(target)))
    return (
        math.log(scores.phi_fwd),
        math.log(scores.phi_rev),
        math.log(scores.lex_fwd),
        math.log(scores.lex_rev),
        0.0,
        -float(len(target)),
        0.0,
        1.0,
        0.0,
    )


class SentenceLattice:
    """Weight-independent decoding data for one source sentence.

    Holds every translation option per span and memoizes LM extensions, so
    repeated decodes of the same sentence (as in tuning) share the work.
    A token with no single-word entry gets a verbatim passthrough option.
    """

    def __init__(self, source, table: PhraseTable, lm: NGramModel, max_phrase_len: int = MAX_PHRASE_LEN):
        self.source = tuple(source)
        self.lm = lm
        self.hist = lm.order - 1
        n = len(self.source)
        self.spans: Dict[Tuple[int, int], List[_Option]] = {}
        for i in range(n):
            for j in range(i, min(n, i + max_phrase_len)):
                cands = [
                    _Option(t, sc, phrase_features(t, sc), lm.score(t, bos=False, eos=False))
                    for t, sc in table.options(self.source[i:j + 1])
                ]
                if i == j and not cands:
                    t = (self.source[i],)
                    cands.append(_Option(t, None, phrase_features(t, None), lm.score(t, bos=False, eos=False)))
                if cands:
                    self.spans[i, j] = cands
        self._lm_cache = {}

    def lm_extend(self, state, target):
        key = (state, target)
        hit = self._lm_cache.get(key)
        if hit is None:
            ctx = list(state)
            lp = 0.0
            for tok in target:
                lp += self.lm.logprob(ctx, tok)
                ctx.append(tok)
            hit = (lp, tuple(ctx[-self.hist:]) if self.hist > 0 else ())
            self._lm_cache[key] = hit
        return hit


def translation_options(lattice: SentenceLattice, weights: FeatureWeights, config: DecoderConfig):
    """Per-span options as ``(static score, estimate, option)``, best ``ttable_limit`` first."""
    w = weights.vector()
    w_lm = weights.lm * LN10
    out = {}
    for (i, j), cands in lattice.spans.items():
        if j - i >= config.max_phrase_len:
            continue
        scored = []
        for opt in cands:
            static = sum(a * b for a, b in zip(w, opt.feats))
            scored.append((static, static + w_lm * opt.lm_est, opt))
        scored.sort(key=lambda x: (-x[1], x[2].target))
        out[i, j] = scored[: config.ttable_limit]
    return out


def future_costs(n, opts):
    """Best estimated score for covering each span ``fc[i][j]`` (inclusive)."""
    fc = [[-math.inf] * n for _ in range(n)]
    for length in range(1, n + 1):
        for i in range(n - length + 1):
            j = i + length - 1
            best = opts[i, j][0][1] if (i, j) in opts else -math.inf
            for k in range(i, j):
                s = fc[i][k] + fc[k + 1][j]
                if s > best:
                    best = s
            fc[i][j] = best
    return fc


class _Hyp:
    __slots__ = ("score", "future", "coverage", "state", "last_end", "back", "segment", "lm_delta", "distortion")

    def __init__(self, score, future, coverage, state, last_end, back, segment, lm_delta, distortion):
        self.score = score
        self.future = future
        self.coverage = coverage
        self.state = state
        self.last_end = last_end
        self.back = back
        self.segment = segment
        self.lm_delta = lm_delta
        self.distortion = distortion

    def target(self):
        parts = []
        h = self
        while h.back is not None:
            parts.append(h.segment[1].target)
            h = h.back
        return tuple(t for p in reversed(parts) for t in p)


def _uncovered_future(coverage, n, fc):
    total = 0.0
    i = 0
    while i < n:
        if coverage >> i & 1:
            i += 1
            continue
        j = i
        while j + 1 < n and not coverage >> (j + 1) & 1:
            j += 1
        total += fc[i][j]
        i = j + 1
    return total


def _better(a: _Hyp, b: _Hyp) -> bool:
    if a.score > b.score + TIE_EPS:
        return True
    if b.score > a.score + TIE_EPS:
        return False
    return a.target() < b.target()


def decode(source, table: PhraseTable, lm: NGramModel, weights: FeatureWeights = FeatureWeights(),
           config: DecoderConfig = DecoderConfig(), lattice: Optional[SentenceLattice] = None) -> Derivation:
    """Best derivation by stack decoding with recombination and histogram pruning.

    Stacks are indexed by the number of covered source words. Hypotheses
    sharing coverage, LM history and last covered position are merged.
    """
    source = tuple(source)
    n = len(source)
    if n == 0:
        lp = lm.logprob((BOS,), EOS)
        feats = (0.0, 0.0, 0.0, 0.0, lp * LN10, 0.0, 0.0, 0.0, 0.0)
        return Derivation((), [], weights.lm * lp * LN10, feats)

    if lattice is None:
        lattice = SentenceLattice(source, table, lm, config.max_phrase_len)
    opts = translation_options(lattice, weights, config)
    fc = future_costs(n, opts)
    hist = lm.order - 1
    w_lm = weights.lm * LN10
    w_dist = weights.distortion
    limit = config.distortion_limit
    full = (1 << n) - 1
    lm_extend = lattice.lm_extend

    init_state = (BOS,) if hist > 0 else ()
    root = _Hyp(0.0, fc[0][n - 1], 0, init_state, -1, None, None, 0.0, 0)
    stacks: List[Dict[tuple, _Hyp]] = [dict() for _ in range(n + 1)]
    stacks[0][(0, init_state, -1)] = root

    for covered in range(n):
        stack = stacks[covered]
        if not stack:
            continue
        hyps = sorted(stack.values(), key=lambda h: -(h.score + h.future))[: config.beam_size]
        for h in hyps:
            cov = h.coverage
            first_gap = 0
            while cov >> first_gap & 1:
                first_gap += 1
            for i in range(n):
                if cov >> i & 1:
                    continue
                jump = abs(i - h.last_end - 1)
                if jump > limit:
                    continue
                j = i
                while j < n and not cov >> j & 1 and j - i < config.max_phrase_len:
                    span_opts = opts.get((i, j))
                    new_cov = cov | ((1 << (j + 1)) - (1 << i))
                    # the leftmost gap must stay reachable from the new end
                    gap = first_gap
                    while gap < n and new_cov >> gap & 1:
                        gap += 1
                    reachable = gap >= n or gap > j or (j + 1 - gap) <= limit
                    if span_opts and reachable:
                        future = _uncovered_future(new_cov, n, fc)
                        base = h.score - w_dist * jump
                        bucket = stacks[covered + j - i + 1]
                        for static, _, opt in span_opts:
                            lp, state = lm_extend(h.state, opt.target)
                            score = base + static + w_lm * lp
                            if new_cov == full:
                                end_lp = lm.logprob(state, EOS)
                                lp += end_lp
                                score += w_lm * end_lp
                            key = (new_cov, state, j)
                            old = bucket.get(key)
                            if old is not None and score < old.score - TIE_EPS:
                                continue
                            new = _Hyp(score, future, new_cov, state, j, h, ((i, j), opt), lp, jump)
                            if old is None or _better(new, old):
                                bucket[key] = new
                    j += 1

    final = list(stacks[n].values())
    if not final:
        # distortion constraints can only starve the search if something is
        # badly wrong; fall back to monotone decoding
        return decode(source, table, lm, weights, replace(config, distortion_limit=n), lattice)
    best = final[0]
    for h in final[1:]:
        if _better(h, best):
            best = h
    return _derivation(best, weights)


def _derivation(hyp: _Hyp, weights: FeatureWeights) -> Derivation:
    chain = []
    h = hyp
    while h.back is not None:
        chain.append(h)
        h = h.back
    chain.reverse()
    feats = [0.0] * len(FEATURES)
    segments = []
    target = []
    for h in chain:
        (i, j), opt = h.segment
        segments.append(Segment((i, j), opt.target, opt.scores))
        target.extend(opt.target)
        for k, v in enumerate(opt.feats):
            feats[k] += v
        feats[4] += h.lm_delta * LN10
        feats[6] -= h.distortion
    return Derivation(tuple(target), segments, hyp.score, tuple(feats))


def rescore(derivation: Derivation, lm: NGramModel, weights: FeatureWeights) -> Tuple[Tuple[float, ...], float]:
    """Recompute the feature vector and model score from segments alone."""
    feats = [0.0] * len(FEATURES)
    prev_end = -1
    for seg in derivation.segments:
        for k, v in enumerate(phrase_features(seg.target, seg.scores)):
            feats[k] += v
        feats[6] -= abs(seg.source_span[0] - prev_end - 1)
        prev_end = seg.source_span[1]
    target = tuple(t for seg in derivation.segments for t in seg.target)
    feats[4] = lm.score(target) * LN10
    return tuple(feats), weights.dot(feats)


def decode_corpus(sources, table, lm, weights=FeatureWeights(), config=DecoderConfig(), lattices=None):
    if lattices is None:
        return [decode(s, table, lm, weights, config).target for s in sources]
    return [decode(s, table, lm, weights, config, lat).target for s, lat in zip(sources, lattices)]


# -- tuning --------------------------------------------------------------------

DEFAULT_GRID = (-1.0, -0.5, -0.25, -0.1, 0.0, 0.1, 0.25, 0.5, 1.0)


class TuneResult(NamedTuple):
    weights: FeatureWeights
    bleu: float
    evaluations: int


def tune_weights(
    table: PhraseTable,
    lm: NGramModel,
    tune_corpus,
    config: DecoderConfig = DecoderConfig(),
    seed: int = 0,
    restarts: int = 3,
    grid: Sequence[float] = DEFAULT_GRID,
    max_sweeps: int = 2,
    start: FeatureWeights = FeatureWeights(),
) -> TuneResult:
    """Coordinate ascent on corpus BLEU of the decoded tune sources.

    The first run starts from ``start``; ``restarts - 1`` more start from
    weights drawn uniformly from the grid range. Each sweep line-searches
    every tunable weight over ``grid`` and keeps strict improvements only,
    so a start that is already optimal comes back unchanged.
    """
    from .mtmetrics import bleu_score

    pairs = list(tune_corpus)
    if not pairs:
        raise ValueError("cannot tune on an empty corpus")
    sources = [tuple(s) for s, _ in pairs]
    refs = [tuple(t) for _, t in pairs]
    rng = random.Random(seed)
    lattices = [SentenceLattice(s, table, lm, config.max_phrase_len) for s in sources]
    cache = {}

    def evaluate(w: FeatureWeights) -> float:
        key = w.vector()
        if key not in cache:
            cache[key] = bleu_score(decode_corpus(sources, table, lm, w, config, lattices), refs)
        return cache[key]

    starts = [start]
    lo, hi = min(grid), max(grid)
    for _ in range(max(restarts, 1) - 1):
        starts.append(replace(start, **{name: round(rng.uniform(lo, hi), 6) for name in TUNABLE}))

    best_w, best_bleu = start, evaluate(start)
    for w in starts:
        cur = evaluate(w)
        for _ in range(max_sweeps):
            improved = False
            for name in TUNABLE:
                for v in grid:
                    if v == getattr(w, name):
                        continue
                    cand = replace(w, **{name: v})
                    b = evaluate(cand)
                    if b > cur:
                        w, cur, improved = cand, b, True
            if not improved:
                break
        if cur > best_bleu:
            best_w, best_bleu = w, cur
    return TuneResult(best_w, best_bleu, len(cache))
