"""Paired bootstrap resampling between two systems on a shared test set."""

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .mtmetrics import BleuReport, bleu_score, ribes_corpus, ribes_score, sentence_stats

Metric = Callable[[Sequence, Sequence], float]


def _bleu_parts(hyps, refs):
    return np.array([sentence_stats(h, r) for h, r in zip(hyps, refs)])


def _ribes_parts(hyps, refs):
    return np.array([s[3] for s in ribes_corpus(hyps, refs).per_sentence])


# metrics that decompose over sentences: per-sentence parts, then a corpus
# score from the parts of one resample
_DECOMPOSABLE = {
    bleu_score: (_bleu_parts, lambda p: BleuReport.from_stats(p.sum(axis=0)).bleu),
    ribes_score: (_ribes_parts, lambda p: 100.0 * p.mean() if len(p) else 0.0),
}


@dataclass(frozen=True)
class BootstrapResult:
    p_value: float
    samples: int
    mean_delta: float
    seed: int
    metric_name: str

    def verdict(self, alpha: float = 0.05) -> str:
        if self.p_value < alpha:
            return f"system B is significantly better than system A (p = {self.p_value:.4f} < {alpha})"
        return f"no significant improvement of system B over system A (p = {self.p_value:.4f} >= {alpha})"

    def tsv(self) -> str:
        return f"{self.metric_name}\t{self.p_value:.4f}\t{self.mean_delta:.4f}\t{self.samples}\t{self.seed}"


def paired_bootstrap(hyps_a, hyps_b, refs, metric: Metric = bleu_score, samples: int = 1000,
                     seed: int = 0, metric_name: str = None) -> BootstrapResult:
    """One-sided test of "B scores higher than A".

    Each of ``samples`` resamples draws sentence indices with replacement.
    The p-value is the fraction of resamples where B does not beat A, so
    ties count against significance.
    """
    n = len(refs)
    if len(hyps_a) != n or len(hyps_b) != n:
        raise ValueError(f"corpus sizes differ: A={len(hyps_a)}, B={len(hyps_b)}, refs={n}")
    if n == 0:
        raise ValueError("cannot resample an empty corpus")
    if samples < 1:
        raise ValueError("need at least one bootstrap sample")
    if metric_name is None:
        metric_name = getattr(metric, "__name__", "metric")
    rng = np.random.default_rng(seed)
    fast = _DECOMPOSABLE.get(metric)
    if fast is not None:
        parts, combine = fast
        parts_a, parts_b = parts(hyps_a, refs), parts(hyps_b, refs)
    not_better = 0
    deltas = np.empty(samples)
    for k in range(samples):
        idx = rng.integers(0, n, size=n)
        if fast is not None:
            a, b = combine(parts_a[idx]), combine(parts_b[idx])
        else:
            r = [refs[i] for i in idx]
            a = metric([hyps_a[i] for i in idx], r)
            b = metric([hyps_b[i] for i in idx], r)
        deltas[k] = b - a
        if b <= a:
            not_better += 1
    return BootstrapResult(not_better / samples, samples, float(deltas.mean()), seed, metric_name)
