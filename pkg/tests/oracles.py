"""Brute-force reference implementations shared by the unit and acceptance tests."""

import random
from collections import Counter

from sympy.utilities.iterables import multiset_permutations

from apekit.mtmetrics import sentence_bleu
from apekit.textio import DEFAULT_PARTICLES

_JUNK = "\0"


def insertable_particles(hyp, ref, particles=DEFAULT_PARTICLES):
    """Reference particles left over once every hypothesis copy is matched or moved."""
    h, r = Counter(hyp), Counter(ref)
    return sorted(p for p in r if p in particles for _ in range(max(0, r[p] - h[p])))


def max_sentence_bleu(hyp, ref, particles=DEFAULT_PARTICLES):
    """Exhaustive maximum of smoothed sentence BLEU over allowed edits.

    Every permutation of the kept tokens, any subset of hypothesis particles
    deleted, any subset of insertable particles added. Tokens absent from
    the reference never match, so they are collapsed into one placeholder.
    """
    keep = [t for t in hyp if t not in particles]
    pool = [t for t in hyp if t in particles] + insertable_particles(hyp, ref, particles)
    in_ref = set(ref)
    best = 0.0
    seen = set()
    for mask in range(1 << len(pool)):
        toks = keep + [pool[k] for k in range(len(pool)) if mask >> k & 1]
        toks = [t if t in in_ref else _JUNK for t in toks]
        key = tuple(sorted(toks))
        if not toks or key in seen:
            continue
        seen.add(key)
        for perm in multiset_permutations(toks):
            best = max(best, sentence_bleu(perm, ref))
    return best


def random_pair(rng: random.Random, max_len=5, content="abcdef", particles=("が", "は", "を", "に")):
    """Short random sentence pair mixing content words and particles."""
    def sent():
        return tuple(
            rng.choice(content) if rng.random() < 0.6 else rng.choice(particles)
            for _ in range(rng.randint(1, max_len))
        )
    return sent(), sent()
