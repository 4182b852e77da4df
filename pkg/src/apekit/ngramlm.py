"""Interpolated Witten-Bell backoff n-gram language model.

Probabilities are stored in ARPA form: for every observed n-gram the full
interpolated log10 probability, and for every observed context the log10
weight ``T(h) / (c(h) + T(h))`` that the lower order gets. Because the
interpolated estimate of an unseen word is exactly that weight times the
lower-order estimate, the backoff lookup reproduces the interpolated
model.
"""

import math
from collections import Counter
from typing import Dict, List, Sequence, Tuple

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"
UNK_FLOOR = -7.0
BOS_LOGPROB = -99.0

NGram = Tuple[str, ...]


class NGramModel:
    """Backoff LM over per-order tables ``ngram -> (log10 prob, log10 backoff)``."""

    def __init__(self, order: int, tables: List[Dict[NGram, Tuple[float, float]]]):
        if order < 1 or len(tables) != order:
            raise ValueError("need one table per order")
        self.order = order
        self.tables = tables
        self.vocab = frozenset(w for (w,) in tables[0])
        self._cache = {}

    def __getstate__(self):
        return {"order": self.order, "tables": self.tables}

    def __setstate__(self, state):
        self.__init__(state["order"], state["tables"])

    def map_token(self, w: str) -> str:
        return w if w in self.vocab else UNK

    def logprob(self, context: Sequence[str], word: str) -> float:
        """log10 P(word | context); only the last ``order - 1`` context tokens matter."""
        key = (tuple(context[-(self.order - 1):]) if self.order > 1 else (), word)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        ctx = tuple(self.map_token(w) if w != BOS else w for w in key[0])
        w = self.map_token(word)
        total = 0.0
        while True:
            ng = ctx + (w,)
            entry = self.tables[len(ng) - 1].get(ng)
            if entry is not None:
                lp = total + entry[0]
                break
            if not ctx:
                lp = total + UNK_FLOOR
                break
            bo = self.tables[len(ctx) - 1].get(ctx)
            if bo is not None:
                total += bo[1]
            ctx = ctx[1:]
        self._cache[key] = lp
        return lp

    def score(self, sentence: Sequence[str], bos: bool = True, eos: bool = True) -> float:
        """Sum of per-token log10 probabilities, including the end marker."""
        hist = [BOS] if bos else []
        total = 0.0
        for w in sentence:
            total += self.logprob(hist, w)
            hist.append(w)
        if eos:
            total += self.logprob(hist, EOS)
        return total

    def predictable_vocab(self) -> List[str]:
        return sorted(w for w in self.vocab if w != BOS)

    # -- ARPA ---------------------------------------------------------------

    def arpa_lines(self):
        yield ""
        yield "\\data\\"
        for n, table in enumerate(self.tables, 1):
            yield f"ngram {n}={len(table)}"
        for n, table in enumerate(self.tables, 1):
            yield ""
            yield f"\\{n}-grams:"
            for ng in sorted(table):
                lp, bo = table[ng]
                text = " ".join(ng)
                if n < self.order and bo != 0.0:
                    yield f"{lp!r}\t{text}\t{bo!r}"
                else:
                    yield f"{lp!r}\t{text}"
        yield ""
        yield "\\end\\"

    def write_arpa(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for line in self.arpa_lines():
                f.write(line + "\n")

    @classmethod
    def read_arpa(cls, path) -> "NGramModel":
        counts = {}
        tables = []
        section = None
        with open(path, encoding="utf-8") as f:
            for lineno, raw in enumerate(f, 1):
                line = raw.strip()
                if not line:
                    continue
                if line == "\\data\\":
                    section = "data"
                elif line == "\\end\\":
                    break
                elif line.startswith("\\") and line.endswith("-grams:"):
                    section = int(line[1:-len("-grams:")])
                    while len(tables) < section:
                        tables.append({})
                elif section == "data":
                    key, val = line.split("=")
                    counts[int(key.split()[1])] = int(val)
                elif isinstance(section, int):
                    parts = line.split("\t")
                    if len(parts) not in (2, 3):
                        raise ValueError(f"{path}:{lineno}: malformed n-gram line")
                    ng = tuple(parts[1].split(" "))
                    if len(ng) != section:
                        raise ValueError(f"{path}:{lineno}: expected a {section}-gram")
                    bo = float(parts[2]) if len(parts) == 3 else 0.0
                    tables[section - 1][ng] = (float(parts[0]), bo)
        for n, c in counts.items():
            if n > len(tables) or len(tables[n - 1]) != c:
                raise ValueError(f"{path}: header count for order {n} does not match body")
        return cls(len(tables), tables)


def _count(sentences, order):
    """Counts of every n-gram (n <= order) in BOS/EOS padded sentences."""
    counts = [Counter() for _ in range(order)]
    for sent in sentences:
        toks = [BOS] + list(sent) + [EOS]
        for i in range(1, len(toks)):
            for n in range(1, order + 1):
                start = i - n + 1
                if start < 0:
                    break
                counts[n - 1][tuple(toks[start:i + 1])] += 1
    return counts


def train_lm(sentences, order: int = 5, unk_singletons: bool = False) -> NGramModel:
    """Train an interpolated Witten-Bell model of the given order.

    The unigram level interpolates with a uniform distribution over the
    predictable vocabulary (all words, ``</s>`` and ``<unk>``), so every
    context distribution sums to one. With ``unk_singletons`` words seen
    once are replaced by ``<unk>`` before counting.
    """
    sents = [tuple(s) for s in sentences]
    if not sents:
        raise ValueError("cannot train a language model on an empty corpus")
    if order < 1:
        raise ValueError("order must be positive")
    if unk_singletons:
        freq = Counter(w for s in sents for w in s)
        sents = [tuple(UNK if freq[w] == 1 else w for w in s) for s in sents]
    counts = _count(sents, order)

    # context statistics: c(h) and T(h) for every history h
    ctx_total = [Counter() for _ in range(order)]
    ctx_types = [Counter() for _ in range(order)]
    for n in range(order):
        for ng, c in counts[n].items():
            h = ng[:-1]
            ctx_total[n][h] += c
            ctx_types[n][h] += 1

    vocab = set(w for (w,) in counts[0])
    vocab.add(UNK)
    vocab.discard(BOS)
    uniform = 1.0 / len(vocab)

    probs: List[Dict[NGram, float]] = [dict() for _ in range(order)]
    lam = [dict() for _ in range(order)]
    for n in range(order):
        for h, c in ctx_total[n].items():
            lam[n][h] = c / (c + ctx_types[n][h])

    def lower(ng):
        # every suffix of an observed n-gram is itself observed
        if len(ng) == 1:
            return uniform
        return probs[len(ng) - 2][ng[1:]]

    for n in range(order):
        for ng in sorted(counts[n]):
            h = ng[:-1]
            l = lam[n][h]
            probs[n][ng] = l * counts[n][ng] / ctx_total[n][h] + (1.0 - l) * lower(ng)
    for w in sorted(vocab):
        if (w,) not in probs[0]:
            probs[0][(w,)] = (1.0 - lam[0][()]) * uniform

    tables = []
    for n in range(order):
        table = {}
        for ng, p in probs[n].items():
            bo = 0.0
            if n + 1 < order and ng in lam[n + 1]:
                bo = math.log10(1.0 - lam[n + 1][ng])
            table[ng] = (math.log10(p), bo)
        tables.append(table)
    bo = 0.0
    if order > 1 and (BOS,) in lam[1]:
        bo = math.log10(1.0 - lam[1][(BOS,)])
    tables[0][(BOS,)] = (BOS_LOGPROB, bo)
    return NGramModel(order, tables)
