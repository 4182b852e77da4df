"""Tokenized corpus I/O, sentence pairing and synthetic corruption.

Corpus files are UTF-8, one sentence per line, tokens separated by single
spaces. A sentence is held as a tuple of token strings.
"""

import hashlib
import random
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple

TokenSequence = Tuple[str, ...]

# The ten frequent Japanese particles (topic, subject, object, location of
# action, location, direction, possessive, also, and, or).
DEFAULT_PARTICLES = frozenset(["は", "が", "を", "で", "に", "へ", "の", "も", "と", "や"])


class CorpusFormatError(ValueError):
    """Malformed corpus file; carries the path and 1-based line number."""

    def __init__(self, path, lineno, message):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {message}")


class BlankLineWarning(UserWarning):
    pass


def as_tokens(tokens: Iterable[str]) -> TokenSequence:
    seq = tuple(tokens)
    for tok in seq:
        if not tok or any(c.isspace() for c in tok):
            raise ValueError(f"invalid token {tok!r}")
    return seq


def load_corpus(path, blank_lines: List[int] = None) -> List[TokenSequence]:
    """Read a tokenized corpus file.

    Blank lines yield empty sequences. Their 1-based line numbers are
    appended to ``blank_lines`` when a list is given, otherwise a single
    :class:`BlankLineWarning` lists them.
    """
    raw = Path(path).read_bytes()
    if raw.startswith(b"\xef\xbb\xbf"):
        raise CorpusFormatError(path, 1, "byte order mark not allowed")
    lines = raw.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    sentences = []
    blanks = []
    for lineno, line in enumerate(lines, 1):
        if line.endswith(b"\r"):
            line = line[:-1]
        try:
            text = line.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CorpusFormatError(path, lineno, f"invalid UTF-8 ({exc.reason})") from None
        toks = tuple(text.split())
        if not toks:
            blanks.append(lineno)
        sentences.append(toks)
    if blank_lines is not None:
        blank_lines.extend(blanks)
    elif blanks:
        shown = ", ".join(map(str, blanks[:10]))
        more = "" if len(blanks) <= 10 else f" (+{len(blanks) - 10} more)"
        warnings.warn(f"{path}: blank lines at {shown}{more}", BlankLineWarning, stacklevel=2)
    return sentences


def format_sentence(tokens: Sequence[str]) -> str:
    return " ".join(tokens)


def write_corpus(path, sentences: Iterable[Sequence[str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for sent in sentences:
            f.write(format_sentence(sent))
            f.write("\n")


def corpus_checksum(sentences: Iterable[Sequence[str]]) -> str:
    """SHA-256 of the serialized corpus, as written by :func:`write_corpus`."""
    h = hashlib.sha256()
    for sent in sentences:
        h.update(format_sentence(sent).encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


@dataclass
class ParallelCorpus:
    pairs: List[Tuple[TokenSequence, TokenSequence]] = field(default_factory=list)
    roles: Tuple[str, str] = ("source", "target")
    dropped: int = 0

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    @property
    def sources(self) -> List[TokenSequence]:
        return [s for s, _ in self.pairs]

    @property
    def targets(self) -> List[TokenSequence]:
        return [t for _, t in self.pairs]

    def swapped(self) -> "ParallelCorpus":
        return ParallelCorpus([(t, s) for s, t in self.pairs], (self.roles[1], self.roles[0]))


def pair_corpora(src, tgt, drop_empty=True, roles=("source", "target")) -> ParallelCorpus:
    """Zip two sentence lists into a :class:`ParallelCorpus`.

    With ``drop_empty`` pairs having an empty side are removed and counted in
    ``corpus.dropped``; otherwise an empty side raises ``ValueError``.
    """
    if len(src) != len(tgt):
        raise ValueError(
            f"sentence count mismatch: {roles[0]} has {len(src)}, {roles[1]} has {len(tgt)}"
        )
    pairs = []
    dropped = 0
    for i, (s, t) in enumerate(zip(src, tgt)):
        s, t = tuple(s), tuple(t)
        if not s or not t:
            if not drop_empty:
                raise ValueError(f"empty sentence in pair {i}")
            dropped += 1
            continue
        pairs.append((s, t))
    return ParallelCorpus(pairs, tuple(roles), dropped)


@dataclass(frozen=True)
class CorruptionSpec:
    particle_drop_prob: float = 0.3
    adjacent_swap_prob: float = 0.2
    seed: int = 42

    def __post_init__(self):
        for name in ("particle_drop_prob", "adjacent_swap_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")


def corrupt(references, spec: CorruptionSpec, particle_set=DEFAULT_PARTICLES) -> List[TokenSequence]:
    """Emulate MT output by dropping particles and swapping neighbours.

    One RNG stream seeded by ``spec.seed`` runs over the whole corpus. Per
    sentence, every particle draws once for deletion; then a single
    left-to-right pass draws once per adjacent non-particle pair, and a
    swapped pair is skipped over so no token moves twice.
    """
    rng = random.Random(spec.seed)
    out = []
    for sent in references:
        toks = [t for t in sent if not (t in particle_set and rng.random() < spec.particle_drop_prob)]
        i = 0
        while i < len(toks) - 1:
            a, b = toks[i], toks[i + 1]
            if a not in particle_set and b not in particle_set:
                if rng.random() < spec.adjacent_swap_prob:
                    toks[i], toks[i + 1] = b, a
                    i += 2
                    continue
            i += 1
        out.append(tuple(toks))
    return out


# -- synthetic Japanese-like reference corpus --------------------------------

_PEOPLE = (
    "田中 佐藤 鈴木 高橋 山本 学生 先生 医者 記者 大統領 首相 大臣 代表団 社長 "
    "市長 選手 歌手 作家 警察 政府 委員会 銀行 会社 住民 専門家 "
    "兵士 農民 教授 弁護士 議員 国王 王子 外相 議長 労働者"
).split()
_PLACES = (
    "東京 大阪 京都 公園 学校 駅 病院 首都 会議室 空港 図書館 大学 市場 "
    "港 国会 広場 事務所 工場 ホテル 劇場 カイロ リヤド "
    "ドバイ 大使館 議会 裁判所 博物館 難民キャンプ 国境 砂漠 村 海岸"
).split()
_THINGS = (
    "本 手紙 予算 問題 計画 報告 映画 写真 新聞 声明 条約 協定 法案 資料 "
    "料理 車 地図 切符 荷物 薬 商品 技術 情報 意見 結果 記事 番組 作品 歴史 役割 "
    "石油 武器 援助 選挙 会談 提案 原因 制裁 合意 憲法 経済 映像 証拠 決定 方針"
).split()
_TIMES = "昨日 今日 明日 今年 去年 午後 朝 夜 先週 来月".split()
_ADJS = "新しい 古い 大きな 小さな 重要な 有名な 国際的な 歴史的な 若い 美しい 難しい 厳しい".split()
_TRANS = (
    "読み 書き 発表し 見 送り 買い 作り 調べ 受け取り 説明し 提出し 議論し 承認し 批判し 支持し "
    "拒否し 延期し 検討し 要求し 確認し"
).split()
_MOTION = "行き 来 到着し 帰り 向かい 戻り 移動し 出発し".split()
_ACTION = "働き 会い 話し 休み 勉強し 待ち 集まり 演説し 記者会見し".split()
_ENDINGS = "ました ます ませんでした たい".split()
_COPULA = "です でした".split()


def synthetic_vocabulary() -> List[str]:
    groups = (_PEOPLE, _PLACES, _THINGS, _TIMES, _ADJS, _TRANS, _MOTION, _ACTION, _ENDINGS, _COPULA)
    vocab = [w for g in groups for w in g]
    vocab += sorted(DEFAULT_PARTICLES) + ["。"]
    return vocab


def synthetic_references(n_sentences: int, seed: int = 0) -> List[TokenSequence]:
    """Generate a deterministic corpus of particle-rich SOV sentences.

    Particles follow their heads as case markers, so a language model can
    learn where dropped ones belong.
    """
    rng = random.Random(seed)

    def np_(nouns):
        r = rng.random()
        if r < 0.2:
            return [rng.choice(_ADJS), rng.choice(nouns)]
        if r < 0.35:
            return [rng.choice(_PEOPLE), "の", rng.choice(nouns)]
        if r < 0.45:
            conj = rng.choice(("と", "や"))
            return [rng.choice(nouns), conj, rng.choice(nouns)]
        return [rng.choice(nouns)]

    out = []
    for _ in range(n_sentences):
        toks = []
        if rng.random() < 0.3:
            toks.append(rng.choice(_TIMES))
            if rng.random() < 0.5:
                toks.append("に")
        kind = rng.random()
        topic = rng.choice(("は", "は", "が", "も"))
        if kind < 0.45:
            toks += np_(_PEOPLE) + [topic]
            if rng.random() < 0.4:
                toks += np_(_PLACES) + ["で"]
            toks += np_(_THINGS) + ["を", rng.choice(_TRANS), rng.choice(_ENDINGS)]
        elif kind < 0.75:
            toks += np_(_PEOPLE) + [topic]
            toks += np_(_PLACES) + [rng.choice(("に", "へ")), rng.choice(_MOTION), rng.choice(_ENDINGS)]
        elif kind < 0.9:
            toks += np_(_PEOPLE) + [topic]
            toks += np_(_PLACES) + ["で", rng.choice(_ACTION), rng.choice(_ENDINGS)]
        else:
            toks += [rng.choice(_PEOPLE), "の", rng.choice(_THINGS), "は", rng.choice(_ADJS), rng.choice(_COPULA)]
        toks.append("。")
        out.append(tuple(toks))
    return out
