"""Train and apply a monolingual post-editor; model bundle I/O.

Training follows the usual recipe: the MT output is the source side, the
reference the target side. Both alignment directions are trained and
symmetrized, phrases are extracted and scored, an n-gram LM is trained on
the references, and the log-linear weights are tuned on a held-out split.
"""

import hashlib
import logging
import warnings
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional

from . import __version__
from .decoder import DecoderConfig, FeatureWeights, decode, tune_weights
from .ngramlm import NGramModel, train_lm
from .phrasetab import MAX_PHRASE_LEN, PhraseTable, build_phrase_table
from .textio import ParallelCorpus, corpus_checksum, pair_corpora
from .wordalign import align_corpus

logger = logging.getLogger(__name__)

BUNDLE_FILES = ("phrase-table.txt", "lm.arpa", "weights.txt", "config.tsv")


@dataclass(frozen=True)
class TrainParams:
    align_iterations: int = 5
    max_phrase_len: int = MAX_PHRASE_LEN
    lm_order: int = 5
    unk_singletons: bool = False
    tune: bool = True
    tune_restarts: int = 3
    tune_sweeps: int = 2
    tune_beam_size: Optional[int] = 10
    seed: int = 0
    config: DecoderConfig = DecoderConfig()


@dataclass
class ApeModel:
    phrase_table: PhraseTable
    lm: NGramModel
    weights: FeatureWeights
    config: DecoderConfig
    manifest: Dict[str, str] = field(default_factory=dict)

    def save(self, directory) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        self.phrase_table.write(d / "phrase-table.txt")
        self.lm.write_arpa(d / "lm.arpa")
        self.weights.write(d / "weights.txt")
        with open(d / "config.tsv", "w", encoding="utf-8", newline="\n") as f:
            for k, v in asdict(self.config).items():
                f.write(f"{k}\t{v}\n")
        manifest = {k: v for k, v in self.manifest.items() if not k.startswith("sha256:")}
        for name in BUNDLE_FILES:
            manifest[f"sha256:{name}"] = _sha256(d / name)
        self.manifest = manifest
        with open(d / "manifest.tsv", "w", encoding="utf-8", newline="\n") as f:
            for k in sorted(manifest):
                f.write(f"{k}\t{manifest[k]}\n")

    @classmethod
    def load(cls, directory, verify: bool = True) -> "ApeModel":
        d = Path(directory)
        manifest = {}
        with open(d / "manifest.tsv", encoding="utf-8") as f:
            for line in f:
                k, v = line.rstrip("\n").split("\t", 1)
                manifest[k] = v
        if verify:
            for name in BUNDLE_FILES:
                want = manifest.get(f"sha256:{name}")
                if want != _sha256(d / name):
                    raise ValueError(f"{d / name}: checksum does not match manifest")
        cfg = {}
        with open(d / "config.tsv", encoding="utf-8") as f:
            for line in f:
                k, v = line.rstrip("\n").split("\t")
                cfg[k] = int(v)
        config = DecoderConfig(**cfg)
        table = PhraseTable.read(d / "phrase-table.txt", config.max_phrase_len)
        return cls(table, NGramModel.read_arpa(d / "lm.arpa"), FeatureWeights.read(d / "weights.txt"), config, manifest)


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def train_ape(mt_output, references, tune: Optional[ParallelCorpus] = None, params: TrainParams = TrainParams()) -> ApeModel:
    """Train a post-editor from (MT output, reference) sentence pairs."""
    corpus = pair_corpora(mt_output, references, drop_empty=True, roles=("mt-output", "reference"))
    if not corpus.pairs:
        raise ValueError("cannot train a post-editor on an empty corpus")
    if corpus.dropped:
        logger.warning("dropped %d training pairs with an empty side", corpus.dropped)
    pairs = corpus.pairs

    logger.info("aligning %d sentence pairs", len(pairs))
    fwd_table, rev_table, alignments = align_corpus(pairs, params.align_iterations)
    logger.info("extracting phrases")
    table = build_phrase_table(pairs, alignments, fwd_table, rev_table, params.max_phrase_len)
    logger.info("phrase table: %d entries", len(table))
    lm = train_lm(corpus.targets, params.lm_order, params.unk_singletons)

    config = params.config
    weights = FeatureWeights()
    tune_bleu = None
    if params.tune and tune is not None and len(tune) > 0:
        tune_config = config
        if params.tune_beam_size is not None:
            tune_config = DecoderConfig(params.tune_beam_size, config.distortion_limit,
                                        config.max_phrase_len, config.ttable_limit)
        result = tune_weights(table, lm, tune, tune_config, seed=params.seed,
                              restarts=params.tune_restarts, max_sweeps=params.tune_sweeps)
        weights, tune_bleu = result.weights, result.bleu
        logger.info("tuned weights (tune BLEU %.2f after %d evaluations)", tune_bleu, result.evaluations)
    elif params.tune:
        warnings.warn("empty tune corpus: using default weights")

    manifest = {
        "version": __version__,
        "train_pairs": str(len(pairs)),
        "train_dropped": str(corpus.dropped),
        "train_source_sha256": corpus_checksum(corpus.sources),
        "train_target_sha256": corpus_checksum(corpus.targets),
        "tune_pairs": str(len(tune) if tune is not None else 0),
        "seed": str(params.seed),
        "align_iterations": str(params.align_iterations),
        "lm_order": str(params.lm_order),
        "tune_bleu": "" if tune_bleu is None else repr(tune_bleu),
    }
    if tune is not None:
        manifest["tune_source_sha256"] = corpus_checksum(tune.sources)
        manifest["tune_target_sha256"] = corpus_checksum(tune.targets)
    return ApeModel(table, lm, weights, config, manifest)


def apply_ape(model: ApeModel, mt_output) -> List[tuple]:
    """Post-edit each sentence; unknown tokens pass through unchanged."""
    return [decode(tuple(s), model.phrase_table, model.lm, model.weights, model.config).target for s in mt_output]


def split_corpus(items, fractions=(0.9, 0.05, 0.05)):
    """Contiguous train/tune/test split by the given fractions."""
    n = len(items)
    a = int(round(n * fractions[0]))
    b = a + int(round(n * fractions[1]))
    return items[:a], items[a:b], items[b:]
