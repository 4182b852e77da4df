"""Command-line entry point: ``apekit <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .decoder import DecoderConfig
from .errata import DEFAULT_PARTICLES, format_profile_table, format_profile_tsv, load_particles, profile_row
from .mtmetrics import bleu_score, format_table, format_tsv, report_row, ribes_score
from .pipeline import ApeModel, TrainParams, apply_ape, split_corpus, train_ape
from .sigtest import paired_bootstrap
from .textio import CorpusFormatError, CorruptionSpec, corrupt, load_corpus, pair_corpora, write_corpus

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def read_config(path) -> dict:
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    values = {}
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _add_common(p, seed=False):
    p.add_argument("--config", help="key=value file; command-line flags win")
    p.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
    p.add_argument("--tsv", help="also write the report as TSV to this path")
    if seed:
        p.add_argument("--seed", type=int, help="random seed (required)")


def _add_decoder(p):
    p.add_argument("--beam-size", type=int, default=100)
    p.add_argument("--distortion-limit", type=int, default=6)
    p.add_argument("--max-phrase-len", type=int, default=8)
    p.add_argument("--ttable-limit", type=int, default=20)


def _add_train(p):
    _add_decoder(p)
    p.add_argument("--align-iterations", type=int, default=5)
    p.add_argument("--lm-order", type=int, default=5)
    p.add_argument("--no-tune", action="store_true")
    p.add_argument("--tune-restarts", type=int, default=3)
    p.add_argument("--tune-sweeps", type=int, default=2)
    p.add_argument("--tune-beam-size", type=int, default=10)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="apekit", description="Phrase-based automatic post-editing toolkit.")
    parser.add_argument("--version", action="version", version=f"apekit {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("train", help="train a post-editor from MT output and references")
    p.add_argument("--src", required=True, help="MT output (training source side)")
    p.add_argument("--ref", required=True, help="references (training target side)")
    p.add_argument("--tune-src")
    p.add_argument("--tune-ref")
    p.add_argument("--model", required=True, help="output bundle directory")
    _add_common(p, seed=True)
    _add_train(p)

    p = sub.add_parser("apply", help="post-edit MT output with a trained bundle")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    _add_common(p)

    for name, what in (("eval-bleu", "corpus BLEU"), ("eval-ribes", "corpus RIBES")):
        p = sub.add_parser(name, help=f"{what} of a hypothesis file")
        p.add_argument("--hyp", required=True)
        p.add_argument("--ref", required=True)
        _add_common(p)

    for name, what in (("analyze", "particle error profile"), ("maxbleu", "maximum reachable BLEU")):
        p = sub.add_parser(name, help=what)
        p.add_argument("--hyp", required=True, action="append", help="repeat for several systems")
        p.add_argument("--ref", required=True)
        p.add_argument("--particles", help="file with one particle per line")
        _add_common(p)

    p = sub.add_parser("sigtest", help="paired bootstrap test of system B over system A")
    p.add_argument("--hyp-a", required=True)
    p.add_argument("--hyp-b", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--metric", choices=("bleu", "ribes"), default="bleu")
    p.add_argument("--samples", type=int, default=1000)
    _add_common(p, seed=True)

    p = sub.add_parser("corrupt", help="simulate MT errors on references")
    p.add_argument("--refs", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--drop", type=float, default=0.3)
    p.add_argument("--swap", type=float, default=0.2)
    p.add_argument("--particles")
    _add_common(p, seed=True)

    p = sub.add_parser("pipeline", help="corrupt, train, apply, evaluate and analyze in one run")
    p.add_argument("--refs", required=True)
    p.add_argument("--drop", type=float, default=0.3)
    p.add_argument("--swap", type=float, default=0.2)
    p.add_argument("--particles")
    p.add_argument("--workdir", help="write the split corpora, outputs and model bundle here")
    _add_common(p, seed=True)
    _add_train(p)
    return parser


def parse_args(parser, argv):
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
        subparser = sub.choices[args.command]
        actions = {a.dest: a for a in subparser._actions}
        values = read_config(args.config)
        unknown = sorted(k for k in values if k not in actions or k in ("help", "config"))
        if unknown:
            raise UsageError(f"{args.config}: unknown key(s): {', '.join(unknown)}")
        subparser.set_defaults(**{k: _coerce(v, actions[k]) for k, v in values.items()})
        # config values are now defaults, so flags given on the command line still win
        args = parser.parse_args(argv)
    if hasattr(args, "seed") and args.seed is None:
        raise UsageError(f"apekit {args.command}: --seed is required")
    if getattr(args, "threads", 1) < 1:
        raise UsageError("--threads must be at least 1")
    return args


def _coerce(raw, action):
    if isinstance(action, argparse._StoreTrueAction):
        low = raw.lower()
        if low not in ("1", "0", "true", "false", "yes", "no"):
            raise UsageError(f"{action.dest}: not a boolean: {raw!r}")
        return low in ("1", "true", "yes")
    if isinstance(action, argparse._AppendAction):
        return [v.strip() for v in raw.split(",") if v.strip()]
    try:
        value = action.type(raw) if action.type else raw
    except ValueError:
        raise UsageError(f"{action.dest}: bad value {raw!r}") from None
    if action.choices is not None and value not in action.choices:
        raise UsageError(f"{action.dest}: {raw!r} is not one of {', '.join(action.choices)}")
    return value


def _particles(args):
    return load_particles(args.particles) if getattr(args, "particles", None) else DEFAULT_PARTICLES


def _decoder_config(args):
    return DecoderConfig(args.beam_size, args.distortion_limit, args.max_phrase_len, args.ttable_limit)


def _train_params(args):
    return TrainParams(
        align_iterations=args.align_iterations,
        max_phrase_len=args.max_phrase_len,
        lm_order=args.lm_order,
        tune=not args.no_tune,
        tune_restarts=args.tune_restarts,
        tune_sweeps=args.tune_sweeps,
        tune_beam_size=args.tune_beam_size,
        seed=args.seed,
        config=_decoder_config(args),
    )


def _emit(args, table, tsv):
    print(table)
    print()
    print(tsv)
    if getattr(args, "tsv", None):
        Path(args.tsv).write_text(tsv + "\n", encoding="utf-8")


def cmd_train(args):
    src, ref = load_corpus(args.src), load_corpus(args.ref)
    tune = None
    if args.tune_src or args.tune_ref:
        if not (args.tune_src and args.tune_ref):
            raise UsageError("--tune-src and --tune-ref go together")
        tune = pair_corpora(load_corpus(args.tune_src), load_corpus(args.tune_ref), roles=("tune-src", "tune-ref"))
    model = train_ape(src, ref, tune, _train_params(args))
    model.save(args.model)
    print(f"model written to {args.model} ({len(model.phrase_table)} phrase pairs)")


def cmd_apply(args):
    model = ApeModel.load(args.model)
    write_corpus(args.output, apply_ape(model, load_corpus(args.input)))


def _load_pair(hyp_path, ref_path):
    hyps, refs = load_corpus(hyp_path), load_corpus(ref_path)
    if len(hyps) != len(refs):
        raise ValueError(f"{hyp_path} has {len(hyps)} lines but {ref_path} has {len(refs)}")
    return hyps, refs


def cmd_eval(args):
    hyps, refs = _load_pair(args.hyp, args.ref)
    if args.command == "eval-bleu":
        rows = {args.hyp: report_row(hyps, refs)}
        _emit(args, format_table(rows), format_tsv(rows))
    else:
        score = ribes_score(hyps, refs)
        _emit(args, f"RIBES {score:.2f}", f"system\tRIBES\n{args.hyp}\t{score:.2f}")


def cmd_analyze(args):
    refs = load_corpus(args.ref)
    particles = _particles(args)
    rows = {}
    for path in args.hyp:
        hyps, _ = _load_pair(path, args.ref)
        rows[path] = profile_row(hyps, refs, particles)
    if args.command == "maxbleu":
        table = "\n".join(f"{k}\tBLEU {r['bleu']:.2f}\tMax BLEU {r['max_bleu']:.2f}" for k, r in rows.items())
        tsv = "system\tbleu\tmax_bleu\n" + "\n".join(f"{k}\t{r['bleu']:.2f}\t{r['max_bleu']:.2f}" for k, r in rows.items())
        _emit(args, table, tsv)
    else:
        _emit(args, format_profile_table(rows), format_profile_tsv(rows))


def cmd_sigtest(args):
    a, refs = _load_pair(args.hyp_a, args.ref)
    b, _ = _load_pair(args.hyp_b, args.ref)
    metric = bleu_score if args.metric == "bleu" else ribes_score
    result = paired_bootstrap(a, b, refs, metric, args.samples, args.seed, args.metric)
    _emit(args, result.verdict(), "metric\tp_value\tmean_delta\tB\tseed\n" + result.tsv())


def cmd_corrupt(args):
    refs = load_corpus(args.refs)
    spec = CorruptionSpec(args.drop, args.swap, args.seed)
    write_corpus(args.output, corrupt(refs, spec, _particles(args)))


def cmd_pipeline(args):
    refs = load_corpus(args.refs)
    particles = _particles(args)
    hyps = corrupt(refs, CorruptionSpec(args.drop, args.swap, args.seed), particles)
    tr_r, tu_r, te_r = split_corpus(refs)
    tr_h, tu_h, te_h = split_corpus(hyps)
    if not te_r:
        raise ValueError(f"{args.refs}: too few sentences for a 90/5/5 split")
    tune = pair_corpora(tu_h, tu_r, roles=("tune-src", "tune-ref"))
    model = train_ape(tr_h, tr_r, tune, _train_params(args))
    out = apply_ape(model, te_h)
    rows = {"corrupted": report_row(te_h, te_r), "post-edited": report_row(out, te_r)}
    prof = {"corrupted": profile_row(te_h, te_r, particles), "post-edited": profile_row(out, te_r, particles)}
    if args.workdir:
        wd = Path(args.workdir)
        wd.mkdir(parents=True, exist_ok=True)
        for name, data in (("train.src", tr_h), ("train.ref", tr_r), ("tune.src", tu_h), ("tune.ref", tu_r),
                           ("test.src", te_h), ("test.ref", te_r), ("test.ape", out)):
            write_corpus(wd / name, data)
        model.save(wd / "model")
        (wd / "scores.tsv").write_text(format_tsv(rows) + "\n", encoding="utf-8")
        (wd / "errors.tsv").write_text(format_profile_tsv(prof) + "\n", encoding="utf-8")
    _emit(args, format_table(rows), format_tsv(rows))
    print()
    print(format_profile_table(prof))
    print()
    print(format_profile_tsv(prof))


COMMANDS = {
    "train": cmd_train,
    "apply": cmd_apply,
    "eval-bleu": cmd_eval,
    "eval-ribes": cmd_eval,
    "analyze": cmd_analyze,
    "maxbleu": cmd_analyze,
    "sigtest": cmd_sigtest,
    "corrupt": cmd_corrupt,
    "pipeline": cmd_pipeline,
}


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parse_args(parser, argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        # --help and --version
        return EXIT_OK if not e.code else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        COMMANDS[args.command](args)
    except UsageError as e:
        print(f"apekit {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except CorpusFormatError as e:
        print(f"apekit {args.command}: {e}", file=sys.stderr)
        return EXIT_DATA
    except (OSError, ValueError) as e:
        print(f"apekit {args.command}: {e}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
