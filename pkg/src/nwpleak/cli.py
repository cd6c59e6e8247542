"""Command-line entry point: ``nwpleak <subcommand> [options]``.

Subcommands
    make-corpus    write a synthetic one-sentence-per-line corpus
    build-vocab    corpus -> vocab.txt
    pretrain       corpus + vocab -> theta0.nwpm
    client-update  theta0 + client sentences -> theta1.nwpm
    attack         theta0 + theta1 -> recovered words and ranked sentences
    evaluate       reconstruction file vs ground-truth file -> F1 and Levenshtein ratio
    experiment     run a config grid -> results.csv and plot data
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from nwpleak import model_file
from nwpleak.attack import filter_by_magnitude, reconstruct_sentences, recover_words
from nwpleak.client import NOISE_MODES, FLConfig, NoiseConfig, UpdatePair, run_update
from nwpleak.corpus import synthetic_corpus
from nwpleak.harness import (
    ConfigError,
    config_from_dict,
    load_config,
    load_corpus_lines,
    parse_config_text,
    pretrain,
    run_experiment,
)
from nwpleak.metrics import reconstruction_report, word_f1
from nwpleak.model import ModelDims
from nwpleak.text import Vocabulary, build_vocabulary, read_corpus, split_words, tokenize_corpus

log = logging.getLogger("nwpleak")

# config keys that double as defaults for the single-step subcommands
_CONFIG_DEFAULTS = {
    "corpus": "corpus", "vocab_size": "size", "dim": "dim", "hidden": "hidden",
    "pretrain_epochs": "epochs", "pretrain_lr": "lr", "pretrain_batch": "batch",
    "max_len": "max_len", "top": "top",
}


def _threshold(text):
    if text == "auto":
        return text
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'auto', got {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError("threshold must be >= 0")
    return v


def _batch(text):
    return text if text == "full" else int(text)


def _globals(suppress: bool) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    p.add_argument("--seed", type=int, help="master seed (default 0)", **({"default": 0} if not suppress else kw))
    p.add_argument("--out-dir", help="output directory (default .)", **({"default": "."} if not suppress else kw))
    p.add_argument("--config", help="key = value config file", **({"default": None} if not suppress else kw))
    p.add_argument("-v", "--verbose", action="store_true", **kw)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nwpleak", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter,
        parents=[_globals(False)],
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = [_globals(True)]

    p = sub.add_parser("make-corpus", parents=common, help="synthetic corpus")
    p.add_argument("-n", type=int, default=10000, help="number of sentences")
    p.add_argument("--output", default="corpus.txt", help="file name inside --out-dir")

    p = sub.add_parser("build-vocab", parents=common, help="corpus -> vocab.txt")
    p.add_argument("--corpus")
    p.add_argument("--size", type=int, help="vocabulary size V (default 2000)")

    p = sub.add_parser("pretrain", parents=common, help="train theta0")
    p.add_argument("--corpus")
    p.add_argument("--vocab", required=True)
    p.add_argument("--dim", type=int, help="D (default 32)")
    p.add_argument("--hidden", type=int, help="H (default 64)")
    p.add_argument("--epochs", type=int, help="default 20")
    p.add_argument("--lr", type=float, help="default 0.5")
    p.add_argument("--batch", type=int, help="default 32")

    p = sub.add_parser("client-update", parents=common, help="theta0 + sentences -> theta1")
    p.add_argument("--model", required=True, help="theta0 model file")
    p.add_argument("--vocab", required=True)
    p.add_argument("--data", required=True, help="client sentences, one per line")
    p.add_argument("--epochs", "-E", type=int, default=1)
    p.add_argument("--batch", "-B", type=_batch, default="full", help="mini-batch size or 'full'")
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--noise", choices=NOISE_MODES, default="none")
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--output", default="theta1.nwpm", help="file name inside --out-dir")

    p = sub.add_parser("attack", parents=common, help="recover words and sentences")
    p.add_argument("--theta0", required=True)
    p.add_argument("--theta1", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--threshold", type=_threshold, default=0.0, help="magnitude cut, number or 'auto'")
    p.add_argument("--scale", type=float, default=0.0, help="update amplification s")
    p.add_argument("--max-len", type=int, help="sentence length L (default 4)")
    p.add_argument("--top", type=int, help="sentences to keep (default: number of recovered words)")
    p.add_argument("--output", default="reconstruction.txt", help="file name inside --out-dir")

    p = sub.add_parser("evaluate", parents=common, help="score a reconstruction")
    p.add_argument("--reconstruction", required=True)
    p.add_argument("--truth", required=True)

    sub.add_parser("experiment", parents=common, help="run a config grid")
    return parser


def _apply_config(args):
    if not args.config:
        return
    values = parse_config_text(Path(args.config).read_text(encoding="utf-8"))
    for key, dest in _CONFIG_DEFAULTS.items():
        if key in values and getattr(args, dest, "missing") is None:
            setattr(args, dest, values[key])
    # validate the whole file even though only a few keys are used here
    values.setdefault("corpus", "unused")
    config_from_dict(values)


def _default(args, name, value):
    if getattr(args, name, None) is None:
        setattr(args, name, value)


def _out(args, name) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out / name


def cmd_make_corpus(args):
    path = _out(args, args.output)
    path.write_text("\n".join(synthetic_corpus(args.n, args.seed)) + "\n", encoding="utf-8")
    print(path)


def cmd_build_vocab(args):
    _default(args, "size", 2000)
    if args.corpus is None:
        raise ValueError("--corpus is required")
    vocab = build_vocabulary(load_corpus_lines(args.corpus, args.seed), args.size)
    path = _out(args, "vocab.txt")
    vocab.save(path)
    print(f"{path} ({vocab.size} tokens)")


def cmd_pretrain(args):
    for name, value in (("dim", 32), ("hidden", 64), ("epochs", 20), ("lr", 0.5), ("batch", 32)):
        _default(args, name, value)
    if args.corpus is None:
        raise ValueError("--corpus is required")
    vocab = Vocabulary.load(args.vocab)
    seqs = tokenize_corpus(load_corpus_lines(args.corpus, args.seed), vocab)
    theta0 = pretrain(seqs, ModelDims(vocab.size, args.dim, args.hidden), args.epochs, args.lr, args.seed, args.batch)
    path = _out(args, "theta0.nwpm")
    model_file.save(theta0, path)
    print(path)


def cmd_client_update(args):
    theta0 = model_file.load(args.model)
    vocab = Vocabulary.load(args.vocab)
    if vocab.size != theta0.dims.V:
        raise ValueError(f"vocabulary has {vocab.size} tokens, model expects {theta0.dims.V}")
    seqs = tokenize_corpus(read_corpus(args.data), vocab)
    if not seqs:
        raise ValueError(f"{args.data} holds no sentences")
    batch = len(seqs) if args.batch == "full" else args.batch
    pair = run_update(theta0, seqs, FLConfig(args.epochs, batch, args.lr),
                      NoiseConfig(args.noise, args.sigma, args.seed))
    path = _out(args, args.output)
    model_file.save(pair.theta1, path)
    print(path)


def cmd_attack(args):
    _default(args, "max_len", 4)
    pair = UpdatePair(model_file.load(args.theta0), model_file.load(args.theta1))
    vocab = Vocabulary.load(args.vocab)
    if vocab.size != pair.theta0.dims.V:
        raise ValueError(f"vocabulary has {vocab.size} tokens, model expects {pair.theta0.dims.V}")
    words = recover_words(pair)
    if args.threshold != 0:
        words = filter_by_magnitude(words, args.threshold)
    print(f"recovered {len(words)} words:")
    for i, m in zip(words.ids, words.magnitudes):
        print(f"  {vocab.word_of(int(i))}\t{m:.6g}")
    lines = []
    if len(words):
        top = len(words) if args.top is None else args.top
        for c in reconstruct_sentences(pair, words, args.max_len, top, args.scale):
            lines.append(" ".join(vocab.word_of(t) for t in c.tokens[1:]))
            print(f"{c.score:.6f}\t{lines[-1]}")
    _out(args, args.output).write_text("".join(ln + "\n" for ln in lines), encoding="utf-8")


def cmd_evaluate(args):
    cands = [split_words(s) for s in read_corpus(args.reconstruction)]
    truth = [split_words(s) for s in read_corpus(args.truth)]
    rep = word_f1({w for s in cands for w in s}, {w for s in truth for w in s})
    ratio = reconstruction_report(cands, truth).mean_ratio
    print(f"precision {rep.precision:.4f} recall {rep.recall:.4f} f1 {rep.f1:.4f}")
    print(f"mean_lev_ratio {ratio:.4f}")


def cmd_experiment(args):
    if not args.config:
        raise ValueError("experiment needs --config")
    overrides = {}
    if args.seed_given:
        overrides["seed"] = args.seed
    if args.out_dir_given:
        overrides["out_dir"] = args.out_dir
    print(run_experiment(load_config(args.config, **overrides)))


COMMANDS = {
    "make-corpus": cmd_make_corpus,
    "build-vocab": cmd_build_vocab,
    "pretrain": cmd_pretrain,
    "client-update": cmd_client_update,
    "attack": cmd_attack,
    "evaluate": cmd_evaluate,
    "experiment": cmd_experiment,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    args.seed_given = any(a == "--seed" or a.startswith("--seed=") for a in argv)
    args.out_dir_given = any(a == "--out-dir" or a.startswith("--out-dir=") for a in argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command != "experiment":
            _apply_config(args)
        COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"nwpleak: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"nwpleak: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
