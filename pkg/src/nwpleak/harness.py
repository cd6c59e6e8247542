"""Experiment grids: pretrain a global model, simulate clients, attack, score.

Config files are flat ``key = value`` lines. ``#`` starts a comment. A value
is an integer, a float, a bare word (``auto``, ``none``, ``full``), a
double-quoted string, or a bracketed comma-separated list of those, e.g.::

    corpus = "data/sms.txt"
    n_k = [16, 64]
    threshold = [0, auto]

Grid keys accept a list or a single value; every other key takes a scalar.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import itertools
import logging
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from nwpleak import model_file
from nwpleak.attack import filter_by_magnitude, reconstruct_sentences, recover_words
from nwpleak.client import NOISE_MODES, FLConfig, NoiseConfig, client_update, run_update
from nwpleak.corpus import synthetic_corpus
from nwpleak.metrics import reconstruction_report, word_f1
from nwpleak.model import ModelDims, ModelParams, init_params
from nwpleak.text import Vocabulary, build_vocabulary, read_corpus, split_words, tokenize, tokenize_corpus

log = logging.getLogger(__name__)

RESULT_FIELDS = [
    "run_id", "n_k", "E", "B", "eta", "sigma", "noise_mode", "threshold", "scale", "seed",
    "precision", "recall", "f1", "mean_lev_ratio", "status", "ms",
]
GRID_KEYS = ("n_k", "E", "B", "eta", "sigma", "noise_mode", "threshold", "scale")


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"config field '{field_name}': {message}")
        self.field = field_name


@dataclass
class ExperimentConfig:
    corpus: str
    vocab_size: int = 2000
    dim: int = 32
    hidden: int = 64
    pretrain_epochs: int = 20
    pretrain_lr: float = 0.5
    pretrain_batch: int = 32
    sentence_words: int = 4
    n_k: list = field(default_factory=lambda: [16])
    E: list = field(default_factory=lambda: [1])
    B: list = field(default_factory=lambda: ["full"])
    eta: list = field(default_factory=lambda: [0.001])
    sigma: list = field(default_factory=lambda: [0.0])
    noise_mode: list = field(default_factory=lambda: ["none"])
    threshold: list = field(default_factory=lambda: [0])
    scale: list = field(default_factory=lambda: [0])
    max_len: int = 4
    top: int | None = None
    trials: int = 5
    seed: int = 0
    out_dir: str = "results"
    workers: int = 1
    record_ms: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self):
        for name in ("vocab_size", "dim", "hidden", "pretrain_batch", "max_len", "trials", "workers"):
            _require_int(self, name, 1 if name != "vocab_size" else 2)
        for name in ("pretrain_epochs", "sentence_words", "seed"):
            _require_int(self, name, 0)
        if not isinstance(self.pretrain_lr, (int, float)) or self.pretrain_lr < 0:
            raise ConfigError("pretrain_lr", f"expected a number >= 0, got {self.pretrain_lr!r}")
        if self.top is not None and (not isinstance(self.top, int) or self.top < 0):
            raise ConfigError("top", f"expected an integer >= 0, got {self.top!r}")
        for key in GRID_KEYS:
            values = getattr(self, key)
            if not isinstance(values, list):
                values = [values]
                setattr(self, key, values)
            if not values:
                raise ConfigError(key, "grid list is empty")
            for v in values:
                _check_grid_value(key, v)

    def cells(self) -> list[dict]:
        grids = [getattr(self, k) for k in GRID_KEYS]
        return [dict(zip(GRID_KEYS, combo)) for combo in itertools.product(*grids)]


def _require_int(cfg, name, minimum):
    v = getattr(cfg, name)
    if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
        raise ConfigError(name, f"expected an integer >= {minimum}, got {v!r}")


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _check_grid_value(key, v):
    if key in ("n_k", "E"):
        ok = isinstance(v, int) and not isinstance(v, bool) and v >= 1
    elif key == "B":
        ok = v == "full" or (isinstance(v, int) and not isinstance(v, bool) and v >= 1)
    elif key == "noise_mode":
        ok = v in NOISE_MODES
    elif key == "threshold":
        ok = v == "auto" or (_is_number(v) and v >= 0)
    elif key == "scale":
        ok = _is_number(v)
    else:
        ok = _is_number(v) and v >= 0
    if not ok:
        raise ConfigError(key, f"invalid value {v!r}")


def _parse_scalar(text: str):
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] == '"':
        return text[1:-1]
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    if not text or any(c in text for c in '[],="'):
        raise ValueError(f"cannot parse value {text!r}")
    return text


def parse_config_text(text: str) -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key.isidentifier():
            raise ConfigError(key or f"line {lineno}", "invalid key")
        try:
            if value.startswith("["):
                if not value.endswith("]"):
                    raise ValueError("unterminated list")
                inner = value[1:-1].strip()
                values[key] = [_parse_scalar(v) for v in inner.split(",")] if inner else []
            else:
                values[key] = _parse_scalar(value)
        except ValueError as exc:
            raise ConfigError(key, str(exc)) from exc
    return values


def config_from_dict(values: dict) -> ExperimentConfig:
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    for key in values:
        if key not in known:
            raise ConfigError(key, "unknown field")
    if "corpus" not in values:
        raise ConfigError("corpus", "required field missing")
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError("config", str(exc)) from exc


def load_config(path, **overrides) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from exc
    values = parse_config_text(text)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return config_from_dict(values)


def load_corpus_lines(source: str, seed: int = 0) -> list[str]:
    """A file path, or ``synthetic:N`` for the built-in generator."""
    if source.startswith("synthetic:"):
        return synthetic_corpus(int(source.split(":", 1)[1]), seed)
    lines = read_corpus(source)
    if not lines:
        raise ValueError(f"corpus {source} is empty")
    return lines


def split_corpus(lines: list[str], seed: int, frac: float = 0.8):
    """Seeded disjoint (pretraining, client pool) split."""
    perm = np.random.default_rng(seed).permutation(len(lines))
    cut = int(round(frac * len(lines)))
    return [lines[i] for i in perm[:cut]], [lines[i] for i in perm[cut:]]


def pretrain(seqs, dims: ModelDims, epochs: int, lr: float, seed: int, batch_size: int = 32) -> ModelParams:
    """Stand-in global model: a fresh initialisation trained on ``seqs``."""
    theta = init_params(dims, seed)
    if epochs == 0:
        return theta
    if not seqs:
        raise ValueError("pretraining corpus is empty")

    def report(epoch, total):
        log.info("pretrain epoch %d loss %.4f", epoch + 1, total / max(1, len(seqs)))

    return client_update(theta, seqs, FLConfig(epochs, batch_size, lr), on_epoch=report)


def cell_seed(master: int, cell: dict, trial: int) -> int:
    """Seed depending only on the cell's values and the trial index."""
    key = ",".join(f"{k}={cell[k]!r}" for k in GRID_KEYS)
    seq = np.random.SeedSequence(entropy=master, spawn_key=(zlib.crc32(key.encode()), trial))
    return int(seq.generate_state(1, dtype=np.uint32)[0])


@dataclass
class _Task:
    run_id: str
    cell: dict
    trial: int
    seed: int


def _run_cell(task: _Task, ctx: dict) -> tuple[dict, dict]:
    cell, seed = task.cell, task.seed
    row = {"run_id": task.run_id, **{k: cell[k] for k in GRID_KEYS}, "seed": seed}
    extra = {"token_f1": 0.0}
    t0 = time.perf_counter()
    try:
        pool_lines, pool_seqs = ctx["pool_lines"], ctx["pool_seqs"]
        n_k = cell["n_k"]
        if len(pool_seqs) < n_k:
            raise ValueError(f"client pool holds {len(pool_seqs)} sentences, need {n_k}")
        rng = np.random.default_rng(seed)
        idx = np.sort(rng.choice(len(pool_seqs), size=n_k, replace=False))
        data = [pool_seqs[i] for i in idx]
        B = n_k if cell["B"] == "full" else cell["B"]
        pair = run_update(
            ctx["theta0"], data, FLConfig(cell["E"], B, float(cell["eta"])),
            NoiseConfig(cell["noise_mode"], float(cell["sigma"]), seed),
        )
        words = recover_words(pair)
        if cell["threshold"] != 0:
            words = filter_by_magnitude(words, cell["threshold"])
        vocab: Vocabulary = ctx["vocab"]
        truth_words = {w for i in idx for w in split_words(pool_lines[i])}
        rep = word_f1({vocab.word_of(int(i)) for i in words.ids}, truth_words)
        ratio = 0.0
        if len(words):
            top_n = ctx["top"] if ctx["top"] is not None else n_k
            top = reconstruct_sentences(pair, words, ctx["max_len"], top_n, float(cell["scale"]))
            ratio = reconstruction_report(top, data).mean_ratio
            used = {t for c in top for t in c.tokens[1:]}
            extra["token_f1"] = word_f1(used, {int(t) for s in data for t in s[1:]}).f1
        row.update(precision=rep.precision, recall=rep.recall, f1=rep.f1, mean_lev_ratio=ratio, status="ok")
    except Exception as exc:  # a failed cell is reported, the grid continues
        log.warning("cell %s failed: %s", task.run_id, exc)
        row.update(precision=0.0, recall=0.0, f1=0.0, mean_lev_ratio=0.0, status=f"error: {exc}")
    row["ms"] = int(round(1000 * (time.perf_counter() - t0))) if ctx["record_ms"] else 0
    return row, extra


_WORKER_CTX: dict = {}


def _init_worker(ctx):
    _WORKER_CTX.update(ctx)


def _run_in_worker(task):
    return _run_cell(task, _WORKER_CTX)


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(path: Path, header: list[str], rows: list[dict]):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(r[h]) for h in header])
    path.write_text(buf.getvalue(), encoding="utf-8")


def _mean_by(rows, keys, value):
    groups: dict[tuple, list[float]] = {}
    for r in rows:
        if r["status"] == "ok":
            groups.setdefault(tuple(r[k] for k in keys), []).append(r[value])
    return [
        {**dict(zip(keys, k)), f"mean_{value}": float(np.mean(v)), "trials": len(v)}
        for k, v in groups.items()
    ]


def _sort_key(v):
    return (0, v, "") if _is_number(v) else (1, 0, str(v))


def write_plot_data(out: Path, rows: list[dict], extras: list[dict]):
    base = ["noise_mode", "sigma", "threshold", "scale", "eta", "B"]
    epochs = _mean_by(rows, base + ["n_k", "E"], "f1")
    epochs.sort(key=lambda r: tuple(_sort_key(r[k]) for k in base + ["n_k", "E"]))
    _write_csv(out / "fig_f1_vs_epochs.csv", base + ["n_k", "E", "mean_f1", "trials"], epochs)
    nk = _mean_by(rows, base + ["E", "n_k"], "f1")
    nk.sort(key=lambda r: tuple(_sort_key(r[k]) for k in base + ["E", "n_k"]))
    _write_csv(out / "fig_f1_vs_nk.csv", base + ["E", "n_k", "mean_f1", "trials"], nk)
    scatter = [
        {"run_id": r["run_id"], "n_k": r["n_k"], "E": r["E"], "noise_mode": r["noise_mode"],
         "sigma": r["sigma"], "token_f1": x["token_f1"], "mean_lev_ratio": r["mean_lev_ratio"]}
        for r, x in zip(rows, extras) if r["status"] == "ok"
    ]
    _write_csv(out / "fig_ratio_vs_f1.csv",
               ["run_id", "n_k", "E", "noise_mode", "sigma", "token_f1", "mean_lev_ratio"], scatter)


def prepare_global_model(cfg: ExperimentConfig):
    """Vocabulary, pretrained ``theta0`` and the tokenised client pool."""
    lines = load_corpus_lines(cfg.corpus, cfg.seed)
    pre_lines, pool_lines = split_corpus(lines, cfg.seed)
    vocab = build_vocabulary(pre_lines, cfg.vocab_size)
    dims = ModelDims(vocab.size, cfg.dim, cfg.hidden)
    theta0 = pretrain(tokenize_corpus(pre_lines, vocab), dims, cfg.pretrain_epochs,
                      cfg.pretrain_lr, cfg.seed, cfg.pretrain_batch)
    keep = [ln for ln in pool_lines
            if cfg.sentence_words == 0 or len(split_words(ln)) == cfg.sentence_words]
    if not keep:
        raise ValueError("client pool is empty after the sentence-length filter")
    return vocab, theta0, keep, [tokenize(ln, vocab) for ln in keep]


def run_experiment(cfg: ExperimentConfig) -> Path:
    """Run every grid cell and trial; writes results.csv and plot-data CSVs."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    vocab, theta0, pool_lines, pool_seqs = prepare_global_model(cfg)
    vocab.save(out / "vocab.txt")
    model_file.save(theta0, out / "theta0.nwpm")

    tasks = []
    for cell in cfg.cells():
        for trial in range(cfg.trials):
            tasks.append(_Task(f"{len(tasks):05d}", cell, trial, cell_seed(cfg.seed, cell, trial)))
    ctx = {
        "theta0": theta0, "vocab": vocab, "pool_lines": pool_lines, "pool_seqs": pool_seqs,
        "top": cfg.top, "max_len": cfg.max_len, "record_ms": cfg.record_ms,
    }
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers, initializer=_init_worker, initargs=(ctx,)) as ex:
            results = list(ex.map(_run_in_worker, tasks))
    else:
        results = [_run_cell(t, ctx) for t in tasks]
    rows = [r for r, _ in results]
    extras = [x for _, x in results]
    _write_csv(out / "results.csv", RESULT_FIELDS, rows)
    write_plot_data(out, rows, extras)
    return out / "results.csv"
