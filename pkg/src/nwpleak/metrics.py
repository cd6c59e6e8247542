"""Attack quality: word-set F1 and word-level Levenshtein ratio."""

from __future__ import annotations

from typing import Iterable, NamedTuple, Sequence

import numpy as np

from nwpleak.text import BOS_ID


class F1Report(NamedTuple):
    precision: float
    recall: float
    f1: float


class ReconstructionReport(NamedTuple):
    best_ratios: tuple[float, ...]
    mean_ratio: float


def word_f1(recovered: Iterable, truth: Iterable) -> F1Report:
    """Set precision/recall/F1; works on word strings or token ids alike."""
    rec, tru = set(recovered), set(truth)
    hit = len(rec & tru)
    p = hit / len(rec) if rec else 0.0
    r = hit / len(tru) if tru else 0.0
    f = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return F1Report(p, r, f)


def edit_distance(a: Sequence, b: Sequence) -> int:
    """Word-level Levenshtein distance with unit insert/delete/substitute costs."""
    a, b = list(a), list(b)
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, wa in enumerate(a, 1):
        cur = [i]
        for j, wb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (wa != wb)))
        prev = cur
    return prev[-1]


def levenshtein_ratio(a: Sequence, b: Sequence) -> float:
    """``100 * (1 - distance / max(len(a), len(b)))``; 100 when both are empty."""
    n = max(len(a), len(b))
    if n == 0:
        return 100.0
    return 100.0 * (1.0 - edit_distance(a, b) / n)


def _words(tokens: Sequence) -> tuple:
    seq = tuple(int(t) if isinstance(t, (int, np.integer)) else t for t in tokens)
    if seq and seq[0] in (BOS_ID, "<S>"):
        seq = seq[1:]
    return seq


def reconstruction_report(selected, ground_truth) -> ReconstructionReport:
    """Best ratio of every ground-truth sentence against any selected candidate.

    Both sides may be token-id sequences (a leading ``<S>`` is dropped) or
    candidate objects with a ``tokens`` attribute. Comparing ids treats every
    out-of-vocabulary word as the same ``<UNK>`` word.
    """
    cands = [_words(getattr(c, "tokens", c)) for c in selected]
    truths = [_words(s) for s in ground_truth]
    best = tuple(max((levenshtein_ratio(t, c) for c in cands), default=0.0) for t in truths)
    mean = float(np.mean(best)) if best else 0.0
    return ReconstructionReport(best, mean)
