"""Adversary side: recover typed words from an update, then reorder them into sentences.

Word recovery reads the sign of the output-bias shift ``d = b(theta0) - b(theta1)``.
Plain SGD gives ``d = lr * dJ/db`` for one step, negative exactly at the typed
words, so those are the indices kept.
Sentence reconstruction feeds each recovered word to ``theta1`` after ``<S>``
and extends greedily, restricted to the recovered words, then ranks the
candidates by their relative drop in log-perplexity from ``theta0`` to ``theta1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from nwpleak._validation import check_same_dims, check_scalar
from nwpleak.client import UpdatePair
from nwpleak.model import (
    ModelParams,
    initial_state,
    log_perplexities,
    log_perplexity,
    step,
)
from nwpleak.text import BOS_ID


@dataclass(frozen=True)
class RecoveredWords:
    """Token ids with a negative bias shift, ascending, with ``|d_i|``."""

    ids: np.ndarray
    magnitudes: np.ndarray

    def __post_init__(self):
        ids = np.asarray(self.ids, dtype=np.int64)
        mags = np.asarray(self.magnitudes, dtype=np.float64)
        if ids.shape != mags.shape or ids.ndim != 1:
            raise ValueError("ids and magnitudes must be 1-d and the same length")
        order = np.argsort(ids, kind="stable")
        ids, mags = ids[order], mags[order]
        if ids.size and np.any(np.diff(ids) == 0):
            raise ValueError("recovered ids must be distinct")
        if np.any(mags <= 0):
            raise ValueError("magnitudes must be positive")
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "magnitudes", mags)

    def __len__(self) -> int:
        return int(self.ids.size)

    def id_set(self) -> set[int]:
        return set(self.ids.tolist())


@dataclass(frozen=True)
class CandidateSentence:
    tokens: tuple[int, ...]
    score: float | None = None


def bias_difference(pair: UpdatePair) -> np.ndarray:
    """``b(theta0) - b(theta1)``: the accumulated step applied to the output bias."""
    check_same_dims(pair.theta0, pair.theta1)
    return pair.theta0.b - pair.theta1.b


def recover_words(pair: UpdatePair) -> RecoveredWords:
    d = bias_difference(pair)
    idx = np.flatnonzero(d < 0)
    return RecoveredWords(idx, -d[idx])


def auto_threshold(magnitudes: np.ndarray, min_ratio: float = 10.0) -> float:
    """Magnitude just above the widest gap between consecutive sorted log-magnitudes.

    The cut only applies when that gap spans at least a factor ``min_ratio``;
    otherwise the magnitudes are treated as one cluster and 0 is returned.
    With equally wide gaps the lowest one wins, so more words are kept.
    """
    check_scalar(min_ratio, "min_ratio", min_val=1)
    mags = np.sort(np.asarray(magnitudes, dtype=np.float64))[::-1]
    if mags.size < 2:
        return 0.0
    gaps = -np.diff(np.log(mags))
    if gaps.max() < np.log(min_ratio):
        return 0.0
    cut = np.flatnonzero(gaps == gaps.max())[-1]
    return float(mags[cut])


def filter_by_magnitude(words: RecoveredWords, threshold: float | str) -> RecoveredWords:
    """Drop entries below ``threshold``; ``"auto"`` picks it with :func:`auto_threshold`."""
    if isinstance(threshold, str):
        if threshold != "auto":
            raise ValueError(f"threshold must be a number or 'auto', got {threshold!r}")
        threshold = auto_threshold(words.magnitudes)
    check_scalar(threshold, "threshold", min_val=0)
    keep = words.magnitudes >= threshold
    return RecoveredWords(words.ids[keep], words.magnitudes[keep])


def scale_update(pair: UpdatePair, s: float) -> ModelParams:
    """``theta1 + s (theta1 - theta0)``; for FedSGD this multiplies the step by ``1 + s``."""
    check_scalar(s, "s")
    theta0, theta1 = pair
    return theta1 + s * (theta1 - theta0)


def constrained_distribution(logits: np.ndarray, allowed: np.ndarray) -> np.ndarray:
    """Softmax renormalised over ``allowed`` ids only, shape (..., len(allowed)).

    Equal to zeroing the full softmax outside ``allowed`` and renormalising,
    but computed from the logits so it never underflows to 0/0.
    """
    z = np.asarray(logits)[..., allowed]
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def generate_candidates(theta1: ModelParams, words: RecoveredWords, L: int = 4) -> list[CandidateSentence]:
    """One greedy sentence of ``L`` words per recovered word, seeded by that word.

    Ties in the constrained argmax go to the smallest token id.
    """
    check_scalar(L, "L", min_val=1, integer=True)
    allowed = words.ids
    if allowed.size == 0:
        raise ValueError("no recovered words to build sentences from")
    n = allowed.size
    state, _ = step(theta1, initial_state(theta1, n), np.full(n, BOS_ID))
    seqs = np.empty((n, L + 1), dtype=np.int64)
    seqs[:, 0] = BOS_ID
    seqs[:, 1] = allowed
    for k in range(2, L + 1):
        state, z = step(theta1, state, seqs[:, k - 1])
        dist = constrained_distribution(z, allowed)
        seqs[:, k] = allowed[np.argmax(dist, axis=1)]
    return [CandidateSentence(tuple(row.tolist())) for row in seqs]


def score_candidate(pair: UpdatePair, tokens: Sequence[int]) -> float:
    """Relative drop in log-perplexity from ``theta0`` to ``theta1``."""
    if len(tokens) < 2 or tokens[0] != BOS_ID:
        raise ValueError("candidate must be <S> followed by at least one word")
    pp0 = log_perplexity(pair.theta0, tokens)
    pp1 = log_perplexity(pair.theta1, tokens)
    return _relative_drop(pp0, pp1)


def _relative_drop(pp0: float, pp1: float) -> float:
    if abs(pp0) < 1e-12:
        return 0.0
    return (pp0 - pp1) / pp0


def score_candidates(pair: UpdatePair, candidates: Iterable[CandidateSentence]) -> list[CandidateSentence]:
    """Batched :func:`score_candidate` over many candidates."""
    check_same_dims(pair.theta0, pair.theta1)
    candidates = list(candidates)
    if not candidates:
        return []
    seqs = [c.tokens for c in candidates]
    pp0 = log_perplexities(pair.theta0, seqs)
    pp1 = log_perplexities(pair.theta1, seqs)
    return [CandidateSentence(c.tokens, _relative_drop(a, b)) for c, a, b in zip(candidates, pp0, pp1)]


def select_top(candidates: Iterable[CandidateSentence], n: int) -> list[CandidateSentence]:
    """Highest scores first; equal scores ordered by token ids."""
    check_scalar(n, "n", min_val=0, integer=True)
    ranked = sorted(candidates, key=lambda c: (-c.score, c.tokens))
    return ranked[:n]


def reconstruct_sentences(
    pair: UpdatePair,
    words: RecoveredWords,
    max_len: int = 4,
    top_n: int | None = None,
    scale: float = 0.0,
) -> list[CandidateSentence]:
    """Generate, score and rank candidates; ``scale`` amplifies the update first.

    The amplified model replaces ``theta1`` for both generation and scoring.
    ``top_n=None`` returns every candidate, ranked.
    """
    if scale:
        pair = UpdatePair(pair.theta0, scale_update(pair, scale))
    candidates = generate_candidates(pair.theta1, words, max_len)
    scored = score_candidates(pair, candidates)
    return select_top(scored, len(scored) if top_n is None else top_n)
