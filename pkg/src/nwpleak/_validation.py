"""Input validation helpers shared by the functional API and the estimators."""

from __future__ import annotations

import numbers

import numpy as np


def check_token_ids(ids, V: int) -> np.ndarray:
    ids = np.asarray(ids)
    if ids.size and not np.issubdtype(ids.dtype, np.integer):
        raise ValueError(f"token ids must be integers, got dtype {ids.dtype}")
    if ids.size and (ids.min() < 0 or ids.max() >= V):
        bad = ids[(ids < 0) | (ids >= V)].ravel()[0]
        raise ValueError(f"token id {bad} outside vocabulary of size {V}")
    return ids


def check_sentences(X, V: int | None = None, min_len: int = 2) -> list[np.ndarray]:
    """Coerce ``X`` to a list of 1-d int64 token arrays starting with ``<S>``."""
    if isinstance(X, np.ndarray) and X.ndim == 2:
        X = list(X)
    try:
        seqs = [np.asarray(s, dtype=np.int64) for s in X]
    except (TypeError, ValueError) as exc:
        raise ValueError(f"expected a sequence of token sequences: {exc}") from exc
    if not seqs:
        raise ValueError("dataset is empty")
    for k, s in enumerate(seqs):
        if s.ndim != 1 or s.size < min_len:
            raise ValueError(f"sentence {k} must be 1-d with at least {min_len} tokens")
        if s[0] != 0:
            raise ValueError(f"sentence {k} does not begin with <S>")
        if V is not None:
            check_token_ids(s, V)
    return seqs


def check_same_dims(a, b) -> None:
    if a.dims != b.dims:
        raise ValueError(f"parameter dims differ: {a.dims} vs {b.dims}")


def check_scalar(x, name: str, *, min_val=None, integer: bool = False):
    kinds = numbers.Integral if integer else numbers.Real
    if isinstance(x, bool) or not isinstance(x, kinds):
        raise TypeError(f"{name} must be {'an integer' if integer else 'a real number'}, got {x!r}")
    if not np.isfinite(x):
        raise ValueError(f"{name} must be finite, got {x!r}")
    if min_val is not None and x < min_val:
        raise ValueError(f"{name} must be >= {min_val}, got {x!r}")
    return x
