"""Corpus ingestion, vocabulary construction and training-example generation."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

BOS = "<S>"
UNK = "<UNK>"
BOS_ID = 0
UNK_ID = 1


def split_words(sentence: str) -> list[str]:
    """Lowercase and split on whitespace. Punctuation is left attached."""
    return sentence.lower().split()


@dataclass(frozen=True)
class Vocabulary:
    """Ordered token list; a token's position is its id.

    Ids 0 and 1 are always ``<S>`` and ``<UNK>``.
    """

    tokens: tuple[str, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        tokens = tuple(self.tokens)
        if len(tokens) < 2 or tokens[BOS_ID] != BOS or tokens[UNK_ID] != UNK:
            raise ValueError("vocabulary must start with <S>, <UNK>")
        index = {tok: i for i, tok in enumerate(tokens)}
        if len(index) != len(tokens):
            raise ValueError("vocabulary tokens must be unique")
        object.__setattr__(self, "tokens", tokens)
        object.__setattr__(self, "_index", index)

    @property
    def size(self) -> int:
        return len(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, word: str) -> bool:
        return word in self._index

    def id_of(self, word: str) -> int:
        return self._index.get(word, UNK_ID)

    def word_of(self, token_id: int) -> str:
        return self.tokens[token_id]

    def save(self, path) -> None:
        Path(path).write_text("".join(t + "\n" for t in self.tokens), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        text = Path(path).read_text(encoding="utf-8")
        return cls(tuple(text.splitlines()))


def build_vocabulary(corpus: Iterable[str], V: int) -> Vocabulary:
    """Keep the ``V - 2`` most frequent corpus words after the reserved tokens.

    Frequency ties are broken by ascending lexicographic order so the result
    depends only on the multiset of words.
    """
    if V < 2:
        raise ValueError(f"V must be >= 2, got {V}")
    counts = Counter()
    for line in corpus:
        counts.update(split_words(line))
    for reserved in (BOS, UNK):
        counts.pop(reserved, None)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    words = [w for w, _ in ranked[: V - 2]]
    return Vocabulary((BOS, UNK, *words))


def tokenize(sentence: str, vocab: Vocabulary) -> np.ndarray:
    """Map a sentence to ids with ``<S>`` prepended; unknown words become ``<UNK>``."""
    ids = [BOS_ID] + [vocab.id_of(w) for w in split_words(sentence)]
    return np.asarray(ids, dtype=np.int64)


def detokenize(tokens: Sequence[int], vocab: Vocabulary) -> str:
    """Inverse of :func:`tokenize`, dropping a leading ``<S>``."""
    ids = list(tokens)
    if ids and ids[0] == BOS_ID:
        ids = ids[1:]
    return " ".join(vocab.word_of(int(i)) for i in ids)


class TrainingExample(NamedTuple):
    prefix: tuple[int, ...]
    label: int


def sentence_to_examples(tokens: Sequence[int]) -> list[TrainingExample]:
    """A sentence of T words after ``<S>`` yields T (prefix, next word) pairs."""
    ids = tuple(int(t) for t in tokens)
    if not ids or ids[0] != BOS_ID:
        raise ValueError("token sequence must begin with <S>")
    return [TrainingExample(ids[:t], ids[t]) for t in range(1, len(ids))]


def dataset_to_examples(sentences: Iterable[Sequence[int]]) -> list[TrainingExample]:
    examples = []
    for s in sentences:
        examples.extend(sentence_to_examples(s))
    return examples


def read_corpus(path) -> list[str]:
    """One sentence per line; blank lines are skipped."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ValueError(f"cannot read corpus {path}: {exc}") from exc
    return [line for line in text.splitlines() if line.strip()]


def tokenize_corpus(lines: Iterable[str], vocab: Vocabulary, min_words: int = 1) -> list[np.ndarray]:
    """Tokenize every line holding at least ``min_words`` words."""
    out = []
    for line in lines:
        seq = tokenize(line, vocab)
        if len(seq) - 1 >= min_words:
            out.append(seq)
    return out
