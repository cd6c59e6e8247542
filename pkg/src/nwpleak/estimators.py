"""scikit-learn style wrappers around the functional API.

``X`` is always a list of sentences: raw strings for :class:`VocabularyTransformer`,
token-id sequences starting with ``<S>`` everywhere else.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from nwpleak._validation import check_same_dims, check_sentences
from nwpleak.attack import filter_by_magnitude, reconstruct_sentences, recover_words
from nwpleak.client import FLConfig, NoiseConfig, UpdatePair, client_update, run_update
from nwpleak.model import (
    ModelDims,
    ModelParams,
    forward,
    init_params,
    log_perplexities,
)
from nwpleak.text import build_vocabulary, detokenize, tokenize


class VocabularyTransformer(TransformerMixin, BaseEstimator):
    """Learn a vocabulary from raw sentences and map sentences to token ids."""

    def __init__(self, size=2000):
        self.size = size

    def fit(self, X, y=None):
        self.vocabulary_ = build_vocabulary(X, self.size)
        return self

    def transform(self, X):
        check_is_fitted(self, "vocabulary_")
        return [tokenize(s, self.vocabulary_) for s in X]

    def inverse_transform(self, X):
        check_is_fitted(self, "vocabulary_")
        return [detokenize(s, self.vocabulary_) for s in X]


class NextWordModel(BaseEstimator):
    """CIFG-LSTM language model trained by mini-batch SGD.

    Parameters
    ----------
    vocab_size : int
        Output dimension ``V``. Inferred from the data when ``None``.
    embedding_dim, hidden_dim : int
        ``D`` (tied embedding and projection size) and ``H`` (cell size).
    epochs, batch_size, learning_rate : training schedule, as for a client update.
    init : ModelParams or None
        Starting point; a fresh Glorot initialisation seeded by
        ``random_state`` when ``None``.
    random_state : int
    """

    def __init__(
        self,
        vocab_size=None,
        embedding_dim=32,
        hidden_dim=64,
        epochs=10,
        batch_size=32,
        learning_rate=0.5,
        init=None,
        random_state=0,
    ):
        self.vocab_size = vocab_size
        self.embedding_dim = embedding_dim
        self.hidden_dim = hidden_dim
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.init = init
        self.random_state = random_state

    def _start(self, seqs):
        if self.init is not None:
            return self.init
        V = self.vocab_size or int(max(s.max() for s in seqs)) + 1
        return init_params(ModelDims(V, self.embedding_dim, self.hidden_dim), self.random_state)

    def fit(self, X, y=None):
        seqs = check_sentences(X, self.vocab_size)
        start = self._start(seqs)
        self.loss_curve_ = []
        if self.epochs == 0:
            self.params_ = start
        else:
            cfg = FLConfig(self.epochs, self.batch_size, self.learning_rate)
            self.params_ = client_update(start, seqs, cfg, on_epoch=lambda _, v: self.loss_curve_.append(v))
        self.n_features_in_ = self.params_.dims.V
        return self

    def predict_proba(self, X):
        """Next-word distribution for each prefix, shape (n_prefixes, V)."""
        check_is_fitted(self, "params_")
        return np.stack([forward(self.params_, p) for p in X])

    def predict(self, X):
        return self.predict_proba(X).argmax(axis=1)

    def log_perplexity(self, X):
        check_is_fitted(self, "params_")
        return log_perplexities(self.params_, check_sentences(X, self.params_.dims.V))

    def score(self, X, y=None):
        """Negative mean per-token log-perplexity (higher is better)."""
        seqs = check_sentences(X)
        n_tokens = sum(len(s) - 1 for s in seqs)
        return -float(self.log_perplexity(seqs).sum()) / n_tokens


class ClientUpdate(BaseEstimator):
    """A federated client training from a fixed global model ``theta0``.

    ``fit(X)`` runs the local update on the client's sentences and exposes
    ``theta1_`` and the adversary's view ``update_pair_``.
    """

    def __init__(
        self,
        theta0=None,
        epochs=1,
        batch_size=16,
        learning_rate=0.001,
        noise="none",
        sigma=0.0,
        random_state=0,
    ):
        self.theta0 = theta0
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.noise = noise
        self.sigma = sigma
        self.random_state = random_state

    def fit(self, X, y=None):
        if not isinstance(self.theta0, ModelParams):
            raise ValueError("theta0 must be a ModelParams instance")
        seqs = check_sentences(X, self.theta0.dims.V)
        cfg = FLConfig(self.epochs, self.batch_size, self.learning_rate)
        noise = NoiseConfig(self.noise, self.sigma, self.random_state)
        self.update_pair_ = run_update(self.theta0, seqs, cfg, noise)
        self.theta1_ = self.update_pair_.theta1
        return self


class LeakageAttack(BaseEstimator):
    """Word recovery plus sentence reconstruction from an observed update.

    ``fit(theta0, theta1)`` recovers words and ranks every candidate sentence;
    ``predict()`` returns the ``top_n`` best as token tuples.
    """

    def __init__(self, threshold=0.0, scale=0.0, max_len=4, top_n=None):
        self.threshold = threshold
        self.scale = scale
        self.max_len = max_len
        self.top_n = top_n

    def fit(self, theta0, theta1=None):
        pair = theta0 if theta1 is None else UpdatePair(theta0, theta1)
        check_same_dims(pair.theta0, pair.theta1)
        words = recover_words(pair)
        if self.threshold != 0:
            words = filter_by_magnitude(words, self.threshold)
        self.recovered_words_ = words
        if len(words):
            self.candidates_ = reconstruct_sentences(pair, words, self.max_len, None, self.scale)
        else:
            self.candidates_ = []
        return self

    def predict(self, X=None):
        check_is_fitted(self, "candidates_")
        n = len(self.candidates_) if self.top_n is None else self.top_n
        return [c.tokens for c in self.candidates_[:n]]
