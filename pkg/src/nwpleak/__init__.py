"""Federated next-word-prediction leakage lab.

A CIFG-LSTM keyboard language model in numpy, simulated federated client
updates (plain, per-step noise, single final noise), and the attacks that
recover typed words and whole sentences from one observed update.
"""

from nwpleak.attack import (
    CandidateSentence,
    RecoveredWords,
    auto_threshold,
    filter_by_magnitude,
    generate_candidates,
    reconstruct_sentences,
    recover_words,
    scale_update,
    score_candidate,
    select_top,
)
from nwpleak.client import (
    FLConfig,
    NoiseConfig,
    UpdatePair,
    client_update,
    client_update_dpsgd,
    client_update_single_noise,
    run_update,
)
from nwpleak.estimators import ClientUpdate, LeakageAttack, NextWordModel, VocabularyTransformer
from nwpleak.metrics import edit_distance, levenshtein_ratio, reconstruction_report, word_f1
from nwpleak.model import (
    ModelDims,
    ModelParams,
    forward,
    gradients,
    init_params,
    log_perplexity,
    loss,
)
from nwpleak.text import Vocabulary, build_vocabulary, tokenize

__version__ = "0.1.0"

__all__ = [
    "CandidateSentence", "ClientUpdate", "FLConfig", "LeakageAttack", "ModelDims", "ModelParams",
    "NextWordModel", "NoiseConfig", "RecoveredWords", "UpdatePair", "Vocabulary", "VocabularyTransformer",
    "auto_threshold", "build_vocabulary", "client_update", "client_update_dpsgd",
    "client_update_single_noise", "edit_distance", "filter_by_magnitude", "forward",
    "generate_candidates", "gradients", "init_params", "levenshtein_ratio", "log_perplexity", "loss",
    "reconstruct_sentences", "reconstruction_report", "recover_words", "run_update", "scale_update",
    "score_candidate", "select_top", "tokenize", "word_f1",
]
