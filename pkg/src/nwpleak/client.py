"""Federated client update: plain SGD, DPSGD-like per-step noise, single final noise.

The local loss of a batch is the mean over its sentences of each sentence's
summed token cross-entropy. Batches are consecutive slices in stored order,
with no shuffling between epochs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from nwpleak._validation import check_same_dims, check_scalar, check_sentences
from nwpleak.model import ModelParams, pack_sequences, weighted_nll_and_grad

NOISE_MODES = ("none", "dpsgd", "single")


@dataclass(frozen=True)
class FLConfig:
    epochs: int = 1
    batch_size: int = 1
    lr: float = 0.001

    def __post_init__(self):
        check_scalar(self.epochs, "epochs", min_val=1, integer=True)
        check_scalar(self.batch_size, "batch_size", min_val=1, integer=True)
        check_scalar(self.lr, "lr", min_val=0)


@dataclass(frozen=True)
class NoiseConfig:
    mode: str = "none"
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.mode not in NOISE_MODES:
            raise ValueError(f"noise mode must be one of {NOISE_MODES}, got {self.mode!r}")
        check_scalar(self.sigma, "sigma", min_val=0)


class UpdatePair(NamedTuple):
    theta0: ModelParams
    theta1: ModelParams


def split_batches(dataset: Sequence, B: int) -> list[list]:
    check_scalar(B, "B", min_val=1, integer=True)
    items = list(dataset)
    return [items[k : k + B] for k in range(0, len(items), B)]


def noise_stream(seed: int) -> np.random.Generator:
    """Counter-based (Philox) Gaussian source; one stream per update call."""
    return np.random.Generator(np.random.Philox(seed))


def pack_batch(batch):
    """Padded ids and weights ``1/|batch|`` for the mean-over-sentences loss."""
    return pack_sequences(batch, 1.0 / len(batch))


def batch_gradient(params: ModelParams, batch) -> tuple[float, np.ndarray]:
    """Mean-over-sentences loss of one batch and its flat gradient."""
    value, grads = weighted_nll_and_grad(params, *pack_batch(batch))
    return value, grads.flat()


def _sgd(theta0: ModelParams, dataset, cfg: FLConfig, after_step=None, on_epoch=None) -> ModelParams:
    seqs = check_sentences(dataset, theta0.dims.V)
    packed = [pack_batch(b) for b in split_batches(seqs, cfg.batch_size)]
    dims = theta0.dims
    flat = theta0.flat()
    for epoch in range(cfg.epochs):
        total = 0.0
        for ids, w in packed:
            value, g = weighted_nll_and_grad(ModelParams.from_flat(dims, flat), ids, w)
            total += value
            flat = flat - cfg.lr * g.flat()
            if after_step is not None:
                flat = after_step(flat)
        if on_epoch is not None:
            on_epoch(epoch, total)
    return ModelParams.from_flat(dims, flat)


def client_update(theta0: ModelParams, dataset, cfg: FLConfig, on_epoch=None) -> ModelParams:
    """E epochs of mini-batch SGD from ``theta0``; ``theta0`` is left untouched."""
    return _sgd(theta0, dataset, cfg, on_epoch=on_epoch)


def client_update_dpsgd(theta0: ModelParams, dataset, cfg: FLConfig, noise: NoiseConfig) -> ModelParams:
    """As :func:`client_update`, adding ``lr * N(0, sigma)`` per entry after every step."""
    if noise.mode != "dpsgd":
        raise ValueError(f"expected noise mode 'dpsgd', got {noise.mode!r}")
    if noise.sigma == 0:
        return client_update(theta0, dataset, cfg)
    rng = noise_stream(noise.seed)
    scale = cfg.lr * noise.sigma

    def add_noise(flat):
        return flat + scale * rng.standard_normal(flat.size)

    return _sgd(theta0, dataset, cfg, after_step=add_noise)


def client_update_single_noise(theta0: ModelParams, dataset, cfg: FLConfig, noise: NoiseConfig) -> ModelParams:
    """As :func:`client_update`, then one ``N(0, sigma)`` draw per entry."""
    if noise.mode != "single":
        raise ValueError(f"expected noise mode 'single', got {noise.mode!r}")
    theta1 = client_update(theta0, dataset, cfg)
    if noise.sigma == 0:
        return theta1
    rng = noise_stream(noise.seed)
    flat = theta1.flat()
    return ModelParams.from_flat(theta1.dims, flat + noise.sigma * rng.standard_normal(flat.size))


def run_update(theta0: ModelParams, dataset, cfg: FLConfig, noise: NoiseConfig | None = None) -> UpdatePair:
    """Dispatch on ``noise.mode`` and return the adversary's (theta0, theta1) view."""
    noise = noise or NoiseConfig()
    if noise.mode == "none":
        theta1 = client_update(theta0, dataset, cfg)
    elif noise.mode == "dpsgd":
        theta1 = client_update_dpsgd(theta0, dataset, cfg, noise)
    else:
        theta1 = client_update_single_noise(theta0, dataset, cfg, noise)
    check_same_dims(theta0, theta1)
    return UpdatePair(theta0, theta1)
