"""Shared fixtures-by-function for the unit and acceptance suites."""

import numpy as np

from nwpleak.model import ModelDims, ModelParams, gradients, init_params
from nwpleak.text import dataset_to_examples
from oracles import central_difference, reference_loss

FD_STEP = 1e-5
FD_RTOL = 1e-6
FD_ATOL = 1e-10


def random_tiny_case(seed, max_V=50, max_D=8, max_H=8):
    """Random params (all entries perturbed, biases included) and a few sentences."""
    rng = np.random.default_rng(seed)
    dims = ModelDims(int(rng.integers(3, max_V + 1)), int(rng.integers(1, max_D + 1)), int(rng.integers(1, max_H + 1)))
    base = init_params(dims, int(rng.integers(2**31)))
    params = ModelParams.from_flat(dims, base.flat() + 0.3 * rng.standard_normal(dims.n_params))
    sents = [
        np.concatenate([[0], rng.integers(1, dims.V, size=int(rng.integers(1, 5)))])
        for _ in range(int(rng.integers(1, 4)))
    ]
    return params, dataset_to_examples(sents)


def fd_gradient_check(params, examples):
    """Worst ratio of |analytic - numeric| to the allowed error; <= 1 passes."""
    V, D, H = params.dims.V, params.dims.D, params.dims.H
    analytic = gradients(params, examples).flat()
    numeric = central_difference(lambda x: reference_loss(x, V, D, H, examples), params.flat(), FD_STEP)
    numeric = numeric.astype(np.float64)
    err = np.abs(analytic - numeric)
    tol = np.maximum(FD_RTOL * np.maximum(np.abs(analytic), np.abs(numeric)), FD_ATOL)
    return float((err / tol).max())


def random_sentences(rng, V, n, words=4):
    """``n`` sentences of ``words`` ids drawn from 2..V-1 after <S>."""
    body = rng.integers(2, V, size=(n, words))
    return [np.concatenate([[0], row]).astype(np.int64) for row in body]
