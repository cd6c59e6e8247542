"""Full-size dimensions (V=9502, D=96, H=670). Deselected by default; run with ``-m full_scale``."""

import numpy as np
import pytest

from helpers import random_sentences
from nwpleak.attack import reconstruct_sentences, recover_words
from nwpleak.client import FLConfig, run_update
from nwpleak.model import ModelDims, init_params

pytestmark = pytest.mark.full_scale

DIMS = ModelDims(9502, 96, 670)


@pytest.mark.parametrize("seed", range(3))
def test_fedsgd_recovery_at_full_size(seed):
    theta0 = init_params(DIMS, seed)
    data = random_sentences(np.random.default_rng(seed), DIMS.V, 16)
    pair = run_update(theta0, data, FLConfig(1, 16, 0.001))
    words = recover_words(pair)
    assert words.id_set() == {int(t) for s in data for t in s[1:]}
    assert len(reconstruct_sentences(pair, words, 4, 16)) == 16
