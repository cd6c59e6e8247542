import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nwpleak.model import (
    ModelDims, ModelParams, forward, gradients, init_params, initial_state, log_perplexities,
    log_perplexity, logits, loss, loss_and_gradients, step, zero_params,
)
from nwpleak.text import dataset_to_examples, sentence_to_examples
from helpers import fd_gradient_check, random_tiny_case
from oracles import reference_loss, scalar_cifg_probs


def model_with(V=3, D=1, H=1, **arrays):
    p = zero_params(ModelDims(V, D, H))
    return p.replace(**{k: np.asarray(v, dtype=float) for k, v in arrays.items()})


def test_init_params_deterministic_and_seeded():
    dims = ModelDims(40, 6, 5)
    a, b = init_params(dims, 1), init_params(dims, 1)
    assert a.equals(b)
    assert not np.array_equal(a.W, init_params(dims, 2).W)
    assert np.all(a.b == 0)
    assert np.all(a.beta_i == -1) and np.all(a.beta_o == 0) and np.all(a.beta_g == 0)


def test_params_are_read_only_copies():
    p = init_params(ModelDims(5, 2, 2), 0)
    with pytest.raises(ValueError):
        p.W[0, 0] = 1.0
    src = np.zeros(5)
    q = p.replace(b=src)
    src[0] = 3.0
    assert q.b[0] == 0.0


def test_flat_round_trip_and_arithmetic():
    dims = ModelDims(7, 3, 2)
    p = init_params(dims, 4)
    assert ModelParams.from_flat(dims, p.flat()).equals(p)
    assert p.flat().size == dims.n_params
    np.testing.assert_array_equal((p + p - p).flat(), p.flat())
    np.testing.assert_array_equal((2 * p).flat(), 2 * p.flat())
    with pytest.raises(ValueError):
        ModelParams.from_flat(dims, np.zeros(dims.n_params + 1))


def test_zero_logits_give_uniform_distribution():
    p = model_with(V=9, D=2, H=3, G_i=np.ones((3, 4)))
    np.testing.assert_allclose(forward(p, [0, 4, 2]), np.full(9, 1 / 9), rtol=0, atol=1e-15)


def test_hand_set_scalar_model_matches_scalar_oracle():
    W, b = [0.7, -1.2, 0.4], [0.1, -0.3, 0.25]
    gi, go, gg = (0.5, -0.8), (1.1, 0.3), (-0.9, 1.4)
    bi, bo, bg, P = -0.2, 0.35, 0.05, 1.7
    p = model_with(
        W=np.array(W)[:, None], b=b, G_i=[gi], G_o=[go], G_g=[gg],
        beta_i=[bi], beta_o=[bo], beta_g=[bg], P=[[P]],
    )
    for prefix in ([0], [0, 2], [0, 2, 1, 1, 2]):
        expected = scalar_cifg_probs(W, b, gi, go, gg, bi, bo, bg, P, prefix)
        np.testing.assert_allclose(forward(p, prefix), expected, rtol=0, atol=1e-9)


def test_forward_rejects_out_of_range_ids():
    p = init_params(ModelDims(5, 2, 2), 0)
    with pytest.raises(ValueError):
        forward(p, [0, 5])
    with pytest.raises(ValueError):
        forward(p, [0, -1])


def test_step_api_matches_full_forward():
    p = init_params(ModelDims(11, 3, 4), 2)
    seqs = np.array([[0, 3, 5, 7], [0, 9, 1, 2]])
    state = initial_state(p, 2)
    for t in range(seqs.shape[1]):
        state, z = step(p, state, seqs[:, t])
    for n in range(2):
        np.testing.assert_allclose(z[n], logits(p, seqs[n]), rtol=0, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0.1, 30.0))
def test_forward_is_normalised(seed, spread):
    rng = np.random.default_rng(seed)
    dims = ModelDims(int(rng.integers(2, 60)), int(rng.integers(1, 6)), int(rng.integers(1, 6)))
    p = ModelParams.from_flat(dims, spread * rng.standard_normal(dims.n_params))
    prefix = np.concatenate([[0], rng.integers(0, dims.V, size=int(rng.integers(0, 6)))])
    probs = forward(p, prefix)
    assert np.all(probs >= 0) and np.all(np.isfinite(probs))
    assert abs(probs.sum() - 1.0) <= 1e-6


def test_zero_logit_loss_and_perplexity_are_t_log_v():
    V = 13
    p = model_with(V=V, D=2, H=2, G_g=np.ones((2, 4)), beta_o=[0.5, 0.5])
    tokens = [0, 4, 8, 2]
    assert loss(p, sentence_to_examples(tokens)) == pytest.approx(3 * math.log(V), abs=1e-12)
    assert log_perplexity(p, tokens) == pytest.approx(3 * math.log(V), abs=1e-12)
    assert log_perplexity(p, [0]) == 0.0


def test_loss_is_sum_of_per_example_nll():
    p, examples = random_tiny_case(3)
    direct = sum(-math.log(forward(p, pre)[lab]) for pre, lab in examples)
    assert loss(p, examples) == pytest.approx(direct, abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_loss_matches_independent_reference(seed):
    p, examples = random_tiny_case(seed)
    d = p.dims
    ref = float(reference_loss(p.flat(), d.V, d.D, d.H, examples))
    assert loss(p, examples) == pytest.approx(ref, abs=1e-11)


def test_loss_equals_log_perplexity_of_one_sentence():
    p = init_params(ModelDims(30, 4, 5), 9)
    tokens = [0, 7, 3, 29, 3, 11]
    assert loss(p, sentence_to_examples(tokens)) == pytest.approx(log_perplexity(p, tokens), abs=1e-9)


def test_log_perplexities_batch_matches_single():
    p = init_params(ModelDims(30, 4, 5), 9)
    seqs = [[0], [0, 4], [0, 5, 6, 7, 8], [0, 29, 1]]
    np.testing.assert_allclose(log_perplexities(p, seqs), [log_perplexity(p, s) for s in seqs], atol=1e-12, rtol=0)


def test_duplicate_and_overlapping_examples_keep_loss_additive():
    p = init_params(ModelDims(10, 3, 3), 1)
    ex = [((0,), 4), ((0, 4), 5), ((0,), 4), ((0, 4, 5), 2), ((0, 3), 1)]
    assert loss(p, ex) == pytest.approx(sum(loss(p, [e]) for e in ex), abs=1e-12)
    g = gradients(p, ex).flat()
    np.testing.assert_allclose(g, sum(gradients(p, [e]).flat() for e in ex), atol=1e-12, rtol=0)


@pytest.mark.parametrize("seed", range(8))
def test_gradients_match_finite_differences(seed):
    assert fd_gradient_check(*random_tiny_case(1000 + seed)) <= 1.0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_bias_gradient_sums_to_zero(seed):
    p, examples = random_tiny_case(seed)
    assert abs(gradients(p, examples).b.sum()) <= 1e-8 * len(examples)


def test_bias_gradient_sign_exhaustive_small_vocab():
    rng = np.random.default_rng(5)
    for V in (2, 3, 7, 50):
        dims = ModelDims(V, 3, 2)
        p = ModelParams.from_flat(dims, rng.standard_normal(dims.n_params))
        for label in range(V):
            gb = gradients(p, [((0, int(rng.integers(V))), label)]).b
            assert gb[label] < 0
            assert np.all(np.delete(gb, label) > 0)


def test_single_example_bias_gradient_is_prediction_minus_one_hot():
    p = init_params(ModelDims(12, 3, 4), 0)
    prefix, label = (0, 5, 2), 7
    expected = forward(p, prefix)
    expected[label] -= 1.0
    np.testing.assert_allclose(gradients(p, [(prefix, label)]).b, expected, atol=1e-14, rtol=0)


def test_loss_and_gradients_deterministic():
    p, ex = random_tiny_case(11)
    l1, g1 = loss_and_gradients(p, ex)
    l2, g2 = loss_and_gradients(p, ex)
    assert l1 == l2 and g1.equals(g2)
