"""Word-level CIFG-LSTM next-word-prediction model.

The recurrence, per input token ``x_t`` (a row of the tied matrix ``W``)::

    u_t = [x_t ; h_{t-1}]
    i_t = sigmoid(G_i u_t + beta_i)
    o_t = sigmoid(G_o u_t + beta_o)
    g_t = tanh(G_g u_t + beta_g)
    C_t = (1 - i_t) * C_{t-1} + i_t * g_t
    h_t = P (o_t * tanh(C_t))
    z_t = W h_t + b

Everything is float64 numpy. Gradients are exact BPTT, batched over
(sentence, position) with a per-position loss weight so that padded
positions contribute nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Iterable, Sequence

import numpy as np

from nwpleak._validation import check_token_ids

PARAM_NAMES = ("W", "b", "G_i", "G_o", "G_g", "beta_i", "beta_o", "beta_g", "P")


@dataclass(frozen=True)
class ModelDims:
    V: int
    D: int
    H: int

    def __post_init__(self):
        if self.V < 2 or self.D < 1 or self.H < 1:
            raise ValueError(f"invalid model dims {self}")

    def shapes(self) -> dict[str, tuple[int, ...]]:
        V, D, H = self.V, self.D, self.H
        return {
            "W": (V, D),
            "b": (V,),
            "G_i": (H, 2 * D),
            "G_o": (H, 2 * D),
            "G_g": (H, 2 * D),
            "beta_i": (H,),
            "beta_o": (H,),
            "beta_g": (H,),
            "P": (D, H),
        }

    @property
    def n_params(self) -> int:
        return sum(math.prod(s) for s in self.shapes().values())


@dataclass(frozen=True, eq=False)
class ModelParams:
    """All model parameters. Arrays are read-only once constructed.

    Supports ``+``, ``-`` and scalar ``*`` so that update arithmetic such as
    ``theta1 + s * (theta1 - theta0)`` reads naturally. Gradients use the same
    container.
    """

    W: np.ndarray
    b: np.ndarray
    G_i: np.ndarray
    G_o: np.ndarray
    G_g: np.ndarray
    beta_i: np.ndarray
    beta_o: np.ndarray
    beta_g: np.ndarray
    P: np.ndarray

    def __post_init__(self):
        V, D = np.shape(self.W)
        H = np.shape(self.P)[1]
        dims = ModelDims(V, D, H)
        for name, shape in dims.shapes().items():
            arr = np.array(getattr(self, name), dtype=np.float64)
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "dims", dims)

    def arrays(self) -> list[np.ndarray]:
        return [getattr(self, name) for name in PARAM_NAMES]

    def flat(self) -> np.ndarray:
        """Concatenation in serialization order (W row-major, b, G_i, ... P)."""
        return np.concatenate([a.ravel() for a in self.arrays()])

    @classmethod
    def from_flat(cls, dims: ModelDims, vec: np.ndarray) -> "ModelParams":
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != (dims.n_params,):
            raise ValueError(f"flat vector has length {vec.size}, expected {dims.n_params}")
        parts, start = {}, 0
        for name, shape in dims.shapes().items():
            n = math.prod(shape)
            parts[name] = vec[start : start + n].reshape(shape)
            start += n
        return cls(**parts)

    def map(self, fn, other: "ModelParams | None" = None) -> "ModelParams":
        if other is None:
            return ModelParams(*(fn(a) for a in self.arrays()))
        if other.dims != self.dims:
            raise ValueError(f"dims mismatch: {self.dims} vs {other.dims}")
        return ModelParams(*(fn(a, c) for a, c in zip(self.arrays(), other.arrays())))

    def __add__(self, other):
        return self.map(np.add, other)

    def __sub__(self, other):
        return self.map(np.subtract, other)

    def __mul__(self, s):
        return self.map(lambda a: a * float(s))

    __rmul__ = __mul__

    def __neg__(self):
        return self.map(np.negative)

    def equals(self, other: "ModelParams") -> bool:
        """Bitwise equality of every array."""
        return self.dims == other.dims and all(
            np.array_equal(a, c) for a, c in zip(self.arrays(), other.arrays())
        )

    def replace(self, **changes) -> "ModelParams":
        kwargs = {f.name: getattr(self, f.name) for f in fields(self)}
        kwargs.update(changes)
        return ModelParams(**kwargs)


Gradients = ModelParams


def init_params(dims: ModelDims, seed: int) -> ModelParams:
    """Glorot-uniform matrices, zero biases except ``beta_i = -1``."""
    rng = np.random.default_rng(seed)
    shapes = dims.shapes()

    def glorot(name):
        fan_out, fan_in = shapes[name]
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-limit, limit, size=shapes[name])

    W, G_i, G_o, G_g, P = (glorot(n) for n in ("W", "G_i", "G_o", "G_g", "P"))
    H = dims.H
    return ModelParams(
        W=W,
        b=np.zeros(dims.V),
        G_i=G_i,
        G_o=G_o,
        G_g=G_g,
        beta_i=np.full(H, -1.0),
        beta_o=np.zeros(H),
        beta_g=np.zeros(H),
        P=P,
    )


def zero_params(dims: ModelDims) -> ModelParams:
    return ModelParams(**{name: np.zeros(shape) for name, shape in dims.shapes().items()})


def _sigmoid(a):
    return 0.5 * (1.0 + np.tanh(0.5 * a))


def _log_softmax(z):
    z = z - z.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


class _Stacked:
    """Gate weights fused into one (3H, 2D) matrix for the hot loop."""

    __slots__ = ("W", "b", "G", "beta", "P", "H", "D")

    def __init__(self, params: ModelParams):
        self.W = params.W
        self.b = params.b
        self.G = np.vstack([params.G_i, params.G_o, params.G_g])
        self.beta = np.concatenate([params.beta_i, params.beta_o, params.beta_g])
        self.P = params.P
        self.D = params.dims.D
        self.H = params.dims.H


def _cell(s: _Stacked, x, h_prev, C_prev):
    u = np.concatenate([x, h_prev], axis=-1)
    a = u @ s.G.T + s.beta
    H = s.H
    i = _sigmoid(a[..., :H])
    o = _sigmoid(a[..., H : 2 * H])
    g = np.tanh(a[..., 2 * H :])
    C = (1.0 - i) * C_prev + i * g
    tc = np.tanh(C)
    m = o * tc
    h = m @ s.P.T
    return h, C, (u, i, o, g, tc, m)


def _run(s: _Stacked, inputs: np.ndarray, keep_cache: bool):
    """Unroll over ``inputs`` of shape (N, T); returns h of shape (N, T, D)."""
    N, T = inputs.shape
    X = s.W[inputs]
    h = np.zeros((N, s.D))
    C = np.zeros((N, s.H))
    hs = np.empty((N, T, s.D))
    cache = []
    for t in range(T):
        C_prev = C
        h, C, parts = _cell(s, X[:, t], h, C_prev)
        hs[:, t] = h
        if keep_cache:
            cache.append((C_prev,) + parts)
    return hs, cache


class HiddenState:
    """Recurrent state (cell ``C`` and projected output ``h``) for a batch."""

    def __init__(self, C: np.ndarray, h: np.ndarray):
        self.C = C
        self.h = h


def initial_state(params: ModelParams, n: int = 1) -> HiddenState:
    return HiddenState(np.zeros((n, params.dims.H)), np.zeros((n, params.dims.D)))


def step(params: ModelParams, state: HiddenState, token_ids) -> tuple[HiddenState, np.ndarray]:
    """Feed one token per row; returns the new state and next-word logits."""
    ids = np.atleast_1d(np.asarray(token_ids, dtype=np.int64))
    check_token_ids(ids, params.dims.V)
    s = _Stacked(params)
    h, C, _ = _cell(s, s.W[ids], state.h, state.C)
    return HiddenState(C, h), h @ s.W.T + s.b


def logits(params: ModelParams, prefix: Sequence[int]) -> np.ndarray:
    ids = np.asarray(prefix, dtype=np.int64)
    if ids.ndim != 1 or ids.size == 0:
        raise ValueError("prefix must be a non-empty 1-d token sequence")
    check_token_ids(ids, params.dims.V)
    s = _Stacked(params)
    hs, _ = _run(s, ids[None, :], keep_cache=False)
    return hs[0, -1] @ s.W.T + s.b


def forward(params: ModelParams, prefix: Sequence[int]) -> np.ndarray:
    """Next-word distribution after reading ``prefix``."""
    return softmax(logits(params, prefix))


def pack_sequences(seqs: Sequence[Sequence[int]], weights: Sequence[float] | float = 1.0):
    """Right-pad sequences into (N, T+1) ids and (N, T) per-position weights.

    Position ``t`` of row ``n`` predicts ``ids[n, t+1]`` from ``ids[n, :t+1]``.
    """
    seqs = [np.asarray(s, dtype=np.int64) for s in seqs]
    if not seqs:
        raise ValueError("no sequences")
    if np.isscalar(weights):
        weights = [float(weights)] * len(seqs)
    T = max(len(s) for s in seqs) - 1
    if T < 1:
        raise ValueError("every sequence holds only <S>; nothing to predict")
    ids = np.zeros((len(seqs), T + 1), dtype=np.int64)
    w = np.zeros((len(seqs), T))
    for n, (s, wn) in enumerate(zip(seqs, weights)):
        ids[n, : len(s)] = s
        w[n, : len(s) - 1] = wn
    return ids, w


def pack_examples(examples: Iterable[Sequence]):
    """Fold (prefix, label) examples into as few sequences as possible.

    An example whose ``prefix + (label,)`` is an initial segment of another
    example's is evaluated at that position of the longer sequence instead of
    separately; duplicates accumulate weight. The loss is unchanged.
    """
    full = [tuple(int(t) for t in prefix) + (int(label),) for prefix, label in examples]
    if not full:
        raise ValueError("examples must be non-empty")
    if any(len(f) < 2 for f in full):
        raise ValueError("every example needs a non-empty prefix")
    order = sorted(range(len(full)), key=lambda k: (-len(full[k]), full[k]))
    seqs: list[tuple[int, ...]] = []
    covered: dict[tuple[int, ...], tuple[int, int]] = {}
    counts: list[np.ndarray] = []
    for k in order:
        f = full[k]
        hit = covered.get(f)
        if hit is None:
            row = len(seqs)
            seqs.append(f)
            counts.append(np.zeros(len(f) - 1))
            for j in range(2, len(f) + 1):
                covered.setdefault(f[:j], (row, j - 2))
            hit = covered[f]
        row, pos = hit
        counts[row][pos] += 1.0
    T = max(len(s) for s in seqs) - 1
    ids = np.zeros((len(seqs), T + 1), dtype=np.int64)
    w = np.zeros((len(seqs), T))
    for n, (s, c) in enumerate(zip(seqs, counts)):
        ids[n, : len(s)] = s
        w[n, : len(c)] = c
    return ids, w


def weighted_nll(params: ModelParams, ids: np.ndarray, weights: np.ndarray) -> float:
    """Forward-only weighted negative log-likelihood of packed sequences."""
    check_token_ids(ids, params.dims.V)
    s = _Stacked(params)
    hs, _ = _run(s, ids[:, :-1], keep_cache=False)
    logp = _log_softmax(hs @ s.W.T + s.b)
    target = np.take_along_axis(logp, ids[:, 1:, None], axis=-1)[..., 0]
    return float(-(weights * target).sum())


def weighted_nll_and_grad(params: ModelParams, ids: np.ndarray, weights: np.ndarray):
    """Weighted NLL of packed sequences and its exact gradient by BPTT."""
    check_token_ids(ids, params.dims.V)
    s = _Stacked(params)
    inputs, targets = ids[:, :-1], ids[:, 1:]
    N, T = inputs.shape
    D, H, V = s.D, s.H, params.dims.V
    hs, cache = _run(s, inputs, keep_cache=True)

    logp = _log_softmax(hs @ s.W.T + s.b)
    target_logp = np.take_along_axis(logp, targets[..., None], axis=-1)[..., 0]
    loss = float(-(weights * target_logp).sum())

    dz = np.exp(logp) * weights[..., None]
    n_idx, t_idx = np.indices((N, T))
    dz[n_idx, t_idx, targets] -= weights

    db = dz.sum(axis=(0, 1))
    dW = dz.reshape(-1, V).T @ hs.reshape(-1, D)
    dh_out = dz @ s.W

    dG = np.zeros_like(s.G)
    dbeta = np.zeros_like(s.beta)
    dP = np.zeros_like(s.P)
    dX = np.empty((N, T, D))
    dh_next = np.zeros((N, D))
    dC_next = np.zeros((N, H))
    for t in range(T - 1, -1, -1):
        C_prev, u, i, o, g, tc, m = cache[t]
        dh = dh_out[:, t] + dh_next
        dP += dh.T @ m
        dm = dh @ s.P
        do = dm * tc
        dC = dm * o * (1.0 - tc * tc) + dC_next
        di = dC * (g - C_prev)
        dg = dC * i
        dC_next = dC * (1.0 - i)
        da = np.concatenate([di * i * (1.0 - i), do * o * (1.0 - o), dg * (1.0 - g * g)], axis=1)
        dG += da.T @ u
        dbeta += da.sum(axis=0)
        du = da @ s.G
        dX[:, t] = du[:, :D]
        dh_next = du[:, D:]
    np.add.at(dW, inputs.ravel(), dX.reshape(-1, D))

    grads = ModelParams(
        W=dW,
        b=db,
        G_i=dG[:H],
        G_o=dG[H : 2 * H],
        G_g=dG[2 * H :],
        beta_i=dbeta[:H],
        beta_o=dbeta[H : 2 * H],
        beta_g=dbeta[2 * H :],
        P=dP,
    )
    return loss, grads


def loss(params: ModelParams, examples) -> float:
    """Summed cross-entropy (natural log) over ``(prefix, label)`` examples."""
    ids, w = pack_examples(examples)
    return weighted_nll(params, ids, w)


def gradients(params: ModelParams, examples) -> ModelParams:
    """Exact gradient of :func:`loss`, including both uses of the tied ``W``."""
    ids, w = pack_examples(examples)
    return weighted_nll_and_grad(params, ids, w)[1]


def loss_and_gradients(params: ModelParams, examples):
    ids, w = pack_examples(examples)
    return weighted_nll_and_grad(params, ids, w)


def log_perplexity(params: ModelParams, tokens: Sequence[int]) -> float:
    """Sum of ``-log Pr(x_i | x_0..x_{i-1})`` for i >= 1; zero for ``[<S>]``."""
    ids = np.asarray(tokens, dtype=np.int64)
    if ids.ndim != 1 or ids.size == 0:
        raise ValueError("tokens must be a non-empty 1-d sequence")
    if ids.size == 1:
        return 0.0
    packed, w = pack_sequences([ids])
    return weighted_nll(params, packed, w)


def log_perplexities(params: ModelParams, seqs: Sequence[Sequence[int]]) -> np.ndarray:
    """Vectorised :func:`log_perplexity` over many sequences."""
    seqs = [np.asarray(s, dtype=np.int64) for s in seqs]
    out = np.zeros(len(seqs))
    live = [k for k, s in enumerate(seqs) if s.size > 1]
    if not live:
        return out
    ids, w = pack_sequences([seqs[k] for k in live])
    check_token_ids(ids, params.dims.V)
    s = _Stacked(params)
    hs, _ = _run(s, ids[:, :-1], keep_cache=False)
    logp = _log_softmax(hs @ s.W.T + s.b)
    target = np.take_along_axis(logp, ids[:, 1:, None], axis=-1)[..., 0]
    out[live] = -(w * target).sum(axis=1)
    return out
