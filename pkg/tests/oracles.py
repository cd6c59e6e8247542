"""Independent reference implementations used as test oracles.

Nothing here imports the package's numerical code: parameters arrive as a
flat vector in model-file order and are unpacked locally.
"""

import math

import numpy as np

LD = np.longdouble


def unpack(flat, V, D, H, dtype=LD):
    flat = np.asarray(flat, dtype=dtype)
    shapes = [
        ("W", (V, D)), ("b", (V,)),
        ("G_i", (H, 2 * D)), ("G_o", (H, 2 * D)), ("G_g", (H, 2 * D)),
        ("beta_i", (H,)), ("beta_o", (H,)), ("beta_g", (H,)),
        ("P", (D, H)),
    ]
    out, k = {}, 0
    for name, shape in shapes:
        n = int(np.prod(shape))
        out[name] = flat[k:k + n].reshape(shape)
        k += n
    assert k == flat.size
    return out


def reference_loss(flat, V, D, H, examples, dtype=LD):
    """Sum of -log softmax(z)[label], each example unrolled from scratch."""
    p = unpack(flat, V, D, H, dtype)
    one = dtype(1)
    half = dtype(0.5)

    def sig(a):
        return half * (one + np.tanh(half * a))

    total = dtype(0)
    for prefix, label in examples:
        C = np.zeros(H, dtype=dtype)
        h = np.zeros(D, dtype=dtype)
        for tok in prefix:
            u = np.concatenate([p["W"][tok], h])
            i = sig(p["G_i"] @ u + p["beta_i"])
            o = sig(p["G_o"] @ u + p["beta_o"])
            g = np.tanh(p["G_g"] @ u + p["beta_g"])
            C = (one - i) * C + i * g
            h = p["P"] @ (o * np.tanh(C))
        z = p["W"] @ h + p["b"]
        zmax = z.max()
        lse = zmax + np.log(np.exp(z - zmax).sum())
        total += lse - z[label]
    return total


def central_difference(fn, flat, step=1e-5):
    """Central differences of ``fn`` at every coordinate, in extended precision."""
    x = np.asarray(flat, dtype=LD)
    out = np.empty(x.size, dtype=LD)
    h = LD(step)
    for k in range(x.size):
        e = x.copy()
        e[k] += h
        fp = fn(e)
        e[k] -= 2 * h
        fm = fn(e)
        out[k] = (fp - fm) / (2 * h)
    return out


def levenshtein_recursive(a, b):
    """Edit distance straight from the recursive definition (memoised)."""
    a, b = tuple(a), tuple(b)

    from functools import lru_cache

    @lru_cache(maxsize=None)
    def d(i, j):
        if i == 0:
            return j
        if j == 0:
            return i
        return min(
            d(i - 1, j) + 1,
            d(i, j - 1) + 1,
            d(i - 1, j - 1) + (a[i - 1] != b[j - 1]),
        )

    return d(len(a), len(b))


def scalar_cifg_probs(W, b, gi, go, gg, bi, bo, bg, P, prefix):
    """V x 1 model (D = H = 1) evaluated with plain float arithmetic.

    ``gi``, ``go``, ``gg`` are (weight on x, weight on h_prev) pairs.
    """
    sig = lambda a: 1.0 / (1.0 + math.exp(-a))
    C, h = 0.0, 0.0
    for tok in prefix:
        x = W[tok]
        i = sig(gi[0] * x + gi[1] * h + bi)
        o = sig(go[0] * x + go[1] * h + bo)
        g = math.tanh(gg[0] * x + gg[1] * h + bg)
        C = (1.0 - i) * C + i * g
        h = P * (o * math.tanh(C))
    z = [W[k] * h + b[k] for k in range(len(W))]
    m = max(z)
    e = [math.exp(v - m) for v in z]
    s = sum(e)
    return [v / s for v in e]
