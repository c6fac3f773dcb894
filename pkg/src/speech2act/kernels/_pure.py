"""Numpy reference implementations of the hot kernels.

The compiled module `_core` mirrors these signatures exactly; either backend
can be swapped in without touching callers.
"""

import numpy as np


def sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def lstm_gates_forward(pre, c_prev):
    """Pointwise half of an LSTM cell.

    pre:    [n, 4h] pre-activations, gate order (input, forget, cell, output)
    c_prev: [n, h]
    Returns (hc, cache) where hc = [n, 2h] with h in the left half and the
    new cell state in the right half.
    """
    h = c_prev.shape[-1]
    i = sigmoid(pre[:, :h])
    f = sigmoid(pre[:, h : 2 * h])
    g = np.tanh(pre[:, 2 * h : 3 * h])
    o = sigmoid(pre[:, 3 * h :])
    c = f * c_prev + i * g
    tc = np.tanh(c)
    hc = np.concatenate([o * tc, c], axis=1)
    return hc, (i, f, g, o, tc)


def lstm_gates_backward(d_hc, cache, c_prev):
    """Backward of lstm_gates_forward. Returns (d_pre, d_c_prev)."""
    i, f, g, o, tc = cache
    h = c_prev.shape[-1]
    dh = d_hc[:, :h]
    dc = d_hc[:, h:] + dh * o * (1.0 - tc * tc)
    d_pre = np.concatenate(
        [
            dc * g * i * (1.0 - i),
            dc * c_prev * f * (1.0 - f),
            dc * i * (1.0 - g * g),
            dh * tc * o * (1.0 - o),
        ],
        axis=1,
    )
    return d_pre, dc * f


def edit_distance(a, b):
    """Levenshtein distance with unit costs over two int arrays."""
    a = np.ascontiguousarray(a, dtype=np.int64)
    b = np.ascontiguousarray(b, dtype=np.int64)
    if len(a) == 0:
        return len(b)
    if len(b) == 0:
        return len(a)
    prev = list(range(len(b) + 1))
    for ia in range(1, len(a) + 1):
        cur = [ia] + [0] * len(b)
        ca = a[ia - 1]
        for ib in range(1, len(b) + 1):
            sub = prev[ib - 1] + (0 if ca == b[ib - 1] else 1)
            cur[ib] = min(sub, prev[ib] + 1, cur[ib - 1] + 1)
        prev = cur
    return prev[len(b)]
