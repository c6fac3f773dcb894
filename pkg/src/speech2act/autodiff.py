"""Reverse-mode automatic differentiation over dense float64 arrays.

Every op runs eagerly on numpy and records itself on an implicit tape: each
result tensor keeps references to its parents plus a vector-Jacobian-product
closure, and tensors carry a monotonically increasing creation index, so the
creation order is a topological order of the graph. backward() walks the
reachable subgraph in strict reverse creation order.

Graphs are confined to one thread for a training step; grad-mode flags are
thread-local so independent graphs may run on different threads.
"""

from __future__ import annotations

import itertools
import threading
from contextlib import contextmanager

import numpy as np

from . import kernels
from .errors import GradientError, ShapeError
from .kernels._pure import sigmoid as _np_sigmoid

_counter = itertools.count()
_state = threading.local()


def _grad_enabled() -> bool:
    return getattr(_state, "grad_enabled", True)


def _check_finite_enabled() -> bool:
    return getattr(_state, "check_finite", False)


@contextmanager
def no_grad():
    """Disable tape recording; ops inside produce constant tensors."""
    prev = _grad_enabled()
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = prev


def set_check_finite(flag: bool) -> None:
    """When enabled, every op validates that its output is finite."""
    _state.check_finite = bool(flag)


class Tensor:
    """A node in the computation graph holding a contiguous float64 array."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_vjp", "_order")

    def __init__(self, data, requires_grad=False):
        self.data = np.ascontiguousarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._parents = ()
        self._vjp = None
        self._order = next(_counter)

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, other)

    def __mul__(self, other):
        if isinstance(other, Tensor):
            return mul(self, other)
        return scale(self, float(other))

    __rmul__ = __mul__

    def __matmul__(self, other):
        return matmul(self, other)


class Parameter(Tensor):
    """A named trainable tensor; shape is fixed after initialization."""

    __slots__ = ("name",)

    def __init__(self, name: str, data):
        super().__init__(data, requires_grad=True)
        self.name = name

    def __repr__(self):
        return f"Parameter({self.name!r}, shape={self.data.shape})"


def _node(out_data, parents, vjp, op: str) -> Tensor:
    if _check_finite_enabled() and not np.all(np.isfinite(out_data)):
        raise GradientError(f"non-finite value produced by op '{op}'")
    out = Tensor(out_data)
    if _grad_enabled() and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._vjp = vjp
    return out


def as_tensor(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def backward(loss: Tensor, params=None) -> None:
    """Populate .grad on every requires_grad tensor reachable from `loss`.

    Accumulators start fresh on each call (no accumulation across calls).
    When `params` is given, every listed parameter is guaranteed a gradient
    afterwards; parameters unreachable from the loss get zeros.
    """
    if loss.data.size != 1:
        raise GradientError(f"backward requires a scalar loss, got shape {loss.data.shape}")
    if params is not None:
        for p in params:
            p.grad = None

    reachable = {id(loss)}
    stack = [loss]
    nodes = [loss]
    while stack:
        node = stack.pop()
        for parent in node._parents:
            if parent.requires_grad and id(parent) not in reachable:
                reachable.add(id(parent))
                stack.append(parent)
                nodes.append(parent)
    nodes.sort(key=lambda t: t._order, reverse=True)

    grads = {id(loss): np.ones_like(loss.data)}
    for node in nodes:
        g = grads.pop(id(node), None)
        if g is None:
            continue
        node.grad = g
        if node._vjp is None:
            continue
        for parent, contrib in zip(node._parents, node._vjp(g)):
            if contrib is None or not parent.requires_grad:
                continue
            acc = grads.get(id(parent))
            grads[id(parent)] = contrib if acc is None else acc + contrib

    if params is not None:
        for p in params:
            if p.grad is None:
                p.grad = np.zeros_like(p.data)


# ---------------------------------------------------------------------------
# ops

def _require_same_shape(op, a, b):
    if a.data.shape != b.data.shape:
        raise ShapeError(f"{op}: shapes {a.data.shape} and {b.data.shape} do not match")


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _require_same_shape("add", a, b)
    return _node(a.data + b.data, (a, b), lambda g: (g, g), "add")


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _require_same_shape("mul", a, b)
    return _node(a.data * b.data, (a, b), lambda g: (g * b.data, g * a.data), "mul")


def scale(a, c: float) -> Tensor:
    a = as_tensor(a)
    c = float(c)
    return _node(a.data * c, (a,), lambda g: (g * c,), "scale")


def add_bias(x, b) -> Tensor:
    """Row-wise bias: x is [n, m], b is [m]; b broadcasts over rows."""
    x, b = as_tensor(x), as_tensor(b)
    if x.data.ndim != 2 or b.data.ndim != 1 or x.data.shape[1] != b.data.shape[0]:
        raise ShapeError(f"add_bias: shapes {x.data.shape} and {b.data.shape} do not conform")
    return _node(x.data + b.data, (x, b), lambda g: (g, g.sum(axis=0)), "add_bias")


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    ad, bd = a.data, b.data
    if ad.ndim == 2 and bd.ndim == 2:
        if ad.shape[1] != bd.shape[0]:
            raise ShapeError(f"matmul: inner dimensions of {ad.shape} and {bd.shape} differ")
        return _node(ad @ bd, (a, b), lambda g: (g @ bd.T, ad.T @ g), "matmul")
    if ad.ndim == 2 and bd.ndim == 1:
        if ad.shape[1] != bd.shape[0]:
            raise ShapeError(f"matmul: inner dimensions of {ad.shape} and {bd.shape} differ")
        return _node(ad @ bd, (a, b), lambda g: (np.outer(g, bd), ad.T @ g), "matmul")
    if ad.ndim == 1 and bd.ndim == 2:
        if ad.shape[0] != bd.shape[0]:
            raise ShapeError(f"matmul: inner dimensions of {ad.shape} and {bd.shape} differ")
        return _node(ad @ bd, (a, b), lambda g: (bd @ g, np.outer(ad, g)), "matmul")
    raise ShapeError(f"matmul: unsupported ranks for shapes {ad.shape} and {bd.shape}")


def tanh(a) -> Tensor:
    a = as_tensor(a)
    out = np.tanh(a.data)
    return _node(out, (a,), lambda g: (g * (1.0 - out * out),), "tanh")


def sigmoid(a) -> Tensor:
    a = as_tensor(a)
    out = _np_sigmoid(np.atleast_1d(a.data)).reshape(a.data.shape)
    return _node(out, (a,), lambda g: (g * out * (1.0 - out),), "sigmoid")


def softmax(x, mask=None) -> Tensor:
    """Softmax along the last axis; masked-out entries get probability 0.

    `mask` is a boolean array of the same shape (True = keep); each row must
    keep at least one entry.
    """
    x = as_tensor(x)
    xd = x.data
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != xd.shape:
            raise ShapeError(f"softmax: mask shape {mask.shape} does not match {xd.shape}")
        shifted = np.where(mask, xd, -np.inf)
        shifted = shifted - shifted.max(axis=-1, keepdims=True)
        e = np.where(mask, np.exp(shifted), 0.0)
    else:
        e = np.exp(xd - xd.max(axis=-1, keepdims=True))
    out = e / e.sum(axis=-1, keepdims=True)

    def vjp(g):
        inner = (g * out).sum(axis=-1, keepdims=True)
        return ((g - inner) * out,)

    return _node(out, (x,), vjp, "softmax")


def concat(tensors, axis=0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    if not tensors:
        raise ShapeError("concat: empty tensor list")
    ref = list(tensors[0].data.shape)
    for t in tensors[1:]:
        s = list(t.data.shape)
        s[axis] = ref[axis]
        if s != ref:
            raise ShapeError(
                f"concat: shape {t.data.shape} incompatible with {tensors[0].data.shape} on axis {axis}"
            )
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def vjp(g):
        return tuple(
            np.ascontiguousarray(np.take(g, range(offsets[i], offsets[i + 1]), axis=axis))
            for i in range(len(tensors))
        )

    return _node(np.concatenate([t.data for t in tensors], axis=axis), tensors, vjp, "concat")


def slice_axis(x, axis: int, start: int, stop: int) -> Tensor:
    x = as_tensor(x)
    n = x.data.shape[axis]
    if not (0 <= start < stop <= n):
        raise ShapeError(f"slice: range [{start}:{stop}] invalid for axis {axis} of shape {x.data.shape}")
    idx = [slice(None)] * x.data.ndim
    idx[axis] = slice(start, stop)
    idx = tuple(idx)

    def vjp(g):
        full = np.zeros_like(x.data)
        full[idx] = g
        return (full,)

    return _node(np.ascontiguousarray(x.data[idx]), (x,), vjp, "slice")


def stack(tensors) -> Tensor:
    """Stack equally shaped tensors along a new leading axis."""
    tensors = [as_tensor(t) for t in tensors]
    if not tensors:
        raise ShapeError("stack: empty tensor list")
    for t in tensors[1:]:
        _require_same_shape("stack", tensors[0], t)

    def vjp(g):
        return tuple(np.ascontiguousarray(g[i]) for i in range(len(tensors)))

    return _node(np.stack([t.data for t in tensors]), tensors, vjp, "stack")


def sum(x) -> Tensor:  # noqa: A001 - mirrors the op name
    x = as_tensor(x)
    return _node(np.sum(x.data), (x,), lambda g: (np.full_like(x.data, float(g)),), "sum")


def mean(x) -> Tensor:
    x = as_tensor(x)
    n = x.data.size
    return _node(np.mean(x.data), (x,), lambda g: (np.full_like(x.data, float(g) / n),), "mean")


def embedding(table, ids) -> Tensor:
    """Row lookup: table is [V, E]; ids an int scalar -> [E] or int array [n] -> [n, E]."""
    table = as_tensor(table)
    if table.data.ndim != 2:
        raise ShapeError(f"embedding: table must be 2-D, got {table.data.shape}")
    scalar = np.isscalar(ids) or getattr(ids, "ndim", 1) == 0
    idx = np.asarray(ids, dtype=np.intp)
    if np.any(idx < 0) or np.any(idx >= table.data.shape[0]):
        raise ValueError(f"embedding: id out of range for table with {table.data.shape[0]} rows")

    def vjp(g):
        grad = np.zeros_like(table.data)
        np.add.at(grad, idx, g)
        return (grad,)

    return _node(table.data[idx if not scalar else int(idx)], (table,), vjp, "embedding")


def cross_entropy_logits(logits, targets, weights=None) -> Tensor:
    """Weighted-mean cross entropy between logit rows and integer targets.

    logits: [n, V] (a single [V] row is accepted); targets: int array [n].
    weights: optional nonnegative [n]; the loss is sum_i w_i * nll_i / sum_i w_i,
    the plain mean when omitted. Padding is excluded by giving it zero weight.
    """
    logits = as_tensor(logits)
    ld = logits.data
    if ld.ndim == 1:
        ld2 = ld[None, :]
    elif ld.ndim == 2:
        ld2 = ld
    else:
        raise ShapeError(f"cross_entropy: logits must be 1-D or 2-D, got {ld.shape}")
    t = np.atleast_1d(np.asarray(targets, dtype=np.intp))
    n, v = ld2.shape
    if t.shape != (n,):
        raise ShapeError(f"cross_entropy: {n} logit rows but targets shape {t.shape}")
    if np.any(t < 0) or np.any(t >= v):
        raise ValueError(f"cross_entropy: target id out of range for {v} classes")
    if weights is None:
        w = np.full(n, 1.0 / n)
    else:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (n,):
            raise ShapeError(f"cross_entropy: weights shape {w.shape} does not match {n} rows")
        total = w.sum()
        if total <= 0:
            raise ValueError("cross_entropy: weights must have positive sum")
        w = w / total

    shifted = ld2 - ld2.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1)) + ld2.max(axis=1)
    nll = lse - ld2[np.arange(n), t]
    loss = float(np.dot(w, nll))

    def vjp(g):
        soft = np.exp(ld2 - lse[:, None])
        soft[np.arange(n), t] -= 1.0
        grad = soft * (float(g) * w)[:, None]
        return (grad.reshape(ld.shape),)

    return _node(np.float64(loss), (logits,), vjp, "cross_entropy")


def lstm_gates(pre, c_prev) -> Tensor:
    """Fused LSTM pointwise block (kernel-backed).

    pre: [4h] or [n, 4h] gate pre-activations (input, forget, cell, output);
    c_prev: [h] or [n, h]. Returns [2h] / [n, 2h] with the new hidden state in
    the left half and the new cell state in the right half.
    """
    pre, c_prev = as_tensor(pre), as_tensor(c_prev)
    vec = pre.data.ndim == 1
    p2 = pre.data[None, :] if vec else pre.data
    c2 = c_prev.data[None, :] if vec else c_prev.data
    if p2.ndim != 2 or c2.ndim != 2 or p2.shape[0] != c2.shape[0] or p2.shape[1] != 4 * c2.shape[1]:
        raise ShapeError(f"lstm_gates: shapes {pre.data.shape} and {c_prev.data.shape} do not conform")
    hc, cache = kernels.lstm_gates_forward(p2, c2)

    def vjp(g):
        g2 = g[None, :] if vec else g
        d_pre, d_cp = kernels.lstm_gates_backward(g2, cache, c2)
        if vec:
            return (d_pre[0], d_cp[0])
        return (d_pre, d_cp)

    return _node(hc[0] if vec else hc, (pre, c_prev), vjp, "lstm_gates")


def conv1d_same(signal, filters) -> Tensor:
    """Correlate a 1-D signal [T] with filters [C, K] (K odd), same padding -> [T, C]."""
    signal, filters = as_tensor(signal), as_tensor(filters)
    sd, fd = signal.data, filters.data
    if sd.ndim != 1 or fd.ndim != 2 or fd.shape[1] % 2 == 0:
        raise ShapeError(f"conv1d: signal {sd.shape} with filters {fd.shape} (kernel width must be odd)")
    t, (c, k) = sd.shape[0], fd.shape
    pad = k // 2
    padded = np.pad(sd, pad)
    windows = np.lib.stride_tricks.sliding_window_view(padded, k)  # [T, K]

    def vjp(g):
        d_filters = g.T @ windows
        d_windows = g @ fd  # [T, K]
        d_padded = np.zeros(t + 2 * pad)
        for j in range(k):
            d_padded[j : j + t] += d_windows[:, j]
        return (d_padded[pad : pad + t], d_filters)

    return _node(windows @ fd.T, (signal, filters), vjp, "conv1d")
