"""Sequence layers: embedding, dense, LSTM cells, bidirectional encoder
stacks, and location-aware attention.

All layers operate on unbatched per-utterance graphs (vectors [H], frame
stacks [T, H]); desk-scale models are small enough that per-op overhead, not
arithmetic, dominates, and the fused LSTM kernel keeps that overhead low.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .autodiff import Parameter, Tensor
from .errors import ShapeError

RECURRENT_INIT_RANGE = 0.08


def uniform_init(rng, shape, limit=RECURRENT_INIT_RANGE):
    return rng.uniform(-limit, limit, size=shape)


def xavier_init(rng, fan_in, fan_out, shape=None):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape if shape is not None else (fan_in, fan_out))


class Dense:
    """Affine projection; Xavier-uniform weight, zero bias."""

    def __init__(self, name, input_size, output_size, rng, bias=True):
        self.w = Parameter(f"{name}.W", xavier_init(rng, input_size, output_size))
        self.b = Parameter(f"{name}.b", np.zeros(output_size)) if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        out = ad.matmul(x, self.w)
        if self.b is None:
            return out
        if out.data.ndim == 1:
            return ad.add(out, self.b)
        return ad.add_bias(out, self.b)

    def parameters(self):
        return [self.w] + ([self.b] if self.b is not None else [])


class Embedding:
    def __init__(self, name, vocab_size, dim, rng):
        self.table = Parameter(f"{name}.table", uniform_init(rng, (vocab_size, dim)))
        self.dim = dim

    def __call__(self, ids) -> Tensor:
        return ad.embedding(self.table, ids)

    def parameters(self):
        return [self.table]


class LstmCell:
    """Single LSTM cell; gate order (input, forget, cell, output).

    Weights are uniform(-0.08, 0.08), biases zero. With learned_init=True the
    initial hidden/cell states are trainable parameters instead of zeros.
    """

    def __init__(self, name, input_size, hidden_size, rng, learned_init=False):
        self.input_size = input_size
        self.hidden_size = hidden_size
        self.w_x = Parameter(f"{name}.W_x", uniform_init(rng, (input_size, 4 * hidden_size)))
        self.w_h = Parameter(f"{name}.W_h", uniform_init(rng, (hidden_size, 4 * hidden_size)))
        self.b = Parameter(f"{name}.b", np.zeros(4 * hidden_size))
        if learned_init:
            self.h0 = Parameter(f"{name}.h0", np.zeros(hidden_size))
            self.c0 = Parameter(f"{name}.c0", np.zeros(hidden_size))
        else:
            self.h0 = None
            self.c0 = None

    def initial_state(self):
        if self.h0 is not None:
            return self.h0, self.c0
        zeros = np.zeros(self.hidden_size)
        return Tensor(zeros), Tensor(zeros.copy())

    def step(self, x: Tensor, state):
        """One recurrence step; x is [input_size], state a pair ([h], [c])."""
        if x.data.shape != (self.input_size,):
            raise ShapeError(
                f"lstm_step: input shape {x.data.shape} does not match ({self.input_size},)"
            )
        h_prev, c_prev = state
        pre = ad.add(ad.add(ad.matmul(x, self.w_x), ad.matmul(h_prev, self.w_h)), self.b)
        hc = ad.lstm_gates(pre, c_prev)
        h = ad.slice_axis(hc, 0, 0, self.hidden_size)
        c = ad.slice_axis(hc, 0, self.hidden_size, 2 * self.hidden_size)
        return h, c

    def run(self, inputs, reverse=False):
        """Run over a list of [input_size] tensors; returns hidden states in
        input order regardless of direction."""
        state = self.initial_state()
        hs = []
        for x in (reversed(inputs) if reverse else inputs):
            h, c = self.step(x, state)
            state = (h, c)
            hs.append(h)
        if reverse:
            hs.reverse()
        return hs

    def parameters(self):
        out = [self.w_x, self.w_h, self.b]
        if self.h0 is not None:
            out += [self.h0, self.c0]
        return out


class BiLstmEncoder:
    """Stacked bidirectional LSTM with optional temporal subsampling.

    subsample[i] keeps every subsample[i]-th frame of layer i's output;
    the retained length is ceil(T / factor).
    """

    def __init__(self, name, input_size, hidden_size, num_layers, subsample, rng):
        if len(subsample) != num_layers:
            raise ShapeError(f"encoder: {num_layers} layers but {len(subsample)} subsample factors")
        self.layers = []
        self.subsample = tuple(int(s) for s in subsample)
        size = input_size
        for i in range(num_layers):
            fwd = LstmCell(f"{name}.layer{i}.fwd", size, hidden_size, rng)
            bwd = LstmCell(f"{name}.layer{i}.bwd", size, hidden_size, rng)
            self.layers.append((fwd, bwd))
            size = 2 * hidden_size
        self.output_size = size

    def encode(self, frames: np.ndarray) -> Tensor:
        """frames [T, D] -> stacked hidden states [T', 2*hidden]."""
        frames = np.asarray(frames, dtype=np.float64)
        if frames.ndim != 2 or frames.shape[0] == 0:
            raise ShapeError(f"encoder: expected nonempty [T, D] frames, got shape {frames.shape}")
        xs = [Tensor(frames[t]) for t in range(frames.shape[0])]
        for (fwd, bwd), factor in zip(self.layers, self.subsample):
            hf = fwd.run(xs)
            hb = bwd.run(xs, reverse=True)
            xs = [ad.concat([f, b]) for f, b in zip(hf, hb)]
            if factor > 1:
                xs = xs[::factor]
        return ad.stack(xs)

    def output_length(self, num_frames: int) -> int:
        n = num_frames
        for factor in self.subsample:
            n = -(-n // factor)
        return n

    def parameters(self):
        out = []
        for fwd, bwd in self.layers:
            out += fwd.parameters() + bwd.parameters()
        return out


class EncoderState:
    """Encoder output for one utterance: hidden states plus the cached
    attention key projection."""

    def __init__(self, states: Tensor, proj: Tensor):
        self.states = states
        self.proj = proj

    def __len__(self):
        return self.states.data.shape[0]


class LocationAwareAttention:
    """Additive attention with convolutional features over the previous
    alignment: score_t = v . tanh(W s + V h_t + U f_t + b), f = conv(prev)."""

    def __init__(self, name, enc_size, dec_size, attn_size, rng, conv_channels=8, conv_width=11):
        self.w_dec = Parameter(f"{name}.W_dec", xavier_init(rng, dec_size, attn_size))
        self.w_enc = Parameter(f"{name}.W_enc", xavier_init(rng, enc_size, attn_size))
        self.w_loc = Parameter(f"{name}.W_loc", xavier_init(rng, conv_channels, attn_size))
        self.bias = Parameter(f"{name}.b", np.zeros(attn_size))
        self.score_vec = Parameter(f"{name}.v", xavier_init(rng, attn_size, 1, shape=(attn_size,)))
        self.filters = Parameter(
            f"{name}.conv", xavier_init(rng, conv_width, conv_channels, shape=(conv_channels, conv_width))
        )

    def precompute(self, enc_states: Tensor) -> Tensor:
        return ad.matmul(enc_states, self.w_enc)

    def initial_weights(self, length: int) -> Tensor:
        return Tensor(np.full(length, 1.0 / length))

    def step(self, dec_state: Tensor, encoder: EncoderState, prev_weights: Tensor):
        """Returns (context [enc_size], weights [T])."""
        t = len(encoder)
        if prev_weights.data.shape != (t,):
            raise ShapeError(
                f"attend: previous weights shape {prev_weights.data.shape} does not match encoder length {t}"
            )
        loc = ad.matmul(ad.conv1d_same(prev_weights, self.filters), self.w_loc)
        query = ad.add(ad.matmul(dec_state, self.w_dec), self.bias)
        scores = ad.matmul(ad.tanh(ad.add_bias(ad.add(encoder.proj, loc), query)), self.score_vec)
        weights = ad.softmax(scores)
        context = ad.matmul(weights, encoder.states)
        return context, weights

    def parameters(self):
        return [self.w_dec, self.w_enc, self.w_loc, self.bias, self.score_vec, self.filters]
