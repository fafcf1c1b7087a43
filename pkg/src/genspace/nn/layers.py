"""Layers operating on NHWC float arrays, each with a hand-written backward pass."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ChannelMismatch, ShapeMismatch, ShapeUnderflow


@dataclass(frozen=True)
class LayerSpec:
    """Static description of one layer.

    ``kind`` is one of conv, maxpool, flatten, dense.  Convolutions are
    always 3x3 / stride 1 / same padding; pooling is 2x2 / stride 2.
    """

    kind: str
    units: int = 0
    activation: str = "relu"
    ceil_mode: bool = True

    def __str__(self):
        if self.kind == "conv":
            return f"Conv-{self.units}"
        if self.kind == "dense":
            return f"FC-{self.units}" + ("" if self.activation == "relu" else f" ({self.activation})")
        return {"maxpool": "MaxPool", "flatten": "Flatten"}[self.kind]


def _relu(z):
    return np.maximum(z, 0.0)


class Layer:
    params: dict[str, np.ndarray]

    def __init__(self, spec: LayerSpec, in_shape: tuple[int, ...]):
        self.spec = spec
        self.in_shape = tuple(in_shape)
        self.params = {}
        self.grads = {}

    @property
    def out_shape(self) -> tuple[int, ...]:
        raise NotImplementedError

    def forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dout: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _check_input(self, x):
        if x.shape[1:] != self.in_shape:
            err = ChannelMismatch if (x.ndim == 4 and len(self.in_shape) == 3
                                      and x.shape[1:3] == self.in_shape[:2]) else ShapeMismatch
            raise err(f"{self.spec}: expected input {self.in_shape}, got {x.shape[1:]}")


class Conv2D(Layer):
    def __init__(self, spec, in_shape, rng=None, dtype=np.float64):
        super().__init__(spec, in_shape)
        h, w, c = self.in_shape
        fan_in = 9 * c
        rng = rng or np.random.default_rng(0)
        self.params["W"] = (rng.standard_normal((3, 3, c, spec.units))
                            * math.sqrt(2.0 / fan_in)).astype(dtype)
        self.params["b"] = np.zeros(spec.units, dtype=dtype)

    @property
    def out_shape(self):
        h, w, _ = self.in_shape
        return (h, w, self.spec.units)

    def forward(self, x):
        self._check_input(x)
        n, h, w, _ = x.shape
        xp = np.pad(x, ((0, 0), (1, 1), (1, 1), (0, 0)))
        W = self.params["W"]
        z = np.broadcast_to(self.params["b"], (n, h, w, W.shape[3])).copy()
        for i in range(3):
            for j in range(3):
                z += xp[:, i:i + h, j:j + w, :] @ W[i, j]
        out = _relu(z)
        self._xp = xp
        self._active = z > 0
        return out

    def backward(self, dout):
        dz = dout * self._active
        xp = self._xp
        n, h, w, f = dz.shape
        c = xp.shape[3]
        W = self.params["W"]
        dW = np.empty_like(W)
        dxp = np.zeros_like(xp)
        dz2 = dz.reshape(-1, f)
        for i in range(3):
            for j in range(3):
                patch = xp[:, i:i + h, j:j + w, :].reshape(-1, c)
                dW[i, j] = patch.T @ dz2
                dxp[:, i:i + h, j:j + w, :] += dz @ W[i, j].T
        self.grads = {"W": dW, "b": dz2.sum(axis=0)}
        return dxp[:, 1:-1, 1:-1, :]


def pooled_size(dim: int, ceil_mode: bool = True) -> int:
    return -(-dim // 2) if ceil_mode else dim // 2


class MaxPool2D(Layer):
    """2x2 / stride 2 max pooling; in ceil mode a trailing odd row or column
    pools over whatever cells are available."""

    def __init__(self, spec, in_shape, **_):
        super().__init__(spec, in_shape)
        h, w, _ = self.in_shape
        if pooled_size(h, spec.ceil_mode) < 1 or pooled_size(w, spec.ceil_mode) < 1:
            raise ShapeUnderflow(f"max pooling would reduce {self.in_shape[:2]} below 1")

    @property
    def out_shape(self):
        h, w, c = self.in_shape
        m = self.spec.ceil_mode
        return (pooled_size(h, m), pooled_size(w, m), c)

    def forward(self, x):
        self._check_input(x)
        n, h, w, c = x.shape
        ho, wo, _ = self.out_shape
        if self.spec.ceil_mode:
            xp = np.pad(x, ((0, 0), (0, 2 * ho - h), (0, 2 * wo - w), (0, 0)),
                        constant_values=-np.inf)
        else:
            xp = x[:, :2 * ho, :2 * wo, :]
        win = xp.reshape(n, ho, 2, wo, 2, c).transpose(0, 1, 3, 5, 2, 4).reshape(n, ho, wo, c, 4)
        idx = np.argmax(win, axis=-1)
        self._idx = idx
        self._x_shape = x.shape
        return np.take_along_axis(win, idx[..., None], axis=-1)[..., 0]

    def backward(self, dout):
        n, h, w, c = self._x_shape
        ho, wo, _ = self.out_shape
        dwin = np.zeros((n, ho, wo, c, 4), dtype=dout.dtype)
        np.put_along_axis(dwin, self._idx[..., None], dout[..., None], axis=-1)
        dxp = dwin.reshape(n, ho, wo, c, 2, 2).transpose(0, 1, 4, 2, 5, 3).reshape(n, 2 * ho, 2 * wo, c)
        dx = np.zeros(self._x_shape, dtype=dout.dtype)
        hh, ww = min(h, 2 * ho), min(w, 2 * wo)
        dx[:, :hh, :ww, :] = dxp[:, :hh, :ww, :]
        return dx


class Flatten(Layer):
    def __init__(self, spec, in_shape, **_):
        super().__init__(spec, in_shape)

    @property
    def out_shape(self):
        return (int(np.prod(self.in_shape)),)

    def forward(self, x):
        self._check_input(x)
        return x.reshape(x.shape[0], -1)

    def backward(self, dout):
        return dout.reshape((dout.shape[0],) + self.in_shape)


class Dense(Layer):
    def __init__(self, spec, in_shape, rng=None, dtype=np.float64):
        super().__init__(spec, in_shape)
        if len(self.in_shape) != 1:
            raise ShapeMismatch(f"{spec}: dense input must be a vector, got {self.in_shape}")
        (fan_in,) = self.in_shape
        rng = rng or np.random.default_rng(0)
        self.params["W"] = (rng.standard_normal((fan_in, spec.units))
                            * math.sqrt(2.0 / fan_in)).astype(dtype)
        self.params["b"] = np.zeros(spec.units, dtype=dtype)

    @property
    def out_shape(self):
        return (self.spec.units,)

    def forward(self, x):
        self._check_input(x)
        self._x = x
        z = x @ self.params["W"] + self.params["b"]
        if self.spec.activation == "relu":
            self._active = z > 0
            return _relu(z)
        self._active = None
        return z

    def backward(self, dout):
        dz = dout if self._active is None else dout * self._active
        self.grads = {"W": self._x.T @ dz, "b": dz.sum(axis=0)}
        return dz @ self.params["W"].T


LAYER_TYPES = {"conv": Conv2D, "maxpool": MaxPool2D, "flatten": Flatten, "dense": Dense}


def conv_forward(x: np.ndarray, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Single-sample same-padded 3x3 convolution + ReLU on an (H, W, C) array."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3 or x.shape[2] != W.shape[2]:
        raise ChannelMismatch(f"input has {x.shape[-1]} channels, kernel expects {W.shape[2]}")
    layer = Conv2D(LayerSpec("conv", W.shape[3]), x.shape)
    layer.params.update(W=np.asarray(W, np.float64), b=np.asarray(b, np.float64))
    return layer.forward(x[None])[0]


def maxpool_forward(x: np.ndarray, ceil_mode: bool = True) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    layer = MaxPool2D(LayerSpec("maxpool", ceil_mode=ceil_mode), x.shape)
    return layer.forward(x[None])[0]


def dense_forward(x: np.ndarray, W: np.ndarray, b: np.ndarray,
                  activation: str = "linear") -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != W.shape[0]:
        raise ShapeMismatch(f"input length {x.shape} does not match weights {W.shape}")
    layer = Dense(LayerSpec("dense", W.shape[1], activation), x.shape)
    layer.params.update(W=np.asarray(W, np.float64), b=np.asarray(b, np.float64))
    return layer.forward(x[None])[0]
