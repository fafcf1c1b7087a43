from __future__ import annotations

import io
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import ConfigError, ShapeMismatch, StaleCache
from .layers import LAYER_TYPES, Layer, LayerSpec
from .optim import Adam

FORMAT_VERSION = 1

DEFAULT_LEARNING_RATES = {"basic": 0.01, "vgg16": 0.0005}

_VGG16_CONV_BLOCKS = ((64, 2), (128, 2), (256, 3), (512, 3), (512, 3))


def architecture_specs(architecture: str, output_count: int) -> list[LayerSpec]:
    """Expand a named architecture into its layer list (final layer linear)."""
    conv = lambda f: LayerSpec("conv", f)  # noqa: E731
    pool = LayerSpec("maxpool")
    if architecture == "basic":
        specs = [conv(32), pool, conv(64), pool, conv(64), LayerSpec("flatten"),
                 LayerSpec("dense", 64)]
    elif architecture == "vgg16":
        specs = []
        for filters, repeat in _VGG16_CONV_BLOCKS:
            specs += [conv(filters)] * repeat + [pool]
        specs += [LayerSpec("flatten"), LayerSpec("dense", 4096), LayerSpec("dense", 4096),
                  LayerSpec("dense", 1000)]
    else:
        raise ConfigError(f"unknown architecture {architecture!r}")
    return specs + [LayerSpec("dense", output_count, "linear")]


@dataclass
class NetworkConfig:
    architecture: str = "basic"
    input_shape: tuple[int, int, int] = (10, 10, 5)
    output_count: int = 4
    learning_rate: Optional[float] = None
    epochs: int = 100
    batch_size: int = 32
    seed: int = 0
    early_stopping: Optional[tuple[int, float]] = None
    dtype: str = "float64"
    layers: Optional[list[LayerSpec]] = None

    def __post_init__(self):
        self.input_shape = tuple(int(d) for d in self.input_shape)
        if self.learning_rate is None:
            self.learning_rate = DEFAULT_LEARNING_RATES.get(self.architecture, 0.001)
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be positive")
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigError("epochs and batch_size must be >= 1")
        if self.output_count < 1:
            raise ConfigError("output_count must be >= 1")
        if len(self.input_shape) != 3 or min(self.input_shape) < 1:
            raise ConfigError(f"input_shape must be three positive ints, got {self.input_shape}")
        if self.early_stopping is not None:
            self.early_stopping = (int(self.early_stopping[0]), float(self.early_stopping[1]))

    def layer_specs(self) -> list[LayerSpec]:
        if self.layers is not None:
            return list(self.layers)
        return architecture_specs(self.architecture, self.output_count)


@dataclass
class TargetNormalizer:
    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, targets: np.ndarray) -> "TargetNormalizer":
        targets = np.asarray(targets, dtype=np.float64)
        std = targets.std(axis=0)
        return cls(targets.mean(axis=0), np.where(std > 0, std, 1.0))

    @classmethod
    def identity(cls, n: int) -> "TargetNormalizer":
        return cls(np.zeros(n), np.ones(n))

    def normalize(self, y):
        return (np.asarray(y, dtype=np.float64) - self.mean) / self.std

    def denormalize(self, z):
        return np.asarray(z, dtype=np.float64) * self.std + self.mean


class Network:
    """A layer stack with cached activations for one backward pass."""

    def __init__(self, config: NetworkConfig, layers: list[Layer]):
        self.config = config
        self.layers = layers
        self.normalizer = TargetNormalizer.identity(layers[-1].out_shape[0])
        self.optimizer = Adam(self.parameters())
        self._cached_input = None

    @property
    def dtype(self):
        return np.dtype(self.config.dtype)

    @property
    def input_shape(self):
        return self.config.input_shape

    @property
    def embedding_width(self) -> int:
        return self.layers[-2].out_shape[0]

    def parameters(self) -> list[tuple[int, str, np.ndarray]]:
        return [(i, name, arr) for i, layer in enumerate(self.layers)
                for name, arr in layer.params.items()]

    def gradients(self) -> list[np.ndarray]:
        return [layer.grads[name] for i, layer in enumerate(self.layers)
                for name in layer.params]

    def _prepare(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=self.dtype)
        if x.ndim == 3:
            x = x[None]
        if x.shape[1:] != self.input_shape:
            raise ShapeMismatch(f"network expects input {self.input_shape}, got {x.shape[1:]}")
        return x

    def forward(self, x, stop: Optional[int] = None) -> np.ndarray:
        """Run layers ``[0, stop)`` on a batch; a full pass primes the backward cache."""
        x = self._prepare(x)
        batch = x
        layers = self.layers if stop is None else self.layers[:stop]
        for layer in layers:
            x = layer.forward(x)
        self._cached_input = batch if stop is None else None
        return x

    def backward(self, batch, grad_out) -> list[np.ndarray]:
        """Parameter gradients for the batch of the preceding full forward pass."""
        batch = self._prepare(batch)
        cached = self._cached_input
        if cached is None or cached.shape != batch.shape or not np.array_equal(cached, batch):
            raise StaleCache("backward called without a matching forward pass")
        grad = np.asarray(grad_out, dtype=self.dtype)
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return self.gradients()

    def embed(self, x, batch_size: int = 64) -> np.ndarray:
        """Post-activation output of the penultimate (dense) layer."""
        x = self._prepare(x)
        chunks = [self.forward(x[i:i + batch_size], stop=len(self.layers) - 1)
                  for i in range(0, len(x), batch_size)]
        return np.concatenate(chunks).astype(np.float64)

    def predict_normalized(self, x, batch_size: int = 64) -> np.ndarray:
        x = self._prepare(x)
        chunks = []
        for i in range(0, len(x), batch_size):
            chunks.append(self.forward(x[i:i + batch_size]))
        self._cached_input = None
        return np.concatenate(chunks).astype(np.float64)

    def summary(self) -> str:
        rows = [f"input {self.input_shape}"]
        for layer in self.layers:
            n = sum(p.size for p in layer.params.values())
            rows.append(f"{str(layer.spec):<14} -> {layer.out_shape}  params={n}")
        return "\n".join(rows)


def build_network(config: NetworkConfig) -> Network:
    rng = np.random.default_rng(config.seed)
    dtype = np.dtype(config.dtype)
    specs = config.layer_specs()
    if specs[-1].kind != "dense" or specs[-1].activation != "linear":
        raise ConfigError("final layer must be a linear dense layer")
    if specs[-1].units != config.output_count:
        raise ConfigError("final layer width must equal output_count")
    layers = []
    shape = config.input_shape
    for spec in specs:
        layer = LAYER_TYPES[spec.kind](spec, shape, rng=rng, dtype=dtype)
        layers.append(layer)
        shape = layer.out_shape
    return Network(config, layers)


def output_shapes(config: NetworkConfig) -> list[tuple[int, ...]]:
    """Static shape algebra: output shape of every layer, without allocating weights."""
    from .layers import pooled_size
    from ..errors import ShapeUnderflow

    shape = config.input_shape
    shapes = []
    for spec in config.layer_specs():
        if spec.kind == "conv":
            shape = (shape[0], shape[1], spec.units)
        elif spec.kind == "maxpool":
            shape = (pooled_size(shape[0], spec.ceil_mode), pooled_size(shape[1], spec.ceil_mode),
                     shape[2])
            if min(shape[:2]) < 1:
                raise ShapeUnderflow(f"max pooling reduces a dimension below 1: {shape}")
        elif spec.kind == "flatten":
            shape = (int(np.prod(shape)),)
        else:
            shape = (spec.units,)
        shapes.append(shape)
    return shapes


def mae_loss(pred, target) -> tuple[float, np.ndarray]:
    """Mean absolute error and its gradient with respect to ``pred``."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ShapeMismatch(f"prediction {pred.shape} vs target {target.shape}")
    diff = pred - target
    return float(np.abs(diff).mean()), np.sign(diff) / diff.size


def save_network(network: Network, path: str | Path) -> None:
    """Write architecture, normalizer and weights to a single ``.npz`` file."""
    cfg = network.config
    meta = {
        "format": "genspace-network",
        "version": FORMAT_VERSION,
        "config": {**{k: v for k, v in asdict(cfg).items() if k != "layers"},
                   "layers": [asdict(s) for s in cfg.layer_specs()]},
    }
    arrays = {"normalizer_mean": network.normalizer.mean, "normalizer_std": network.normalizer.std}
    for i, name, arr in network.parameters():
        arrays[f"layer{i:03d}_{name}"] = arr
    buf = io.BytesIO()
    np.savez(buf, meta=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8), **arrays)
    Path(path).write_bytes(buf.getvalue())


def load_network(path: str | Path) -> Network:
    with np.load(Path(path), allow_pickle=False) as data:
        meta = json.loads(bytes(data["meta"]).decode())
        if meta.get("format") != "genspace-network" or meta.get("version") != FORMAT_VERSION:
            raise ConfigError(f"{path}: unsupported model file")
        cfg = dict(meta["config"])
        cfg["layers"] = [LayerSpec(**s) for s in cfg["layers"]]
        if cfg.get("early_stopping") is not None:
            cfg["early_stopping"] = tuple(cfg["early_stopping"])
        network = build_network(NetworkConfig(**cfg))
        for i, name, arr in network.parameters():
            arr[...] = data[f"layer{i:03d}_{name}"]
        network.normalizer = TargetNormalizer(data["normalizer_mean"].copy(),
                                              data["normalizer_std"].copy())
    return network
