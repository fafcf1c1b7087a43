from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import NonFiniteLoss, ShapeMismatch
from ..metrics import BC_NAMES, BCVector
from .network import Network, NetworkConfig, TargetNormalizer, build_network, mae_loss
from .optim import adam_step

log = logging.getLogger(__name__)


@dataclass
class TrainingHistory:
    losses: list[float] = field(default_factory=list)
    seconds: list[float] = field(default_factory=list)
    stopped_early: bool = False

    def __len__(self):
        return len(self.losses)


def _stack_targets(targets) -> np.ndarray:
    rows = [t.as_array() if isinstance(t, BCVector) else np.asarray(t, dtype=np.float64)
            for t in targets]
    y = np.asarray(rows, dtype=np.float64)
    return y[:, None] if y.ndim == 1 else y


def train(config: NetworkConfig, train_levels: Sequence) -> tuple[Network, TrainingHistory]:
    """Fit a fresh network to ``(one-hot tensor, BC vector)`` pairs with MAE + Adam.

    Targets are z-scored with training statistics kept on the network, so
    the loss is on the normalized scale.  Raises NonFiniteLoss on divergence.
    """
    if len(train_levels) < config.batch_size:
        raise ShapeMismatch(
            f"{len(train_levels)} training pairs, fewer than batch size {config.batch_size}")
    x = np.stack([np.asarray(t) for t, _ in train_levels]).astype(config.dtype)
    if x.shape[1:] != config.input_shape:
        raise ShapeMismatch(f"levels have shape {x.shape[1:]}, config says {config.input_shape}")
    y = _stack_targets([b for _, b in train_levels])
    if y.shape[1] != config.output_count:
        raise ShapeMismatch(f"targets have {y.shape[1]} values, config says {config.output_count}")

    network = build_network(config)
    network.normalizer = TargetNormalizer.fit(y)
    y_norm = network.normalizer.normalize(y)
    rng = np.random.default_rng(config.seed)
    history = TrainingHistory()
    best, waited = np.inf, 0
    n = len(x)
    for epoch in range(1, config.epochs + 1):
        start = time.perf_counter()
        order = rng.permutation(n)
        total = 0.0
        for lo in range(0, n, config.batch_size):
            idx = order[lo:lo + config.batch_size]
            batch = x[idx]
            pred = network.forward(batch)
            loss, grad = mae_loss(pred, y_norm[idx])
            if not np.isfinite(loss):
                raise NonFiniteLoss(epoch, loss)
            grads = network.backward(batch, grad)
            adam_step(network, grads)
            total += loss * len(idx)
        epoch_loss = total / n
        if not np.isfinite(epoch_loss) or not all(np.isfinite(p).all() for *_, p in network.parameters()):
            raise NonFiniteLoss(epoch, epoch_loss)
        history.losses.append(epoch_loss)
        history.seconds.append(time.perf_counter() - start)
        log.debug("epoch %d loss %.5f", epoch, epoch_loss)
        if config.early_stopping is not None:
            patience, min_delta = config.early_stopping
            if epoch_loss < best - min_delta:
                best, waited = epoch_loss, 0
            else:
                waited += 1
                if waited >= patience:
                    history.stopped_early = True
                    break
    return network, history


def predict_bcs(network: Network, level, domain: str | None = None):
    """Predicted BCs in raw units; a BCVector when ``domain`` names the BC order."""
    x = np.asarray(level)
    single = x.ndim == 3
    out = network.normalizer.denormalize(network.predict_normalized(x))
    if domain is not None and single:
        names = BC_NAMES[domain]
        if len(names) != out.shape[1]:
            raise ShapeMismatch(f"network predicts {out.shape[1]} values, {domain} has {len(names)} BCs")
        return BCVector(domain, tuple((n, float(v)) for n, v in zip(names, out[0])))
    return out[0] if single else out
