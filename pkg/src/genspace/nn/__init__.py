"""Numpy convolutional networks with analytic gradients."""

from .layers import LayerSpec, conv_forward, dense_forward, maxpool_forward
from .network import (Network, NetworkConfig, TargetNormalizer, architecture_specs,
                      build_network, load_network, mae_loss, output_shapes, save_network)
from .optim import Adam, adam_step
from .training import TrainingHistory, predict_bcs, train

__all__ = [
    "Adam", "LayerSpec", "Network", "NetworkConfig", "TargetNormalizer", "TrainingHistory",
    "adam_step", "architecture_specs", "build_network", "conv_forward", "dense_forward",
    "load_network", "mae_loss", "maxpool_forward", "output_shapes", "predict_bcs",
    "save_network", "train",
]
