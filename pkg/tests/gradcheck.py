"""Central finite-difference gradient checks shared by unit and acceptance tests."""

import numpy as np

from genspace.nn import LayerSpec, NetworkConfig, build_network

TINY_LAYERS = [LayerSpec("conv", 4), LayerSpec("maxpool"), LayerSpec("flatten"),
               LayerSpec("dense", 5), LayerSpec("dense", 2, "linear")]


def tiny_network(seed):
    cfg = NetworkConfig(architecture="tiny", input_shape=(6, 6, 3), output_count=2,
                        learning_rate=0.01, seed=seed, layers=TINY_LAYERS)
    return build_network(cfg)


def max_relative_error(net, x, weights, eps=1e-4):
    """Loss = sum(output * weights): piecewise linear in every single parameter."""
    net.forward(x)
    analytic = [g.copy() for g in net.backward(x, weights)]
    worst = 0.0
    for (_, _, param), grad in zip(net.parameters(), analytic):
        flat = param.reshape(-1)
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + eps
            up = float((net.forward(x) * weights).sum())
            flat[k] = orig - eps
            down = float((net.forward(x) * weights).sum())
            flat[k] = orig
            numeric = (up - down) / (2 * eps)
            a = grad.reshape(-1)[k]
            scale = max(abs(a), abs(numeric))
            if scale < 1e-10:
                continue
            worst = max(worst, abs(a - numeric) / scale)
    return worst


def gradient_check_trial(seed):
    rng = np.random.default_rng(1000 + seed)
    net = tiny_network(seed)
    # nudge biases away from zero so ReLU kinks are not sitting at the origin
    for _, name, p in net.parameters():
        if name == "b":
            p[...] = rng.normal(0, 0.1, p.shape)
    x = rng.normal(size=(2, 6, 6, 3))
    weights = rng.normal(size=(2, 2))
    return max_relative_error(net, x, weights)
