from __future__ import annotations

import numpy as np


class Adam:
    """Adam with bias correction, updating parameter arrays in place."""

    def __init__(self, params, beta1=0.9, beta2=0.999, eps=1e-8):
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for *_, p in params]
        self.v = [np.zeros_like(p) for *_, p in params]

    def step(self, params, grads, learning_rate):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        corr1 = 1.0 - b1 ** self.t
        corr2 = 1.0 - b2 ** self.t
        for (*_, p), g, m, v in zip(params, grads, self.m, self.v):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * (g * g)
            p -= learning_rate * (m / corr1) / (np.sqrt(v / corr2) + self.eps)


def adam_step(network, gradients, learning_rate=None):
    lr = network.config.learning_rate if learning_rate is None else learning_rate
    network.optimizer.step(network.parameters(), gradients, lr)
    return network
