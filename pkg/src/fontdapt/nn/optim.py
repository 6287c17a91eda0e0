"""Minibatch SGD with classical momentum, L2 weight decay, and grad clipping."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class SGDConfig:
    learning_rate: float = 0.01
    momentum: float = 0.9
    weight_decay: float = 0.0
    batch_size: int = 32

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.weight_decay < 0:
            raise ValueError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")


def sgd_step(params, grads, velocity, cfg: SGDConfig):
    """v <- momentum*v - lr*(g + wd*p); p <- p + v, in place per tensor.

    `params`, `grads`, `velocity` are parallel lists of arrays.
    """
    if not (len(params) == len(grads) == len(velocity)):
        raise ValueError("params/grads/velocity length mismatch")
    for p, g, v in zip(params, grads, velocity):
        if p.shape != g.shape or p.shape != v.shape:
            raise ValueError(f"shape mismatch in sgd_step: {p.shape}/{g.shape}/{v.shape}")
        np.multiply(v, np.float32(cfg.momentum), out=v)
        v -= np.float32(cfg.learning_rate) * (g + np.float32(cfg.weight_decay) * p)
        p += v
    return params, velocity


def clip_gradients(grads, max_norm: float) -> float:
    """Scale `grads` in place so their global L2 norm is at most `max_norm`.

    Returns the pre-clip norm. A non-positive `max_norm` disables clipping.
    """
    total = 0.0
    for g in grads:
        total += float(np.vdot(g, g))
    norm = math.sqrt(total)
    if max_norm > 0 and norm > max_norm:
        scale = np.float32(max_norm / norm)
        for g in grads:
            np.multiply(g, scale, out=g)
    return norm
