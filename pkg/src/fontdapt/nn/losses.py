"""Loss heads. Losses accumulate in float64; gradients come back as float32."""

from __future__ import annotations

import numpy as np

from ..validation import as_f32, check_same_shape


def softmax_cross_entropy(logits, labels):
    """Mean negative log-likelihood over the batch, with max-subtraction.

    Returns (loss, grad_logits) where grad = (softmax - onehot) / batch.
    """
    logits = as_f32(logits)
    labels = np.asarray(labels, dtype=np.int64)
    if logits.ndim != 2 or labels.shape != (logits.shape[0],):
        raise ValueError(f"logits {logits.shape} vs labels {labels.shape}")
    n, num_classes = logits.shape
    if labels.min() < 0 or labels.max() >= num_classes:
        raise ValueError(f"label out of range [0, {num_classes}): "
                         f"min {labels.min()}, max {labels.max()}")
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    probs = exp / exp.sum(axis=1, keepdims=True)
    logp = shifted - np.log(exp.sum(axis=1, keepdims=True))
    loss = float(-logp[np.arange(n), labels].sum(dtype=np.float64) / n)
    grad = probs.copy()
    grad[np.arange(n), labels] -= 1.0
    return loss, (grad / n).astype(np.float32)


def mse_loss(recon, target):
    """Mean squared error and its gradient w.r.t. the reconstruction."""
    recon = as_f32(recon)
    target = as_f32(target)
    check_same_shape(recon, target, "mse_loss")
    diff = recon.astype(np.float64) - target.astype(np.float64)
    loss = float(np.mean(diff * diff))
    grad = (2.0 * diff / diff.size).astype(np.float32)
    return loss, grad
