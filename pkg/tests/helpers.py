"""Shared test utilities: reference implementations and gradient checking."""

from __future__ import annotations

import numpy as np

from fontdapt.nn.ops import ConvParams


def conv2d_reference(x, p: ConvParams):
    """Direct six-nested-loop cross-correlation. Deliberately slow."""
    x = np.asarray(x, dtype=np.float32)
    oc, ic, kh, kw = p.weights.shape
    n, c, h, w = x.shape
    xp = np.pad(x, ((0, 0), (0, 0), (p.pad, p.pad), (p.pad, p.pad)))
    oh = (h + 2 * p.pad - kh) // p.stride + 1
    ow = (w + 2 * p.pad - kw) // p.stride + 1
    out = np.zeros((n, oc, oh, ow), dtype=np.float64)
    for b in range(n):
        for o in range(oc):
            for i in range(oh):
                for j in range(ow):
                    acc = 0.0
                    for ci in range(ic):
                        for u in range(kh):
                            for v in range(kw):
                                acc += (xp[b, ci, i * p.stride + u, j * p.stride + v]
                                        * p.weights[o, ci, u, v])
                    out[b, o, i, j] = acc + p.bias[o]
    return out.astype(np.float32)


def maxpool_reference(x, window, stride):
    x = np.asarray(x)
    n, c, h, w = x.shape
    oh = (h - window) // stride + 1
    ow = (w - window) // stride + 1
    out = np.zeros((n, c, oh, ow), dtype=x.dtype)
    for b in range(n):
        for ci in range(c):
            for i in range(oh):
                for j in range(ow):
                    out[b, ci, i, j] = x[b, ci, i * stride:i * stride + window,
                                         j * stride:j * stride + window].max()
    return out


def numeric_grad(f, x, eps=1e-3):
    """Central finite differences of scalar f w.r.t. every element of x."""
    x = np.asarray(x, dtype=np.float32)
    g = np.zeros(x.shape, dtype=np.float64)
    flat = x.reshape(-1)
    gflat = g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        fp = f(x)
        flat[i] = orig - eps
        fm = f(x)
        flat[i] = orig
        gflat[i] = (fp - fm) / (2 * eps)
    return g


def rel_err(a, b):
    """Norm-ratio gradient-check metric: ||a-b|| / (||a|| + ||b||).

    Robust to float32 finite-difference noise on near-zero entries, which an
    elementwise ratio is not.
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    denom = np.linalg.norm(a) + np.linalg.norm(b)
    if denom == 0.0:
        return 0.0
    return float(np.linalg.norm(a - b) / denom)
