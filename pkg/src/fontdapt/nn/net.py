"""Thin layer objects over the functional ops, for composing whole networks.

Each layer caches what its backward pass needs during forward. A Sequential
chains them and exposes flat parameter/gradient lists for the optimizer.
"""

from __future__ import annotations

import numpy as np

from . import ops
from .ops import ConvParams, FCParams


class ConvLayer:
    def __init__(self, params: ConvParams, trainable: bool = True,
                 needs_input_grad: bool = True):
        self.p = params
        self.trainable = trainable
        # first layer of a network can skip the (expensive) input gradient
        self.needs_input_grad = needs_input_grad
        self._x = None
        self._cache = None
        self._ws = {}  # reusable scratch buffers (im2col, padding)
        self.grad_w = None
        self.grad_b = None

    @classmethod
    def create(cls, in_ch, out_ch, k, pad, rng, stride=1):
        fan_in = in_ch * k * k
        fan_out = out_ch * k * k
        w = ops.glorot_uniform((out_ch, in_ch, k, k), fan_in, fan_out, rng)
        b = np.zeros(out_ch, dtype=np.float32)
        return cls(ConvParams(w, b, stride=stride, pad=pad))

    def forward(self, x):
        self._x = x
        self._cache = {}
        return ops._conv_forward(x, self.p, self._cache, self._ws)

    def backward(self, grad_out):
        grad_x, self.grad_w, self.grad_b = ops._conv_backward(
            self._x, self.p, grad_out, self._cache,
            need_input_grad=self.needs_input_grad, ws=self._ws)
        return grad_x

    def params(self):
        return [self.p.weights, self.p.bias] if self.trainable else []

    def grads(self):
        return [self.grad_w, self.grad_b] if self.trainable else []


class MaxPoolLayer:
    def __init__(self, window: int, stride: int | None = None):
        self.window = window
        self.stride = stride if stride is not None else window
        self._argmax = None
        self._local = None
        self._hw = None

    def forward(self, x):
        self._hw = x.shape[2:]
        h, w = self._hw
        if self.window == 2 and self.stride == 2 and h % 2 == 0 and w % 2 == 0:
            out, self._local = ops._maxpool2x2_forward(x)
            self._argmax = None
            return out
        self._local = None
        out, self._argmax = ops.maxpool_forward(x, self.window, self.stride)
        return out

    def backward(self, grad_out):
        if self._local is not None:
            return ops._maxpool2x2_backward(self._local, grad_out, self._hw)
        return ops.maxpool_backward(self._argmax, grad_out, self._hw)

    def params(self):
        return []

    def grads(self):
        return []


class ReLULayer:
    def __init__(self):
        self._x = None

    def forward(self, x):
        self._x = x
        return ops.relu_forward(x)

    def backward(self, grad_out):
        return ops.relu_backward(self._x, grad_out)

    def params(self):
        return []

    def grads(self):
        return []


class FlattenLayer:
    def __init__(self):
        self._shape = None

    def forward(self, x):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad_out):
        return grad_out.reshape(self._shape)

    def params(self):
        return []

    def grads(self):
        return []


class FCLayer:
    def __init__(self, params: FCParams, trainable: bool = True):
        self.p = params
        self.trainable = trainable
        self._x = None
        self.grad_w = None
        self.grad_b = None

    @classmethod
    def create(cls, in_dim, out_dim, rng):
        w = ops.glorot_uniform((out_dim, in_dim), in_dim, out_dim, rng)
        b = np.zeros(out_dim, dtype=np.float32)
        return cls(FCParams(w, b))

    def forward(self, x):
        self._x = x
        return ops.fc_forward(x, self.p)

    def backward(self, grad_out):
        grad_x, self.grad_w, self.grad_b = ops.fc_backward(self._x, self.p, grad_out)
        return grad_x

    def params(self):
        return [self.p.weights, self.p.bias] if self.trainable else []

    def grads(self):
        return [self.grad_w, self.grad_b] if self.trainable else []


class UpsampleLayer:
    def __init__(self, factor: int):
        self.factor = factor

    def forward(self, x):
        return ops.upsample_nearest(x, self.factor)

    def backward(self, grad_out):
        return ops.upsample_nearest_backward(grad_out, self.factor)

    def params(self):
        return []

    def grads(self):
        return []


class Sequential:
    def __init__(self, layers):
        self.layers = list(layers)

    def forward(self, x):
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def backward(self, grad):
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    def params(self):
        out = []
        for layer in self.layers:
            out.extend(layer.params())
        return out

    def grads(self):
        out = []
        for layer in self.layers:
            out.extend(layer.grads())
        return out
