"""Stacked convolutional auto-encoder for unsupervised feature pretraining.

The encoder is two conv+pool+relu stages whose topology matches the
classifier's first two layers exactly, so its weights can be exported and
imported there. The decoder mirrors the encoder with nearest-neighbor
upsampling and reversed channel counts. Trained end-to-end with MSE on
unlabeled patches.
"""

from __future__ import annotations

import csv

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import DivergenceError
from .nn import SGDConfig, mse_loss, read_bundle, sgd_step, write_bundle
from .nn.net import ConvLayer, MaxPoolLayer, ReLULayer, Sequential, UpsampleLayer
from .rng import SplitMix64, derive_seed
from .validation import check_tensor4

PATCH_SIZE = 48
BOTTLENECK_SHAPE = (64, 12, 12)

# Subtracted from inputs before the first conv (images are mostly white, so
# raw activations carry a large DC component that slows SGD). The classifier
# applies the same shift, keeping exported encoder weights compatible.
INPUT_SHIFT = np.float32(0.9)

ENCODER_TENSOR_NAMES = ("conv1.w", "conv1.b", "conv2.w", "conv2.b")


class ConvAutoencoder(BaseEstimator, TransformerMixin):
    """Mirror-symmetric conv auto-encoder over square grayscale patches.

    fit() trains encoder+decoder jointly with minibatch SGD on MSE;
    transform() returns the bottleneck features. The patch size is fixed at
    48 so the encoder is drop-in compatible with the classifier prefix.
    """

    def __init__(self, epochs=20, learning_rate=0.01, momentum=0.9,
                 weight_decay=0.0, batch_size=32, seed=0):
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.batch_size = batch_size
        self.seed = seed

    # -- model construction ------------------------------------------------

    def build(self):
        """Seeded weight initialization; idempotent per (seed)."""
        rng = SplitMix64(derive_seed(self.seed, "scae-init"))
        enc1 = ConvLayer.create(1, 32, 5, 2, rng)
        enc1.needs_input_grad = False  # first layer: no gradient consumer below
        enc2 = ConvLayer.create(32, 64, 3, 1, rng)
        dec2 = ConvLayer.create(64, 32, 3, 1, rng)
        dec1 = ConvLayer.create(32, 1, 5, 2, rng)
        # conv -> pool -> relu ordering must match the classifier prefix
        self.encoder_ = Sequential([enc1, MaxPoolLayer(2), ReLULayer(),
                                    enc2, MaxPoolLayer(2), ReLULayer()])
        self.decoder_ = Sequential([UpsampleLayer(2), dec2, ReLULayer(),
                                    UpsampleLayer(2), dec1])
        self._enc_convs = (enc1, enc2)
        self.loss_curve_ = []
        return self

    def _ensure_built(self):
        if not hasattr(self, "encoder_"):
            self.build()

    # -- core passes -------------------------------------------------------

    def encode(self, X):
        X = self._check_patches(X)
        self._ensure_built()
        return self.encoder_.forward(X - INPUT_SHIFT)

    def decode(self, Z):
        Z = check_tensor4(Z, "bottleneck")
        if Z.shape[1:] != BOTTLENECK_SHAPE:
            raise ValueError(f"bottleneck must be (n, {BOTTLENECK_SHAPE[0]}, "
                             f"{BOTTLENECK_SHAPE[1]}, {BOTTLENECK_SHAPE[2]}), "
                             f"got {Z.shape}")
        self._ensure_built()
        return self.decoder_.forward(Z)

    def reconstruct(self, X):
        """decode(encode(X)), clamped to [0,1] for display."""
        return np.clip(self.decode(self.encode(X)), 0.0, 1.0)

    def transform(self, X):
        return self.encode(X)

    # -- training ----------------------------------------------------------

    def fit(self, X, y=None):
        X = self._check_patches(X)
        if X.shape[0] == 0:
            raise ValueError("patch set must be non-empty")
        self._ensure_built()
        cfg = SGDConfig(learning_rate=self.learning_rate, momentum=self.momentum,
                        weight_decay=self.weight_decay, batch_size=self.batch_size)
        params = self.encoder_.params() + self.decoder_.params()
        velocity = [np.zeros_like(p) for p in params]
        n = X.shape[0]
        order = np.arange(n)
        self.loss_curve_ = []
        for epoch in range(self.epochs):
            SplitMix64(derive_seed(self.seed, "scae-order", epoch)).shuffle(order)
            total = 0.0
            for start in range(0, n, cfg.batch_size):
                batch = X[order[start:start + cfg.batch_size]]
                recon = self.decoder_.forward(
                    self.encoder_.forward(batch - INPUT_SHIFT))
                loss, grad = mse_loss(recon, batch)
                if not np.isfinite(loss):
                    raise DivergenceError(
                        f"non-finite reconstruction loss at epoch {epoch} "
                        f"(learning rate too high?)")
                total += loss * batch.shape[0]
                self.encoder_.backward(self.decoder_.backward(grad))
                grads = self.encoder_.grads() + self.decoder_.grads()
                sgd_step(params, grads, velocity, cfg)
            self.loss_curve_.append(total / n)
        return self

    def training_mse(self, X):
        """Mean squared reconstruction error over a patch set (unclamped)."""
        X = self._check_patches(X)
        self._ensure_built()
        total = 0.0
        for start in range(0, X.shape[0], 256):
            batch = X[start:start + 256]
            recon = self.decoder_.forward(
                self.encoder_.forward(batch - INPUT_SHIFT))
            total += mse_loss(recon, batch)[0] * batch.shape[0]
        return total / X.shape[0]

    # -- encoder exchange ---------------------------------------------------

    def export_encoder(self) -> bytes:
        """Encoder weights as an FDW1 bundle with exactly 4 tensors."""
        self._ensure_built()
        enc1, enc2 = self._enc_convs
        return write_bundle({
            "conv1.w": enc1.p.weights, "conv1.b": enc1.p.bias,
            "conv2.w": enc2.p.weights, "conv2.b": enc2.p.bias,
        })

    def import_encoder(self, bundle: bytes):
        tensors = read_bundle(bundle)
        self._ensure_built()
        enc1, enc2 = self._enc_convs
        targets = {"conv1.w": enc1.p.weights, "conv1.b": enc1.p.bias,
                   "conv2.w": enc2.p.weights, "conv2.b": enc2.p.bias}
        staged = {}
        for name, dest in targets.items():
            if name not in tensors:
                raise ValueError(f"bundle missing tensor {name!r}")
            if tensors[name].shape != dest.shape:
                raise ValueError(f"tensor {name!r} shape {tensors[name].shape} "
                                 f"does not match {dest.shape}")
            staged[name] = tensors[name]
        for name, dest in targets.items():
            dest[...] = staged[name]
        return self

    def write_loss_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "mean_mse"])
            for epoch, mse in enumerate(getattr(self, "loss_curve_", [])):
                writer.writerow([epoch, f"{mse:.8f}"])

    # -- helpers -------------------------------------------------------------

    @staticmethod
    def _check_patches(X):
        X = check_tensor4(X, "patches")
        if X.shape[1] != 1 or X.shape[2] != PATCH_SIZE or X.shape[3] != PATCH_SIZE:
            raise ValueError(f"patches must be (n, 1, {PATCH_SIZE}, {PATCH_SIZE}), "
                             f"got {X.shape}")
        return X


# Thin functional wrappers around the estimator, for callers that prefer
# free functions over the fit/transform surface.

def build_scae(seed: int) -> ConvAutoencoder:
    return ConvAutoencoder(seed=seed).build()


def train_scae(model: ConvAutoencoder, patches, cfg: SGDConfig, epochs: int):
    model.epochs = epochs
    model.learning_rate = cfg.learning_rate
    model.momentum = cfg.momentum
    model.weight_decay = cfg.weight_decay
    model.batch_size = cfg.batch_size
    if epochs == 0:
        model._ensure_built()
        model.loss_curve_ = []
        return model, []
    model.fit(patches)
    return model, list(model.loss_curve_)


def reconstruct(model: ConvAutoencoder, patch):
    return model.reconstruct(patch)


def export_encoder(model: ConvAutoencoder) -> bytes:
    return model.export_encoder()
