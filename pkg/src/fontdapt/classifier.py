"""Eight-layer CNN font classifier over 48-pixel-high text-line images.

The first two conv layers (the "prefix") are topology-compatible with the
auto-encoder's encoder, so pretrained weights can be imported and optionally
frozen. Training consumes synthetic-domain images only — feeding anything
tagged differently is a protocol violation, because the whole point of the
setup is that the real domain stays label-free.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .exceptions import DivergenceError, ProtocolError
from .nn import (SGDConfig, clip_gradients, read_bundle, sgd_step,
                 softmax_cross_entropy, write_bundle)
from .nn.net import (ConvLayer, FCLayer, FlattenLayer, MaxPoolLayer,
                     ReLULayer, Sequential)
from .rng import SplitMix64, derive_seed
from .scae import INPUT_SHIFT
from .validation import check_tensor4

INPUT_SIZE = 48
NUM_EVAL_CROPS = 5
ARCH_VERSION = 1
SYNTHETIC_DOMAIN = "synthetic"

# bundle tensor names in network order
TENSOR_NAMES = tuple(f"{layer}.{kind}"
                     for layer in ("conv1", "conv2", "conv3", "conv4", "conv5",
                                   "fc6", "fc7", "fc8")
                     for kind in ("w", "b"))

PREFIX_TENSOR_NAMES = ("conv1.w", "conv1.b", "conv2.w", "conv2.b")


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    train_top1_err: float
    val_top1_err: float | None = None
    val_top5_err: float | None = None
    wall_time_s: float = 0.0


@dataclass
class TrainReport:
    epochs: list[EpochRecord] = field(default_factory=list)
    total_wall_time_s: float = 0.0

    def to_dict(self):
        return {
            "total_wall_time_s": self.total_wall_time_s,
            "epochs": [vars(e) for e in self.epochs],
        }


class FontCNNClassifier(BaseEstimator, ClassifierMixin):
    """conv(32,5)-pool-relu / conv(64,3)-pool-relu / 3x conv(64,3)-relu with a
    pool after the last / fc 2304-256-256-C, softmax trained with SGD.

    Wide inputs (height 48, width > 48) are handled by random 48x48 crops
    during training and by averaging softmax outputs over five evenly spaced
    crops at prediction time.
    """

    def __init__(self, num_classes=2, epochs=15, learning_rate=0.01,
                 momentum=0.9, weight_decay=0.0, batch_size=32,
                 clip_grad_norm=5.0, seed=0):
        self.num_classes = num_classes
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.batch_size = batch_size
        self.clip_grad_norm = clip_grad_norm
        self.seed = seed

    # -- model construction --------------------------------------------------

    def build(self):
        if self.num_classes < 2:
            raise ValueError(f"num_classes must be >= 2, got {self.num_classes}")
        rng = SplitMix64(derive_seed(self.seed, "cnn-init"))
        conv1 = ConvLayer.create(1, 32, 5, 2, rng)
        conv1.needs_input_grad = False  # nothing below the first layer
        conv2 = ConvLayer.create(32, 64, 3, 1, rng)
        conv3 = ConvLayer.create(64, 64, 3, 1, rng)
        conv4 = ConvLayer.create(64, 64, 3, 1, rng)
        conv5 = ConvLayer.create(64, 64, 3, 1, rng)
        fc6 = FCLayer.create(64 * 6 * 6, 256, rng)
        fc7 = FCLayer.create(256, 256, rng)
        fc8 = FCLayer.create(256, self.num_classes, rng)
        self.net_ = Sequential([
            conv1, MaxPoolLayer(2), ReLULayer(),
            conv2, MaxPoolLayer(2), ReLULayer(),
            conv3, ReLULayer(),
            conv4, ReLULayer(),
            conv5, MaxPoolLayer(2), ReLULayer(),
            FlattenLayer(),
            fc6, ReLULayer(),
            fc7, ReLULayer(),
            fc8,
        ])
        self._named = dict(zip(
            ("conv1", "conv2", "conv3", "conv4", "conv5", "fc6", "fc7", "fc8"),
            (conv1, conv2, conv3, conv4, conv5, fc6, fc7, fc8)))
        self.frozen_prefix_ = False
        self.classes_ = np.arange(self.num_classes)
        return self

    def _ensure_built(self):
        if not hasattr(self, "net_"):
            self.build()

    def named_tensors(self) -> dict:
        """Live parameter arrays keyed by bundle tensor name, network order."""
        self._ensure_built()
        out = {}
        for lname, layer in self._named.items():
            out[f"{lname}.w"] = layer.p.weights
            out[f"{lname}.b"] = layer.p.bias
        return out

    # -- encoder import -------------------------------------------------------

    def import_encoder(self, bundle: bytes, frozen_prefix: bool = True):
        """Load pretrained conv1/conv2 weights; on any mismatch the model is
        left untouched. With frozen_prefix the two layers stop training."""
        tensors = read_bundle(bundle)
        self._ensure_built()
        targets = {name: self.named_tensors()[name] for name in PREFIX_TENSOR_NAMES}
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
        self.frozen_prefix_ = bool(frozen_prefix)
        for lname in ("conv1", "conv2"):
            self._named[lname].trainable = not self.frozen_prefix_
        return self

    # -- training -------------------------------------------------------------

    def fit(self, X, y, domains=None, X_val=None, y_val=None):
        """Minibatch SGD on softmax cross-entropy with per-epoch random crops.

        `domains` carries the per-sample domain tag from the dataset
        manifest; every tag must be synthetic or a ProtocolError is raised.
        Returns self; the per-epoch history lands in `train_report_`.
        """
        X = self._check_inputs(X)
        y = np.asarray(y, dtype=np.int64)
        if y.shape != (X.shape[0],):
            raise ValueError(f"labels shape {y.shape} does not match {X.shape[0]} samples")
        if domains is None:
            raise ProtocolError("supervised training requires per-sample domain "
                                "tags; pass domains= from the dataset manifest")
        domains = list(domains)
        if len(domains) != X.shape[0]:
            raise ValueError(f"{len(domains)} domain tags for {X.shape[0]} samples")
        bad = sorted({d for d in domains if d != SYNTHETIC_DOMAIN})
        if bad:
            raise ProtocolError(
                f"supervised training is synthetic-only; got domain tags {bad} "
                f"(labeled real-domain data would defeat the adaptation protocol)")
        self._ensure_built()
        if y.size and (y.min() < 0 or y.max() >= self.num_classes):
            raise ValueError(f"label out of range [0, {self.num_classes})")

        cfg = SGDConfig(learning_rate=self.learning_rate, momentum=self.momentum,
                        weight_decay=self.weight_decay, batch_size=self.batch_size)
        params = self.net_.params()
        velocity = [np.zeros_like(p) for p in params]
        n = X.shape[0]
        order = np.arange(n)
        report = TrainReport()
        t_start = time.perf_counter()
        for epoch in range(self.epochs):
            t0 = time.perf_counter()
            crops = self._random_crops(X, epoch)
            SplitMix64(derive_seed(self.seed, "train-order", epoch)).shuffle(order)
            total_loss = 0.0
            hits = 0
            for start in range(0, n, cfg.batch_size):
                idx = order[start:start + cfg.batch_size]
                batch, labels = crops[idx] - INPUT_SHIFT, y[idx]
                logits = self.net_.forward(batch)
                loss, grad = softmax_cross_entropy(logits, labels)
                if not np.isfinite(loss):
                    raise DivergenceError(
                        f"non-finite training loss at epoch {epoch} "
                        f"(learning rate too high?)")
                total_loss += loss * len(idx)
                hits += int((logits.argmax(axis=1) == labels).sum())
                self.net_.backward(grad)
                grads = self.net_.grads()
                if self.clip_grad_norm:
                    clip_gradients(grads, self.clip_grad_norm)
                sgd_step(params, grads, velocity, cfg)
            rec = EpochRecord(epoch=epoch, train_loss=total_loss / n,
                              train_top1_err=1.0 - hits / n)
            if X_val is not None:
                proba = self.predict_proba(X_val)
                yv = np.asarray(y_val, dtype=np.int64)
                rec.val_top1_err = float((proba.argmax(axis=1) != yv).mean())
                top5 = np.argsort(-proba, axis=1, kind="stable")[:, :5]
                rec.val_top5_err = float(np.mean([yv[i] not in top5[i]
                                                  for i in range(len(yv))]))
            rec.wall_time_s = time.perf_counter() - t0
            report.epochs.append(rec)
        report.total_wall_time_s = time.perf_counter() - t_start
        self.train_report_ = report
        return self

    def _random_crops(self, X, epoch):
        """One seeded 48x48 crop per sample for this epoch."""
        n, _, h, w = X.shape
        if w == INPUT_SIZE:
            return X
        rng = SplitMix64(derive_seed(self.seed, "crop", epoch))
        out = np.empty((n, 1, INPUT_SIZE, INPUT_SIZE), dtype=np.float32)
        for i in range(n):
            x0 = rng.randint(w - INPUT_SIZE + 1)
            out[i] = X[i, :, :, x0:x0 + INPUT_SIZE]
        return out

    # -- inference ------------------------------------------------------------

    def predict_proba(self, X):
        """Softmax probabilities; wide images are averaged over five evenly
        spaced square crops. Rows sum to 1 within float tolerance."""
        X = self._check_inputs(X)
        self._ensure_built()
        n, _, h, w = X.shape
        if w == INPUT_SIZE:
            crops, per = X, 1
        else:
            offsets = np.round(np.linspace(0, w - INPUT_SIZE,
                                           NUM_EVAL_CROPS)).astype(int)
            crops = np.empty((n * NUM_EVAL_CROPS, 1, INPUT_SIZE, INPUT_SIZE),
                             dtype=np.float32)
            for i in range(n):
                for k, x0 in enumerate(offsets):
                    crops[i * NUM_EVAL_CROPS + k] = X[i, :, :, x0:x0 + INPUT_SIZE]
            per = NUM_EVAL_CROPS
        probs = np.empty((crops.shape[0], self.num_classes), dtype=np.float64)
        for start in range(0, crops.shape[0], 256):
            logits = self.net_.forward(crops[start:start + 256]
                                       - INPUT_SHIFT).astype(np.float64)
            logits -= logits.max(axis=1, keepdims=True)
            e = np.exp(logits)
            probs[start:start + len(e)] = e / e.sum(axis=1, keepdims=True)
        proba = probs.reshape(n, per, self.num_classes).mean(axis=1)
        return proba / proba.sum(axis=1, keepdims=True)

    def predict(self, X):
        return self.predict_proba(X).argmax(axis=1)

    def predict_topk(self, X, k=5):
        """Top-k class indices per sample, best first; ties break toward the
        lower class index."""
        if not 1 <= k <= self.num_classes:
            raise ValueError(f"k must be in [1, {self.num_classes}], got {k}")
        proba = self.predict_proba(X)
        return np.argsort(-proba, axis=1, kind="stable")[:, :k]

    # -- persistence ----------------------------------------------------------

    def save(self, weights_path, meta_path=None):
        """FDW1 weight bundle plus a JSON sidecar describing the model."""
        weights_path = Path(weights_path)
        meta_path = Path(meta_path) if meta_path else weights_path.with_suffix(".json")
        self._ensure_built()
        weights_path.write_bytes(write_bundle(self.named_tensors()))
        meta_path.write_text(json.dumps({
            "num_classes": self.num_classes,
            "frozen_prefix": bool(getattr(self, "frozen_prefix_", False)),
            "arch_version": ARCH_VERSION,
        }, indent=2) + "\n")
        return weights_path, meta_path

    @classmethod
    def load(cls, weights_path, meta_path=None, **params):
        weights_path = Path(weights_path)
        meta_path = Path(meta_path) if meta_path else weights_path.with_suffix(".json")
        meta = json.loads(meta_path.read_text())
        if meta.get("arch_version") != ARCH_VERSION:
            raise ValueError(f"unsupported arch_version {meta.get('arch_version')!r}"
                             f" (expected {ARCH_VERSION})")
        model = cls(num_classes=int(meta["num_classes"]), **params).build()
        tensors = read_bundle(weights_path.read_bytes())
        own = model.named_tensors()
        for name, dest in own.items():
            if name not in tensors:
                raise ValueError(f"bundle missing tensor {name!r}")
            if tensors[name].shape != dest.shape:
                raise ValueError(f"tensor {name!r} shape {tensors[name].shape} "
                                 f"does not match {dest.shape}")
        for name, dest in own.items():
            dest[...] = tensors[name]
        model.frozen_prefix_ = bool(meta.get("frozen_prefix", False))
        for lname in ("conv1", "conv2"):
            model._named[lname].trainable = not model.frozen_prefix_
        return model

    # -- helpers --------------------------------------------------------------

    @staticmethod
    def _check_inputs(X):
        X = check_tensor4(X, "images")
        if X.shape[1] != 1 or X.shape[2] != INPUT_SIZE or X.shape[3] < INPUT_SIZE:
            raise ValueError(f"images must be (n, 1, {INPUT_SIZE}, >= {INPUT_SIZE}),"
                             f" got {X.shape}")
        return X


# Functional wrappers mirroring the estimator surface.

def build_cnn(num_classes: int, seed: int) -> FontCNNClassifier:
    return FontCNNClassifier(num_classes=num_classes, seed=seed).build()


def import_encoder(model: FontCNNClassifier, bundle: bytes,
                   frozen_prefix: bool = True) -> FontCNNClassifier:
    return model.import_encoder(bundle, frozen_prefix=frozen_prefix)


def train_supervised(model: FontCNNClassifier, X, y, domains,
                     cfg: SGDConfig, epochs: int,
                     X_val=None, y_val=None) -> TrainReport:
    model.epochs = epochs
    model.learning_rate = cfg.learning_rate
    model.momentum = cfg.momentum
    model.weight_decay = cfg.weight_decay
    model.batch_size = cfg.batch_size
    model.fit(X, y, domains=domains, X_val=X_val, y_val=y_val)
    return model.train_report_
