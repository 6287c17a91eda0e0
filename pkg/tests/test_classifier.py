"""Contracts for the CNN font classifier."""

import json

import numpy as np
import pytest

from fontdapt.classifier import (INPUT_SIZE, TENSOR_NAMES, FontCNNClassifier,
                                 build_cnn, import_encoder, train_supervised)
from fontdapt.exceptions import ProtocolError
from fontdapt.nn import SGDConfig, read_bundle, write_bundle
from fontdapt.scae import build_scae


def toy_two_class(n_per=8, width=INPUT_SIZE, seed=0):
    """Linearly separable toy set: ink on the left half vs the right half."""
    rng = np.random.default_rng(seed)
    X = np.ones((2 * n_per, 1, INPUT_SIZE, width), dtype=np.float32)
    y = np.zeros(2 * n_per, dtype=np.int64)
    for i in range(2 * n_per):
        cls = i % 2
        y[i] = cls
        half = slice(0, width // 2) if cls == 0 else slice(width // 2, width)
        X[i, 0, :, half] = rng.uniform(0.0, 0.3, size=(INPUT_SIZE, width // 2))
    return X, y


def snapshot(model):
    return {k: v.copy() for k, v in model.named_tensors().items()}


def test_build_shapes_and_tensor_names():
    m = build_cnn(7, 0)
    tensors = m.named_tensors()
    assert tuple(tensors) == TENSOR_NAMES
    assert tensors["conv1.w"].shape == (32, 1, 5, 5)
    assert tensors["conv2.w"].shape == (64, 32, 3, 3)
    assert tensors["fc6.w"].shape == (256, 64 * 6 * 6)
    assert tensors["fc8.w"].shape == (7, 256)
    logits = m.net_.forward(np.zeros((3, 1, 48, 48), dtype=np.float32))
    assert logits.shape == (3, 7)


def test_build_deterministic_and_validates_num_classes():
    a, b = build_cnn(4, 5), build_cnn(4, 5)
    for k in TENSOR_NAMES:
        np.testing.assert_array_equal(a.named_tensors()[k], b.named_tensors()[k])
    with pytest.raises(ValueError):
        build_cnn(1, 0)


def test_untrained_proba_near_uniform():
    m = build_cnn(10, 3)
    X = np.random.default_rng(0).random((8, 1, 48, 48), dtype=np.float32)
    p = m.predict_proba(X)
    assert np.all(np.abs(p.sum(axis=1) - 1.0) < 1e-5)
    assert p.max() / p.min() < 10.0


def test_wide_input_averages_five_crops():
    m = build_cnn(5, 1)
    X = np.random.default_rng(2).random((3, 1, 48, 192), dtype=np.float32)
    p = m.predict_proba(X)
    assert np.all(np.abs(p.sum(axis=1) - 1.0) < 1e-5)
    # reproduce by hand from five evenly spaced crops
    from fontdapt.scae import INPUT_SHIFT
    offsets = np.round(np.linspace(0, 192 - 48, 5)).astype(int)
    for i in range(3):
        crops = np.stack([X[i, :, :, o:o + 48] - INPUT_SHIFT for o in offsets])
        logits = m.net_.forward(crops).astype(np.float64)
        e = np.exp(logits - logits.max(axis=1, keepdims=True))
        want = (e / e.sum(axis=1, keepdims=True)).mean(axis=0)
        np.testing.assert_allclose(p[i], want / want.sum(), atol=1e-6)


def test_rejects_bad_input_shapes():
    m = build_cnn(2, 0)
    with pytest.raises(ValueError):
        m.predict_proba(np.zeros((2, 1, 32, 48), dtype=np.float32))
    with pytest.raises(ValueError):
        m.predict_proba(np.zeros((2, 1, 48, 40), dtype=np.float32))


def test_training_requires_synthetic_domain_tags():
    X, y = toy_two_class(2)
    m = FontCNNClassifier(num_classes=2, epochs=1, seed=0)
    with pytest.raises(ProtocolError):
        m.fit(X, y)
    with pytest.raises(ProtocolError, match="pseudo_real"):
        m.fit(X, y, domains=["synthetic"] * (len(y) - 1) + ["pseudo_real"])


def test_zero_learning_rate_leaves_weights_unchanged():
    X, y = toy_two_class(2)
    m = FontCNNClassifier(num_classes=2, epochs=2, learning_rate=0.0, seed=0)
    m.build()
    before = snapshot(m)
    m.fit(X, y, domains=["synthetic"] * len(y))
    for k in TENSOR_NAMES:
        np.testing.assert_array_equal(m.named_tensors()[k], before[k])


def test_separable_toy_reaches_zero_training_error():
    X, y = toy_two_class(8)
    m = FontCNNClassifier(num_classes=2, epochs=50, learning_rate=0.01,
                          batch_size=8, seed=0)
    m.fit(X, y, domains=["synthetic"] * len(y))
    errs = [r.train_top1_err for r in m.train_report_.epochs]
    assert min(errs) == 0.0
    assert np.array_equal(m.predict(X), y)


def test_ten_class_training_reaches_low_error(tmp_path):
    """200 images/class over 10 classes trains to < 10% top-1 in 15 epochs."""
    from fontdapt.augment import BUILTIN_PROFILES
    from fontdapt.fontgen import make_dataset

    manifest = make_dataset(10, 200, BUILTIN_PROFILES["clean"], 0,
                            tmp_path / "data", delta=0.4)
    X, y = manifest.load_images(), manifest.labels()
    domains = manifest.domains()
    finals = []
    for seed in range(3):
        m = FontCNNClassifier(num_classes=10, epochs=15, learning_rate=0.03,
                              batch_size=32, seed=seed)
        m.fit(X, y, domains=domains)
        finals.append(float((m.predict(X) != y).mean()))
    assert np.median(finals) < 0.10, f"final train errors {finals}"


def test_train_report_contents():
    X, y = toy_two_class(4, width=96)
    Xv, yv = toy_two_class(2, width=96, seed=1)
    report = train_supervised(FontCNNClassifier(num_classes=2, seed=0).build(),
                              X, y, ["synthetic"] * len(y),
                              SGDConfig(batch_size=8), epochs=2,
                              X_val=Xv, y_val=yv)
    assert len(report.epochs) == 2
    for rec in report.epochs:
        assert rec.wall_time_s > 0
        assert 0.0 <= rec.train_top1_err <= 1.0
        assert rec.val_top1_err is not None
        assert rec.val_top5_err is not None  # k capped by class count
    assert report.total_wall_time_s >= sum(r.wall_time_s for r in report.epochs) * 0.5


def test_import_encoder_roundtrip_and_freeze():
    ae = build_scae(9)
    m = build_cnn(3, 2)
    import_encoder(m, ae.export_encoder())
    assert m.frozen_prefix_ is True
    np.testing.assert_array_equal(m.named_tensors()["conv1.w"],
                                  ae._enc_convs[0].p.weights)
    np.testing.assert_array_equal(m.named_tensors()["conv2.w"],
                                  ae._enc_convs[1].p.weights)
    # frozen prefix must be bit-identical after supervised training
    X, y = toy_two_class(4)
    before = {k: m.named_tensors()[k].copy()
              for k in ("conv1.w", "conv1.b", "conv2.w", "conv2.b")}
    m.epochs = 2
    m.fit(X, y % 3, domains=["synthetic"] * len(y))
    for k, v in before.items():
        np.testing.assert_array_equal(m.named_tensors()[k], v)
    assert (m.named_tensors()["conv3.w"] != build_cnn(3, 2).named_tensors()["conv3.w"]).any()


def test_import_encoder_rejects_mismatch_and_leaves_model_untouched():
    m = build_cnn(3, 2)
    before = snapshot(m)
    good = read_bundle(build_scae(9).export_encoder())

    bad = dict(good)
    bad["conv1.w"] = np.zeros((32, 1, 3, 3), dtype=np.float32)
    with pytest.raises(ValueError, match="conv1.w"):
        m.import_encoder(write_bundle(bad))
    for k in TENSOR_NAMES:
        np.testing.assert_array_equal(m.named_tensors()[k], before[k])
    assert m.frozen_prefix_ is False

    with pytest.raises(ValueError, match="conv2.b"):
        m.import_encoder(write_bundle({k: v for k, v in good.items()
                                       if k != "conv2.b"}))


def test_unfrozen_prefix_trains():
    m = build_cnn(2, 4)
    m.import_encoder(build_scae(1).export_encoder(), frozen_prefix=False)
    assert m.frozen_prefix_ is False
    before = m.named_tensors()["conv1.w"].copy()
    X, y = toy_two_class(4)
    m.epochs = 2
    m.fit(X, y, domains=["synthetic"] * len(y))
    assert (m.named_tensors()["conv1.w"] != before).any()


def test_predict_topk_ties_break_low():
    m = build_cnn(6, 0)
    fc8 = m._named["fc8"]
    fc8.p.weights[...] = 0.0
    fc8.p.bias[...] = 0.0  # all logits equal -> uniform proba, full tie
    X = np.random.default_rng(3).random((2, 1, 48, 48), dtype=np.float32)
    np.testing.assert_array_equal(m.predict_topk(X, k=4),
                                  np.tile(np.arange(4), (2, 1)))
    assert m.predict(X).tolist() == [0, 0]
    with pytest.raises(ValueError):
        m.predict_topk(X, k=7)


def test_save_load_roundtrip(tmp_path):
    X, y = toy_two_class(4)
    m = FontCNNClassifier(num_classes=2, epochs=1, seed=5)
    m.build().import_encoder(build_scae(5).export_encoder())
    m.fit(X, y, domains=["synthetic"] * len(y))
    wpath, mpath = m.save(tmp_path / "model.fdw")
    meta = json.loads(mpath.read_text())
    assert meta == {"num_classes": 2, "frozen_prefix": True, "arch_version": 1}

    loaded = FontCNNClassifier.load(wpath)
    assert loaded.num_classes == 2
    assert loaded.frozen_prefix_ is True
    for k in TENSOR_NAMES:
        np.testing.assert_array_equal(loaded.named_tensors()[k],
                                      m.named_tensors()[k])
    Xq = np.random.default_rng(1).random((4, 1, 48, 48), dtype=np.float32)
    np.testing.assert_array_equal(loaded.predict_proba(Xq), m.predict_proba(Xq))


def test_load_rejects_bad_metadata(tmp_path):
    m = build_cnn(3, 0)
    wpath, mpath = m.save(tmp_path / "model.fdw")

    meta = json.loads(mpath.read_text())
    meta["arch_version"] = 99
    mpath.write_text(json.dumps(meta))
    with pytest.raises(ValueError, match="arch_version"):
        FontCNNClassifier.load(wpath)

    meta["arch_version"] = 1
    meta["num_classes"] = 5  # weight shapes no longer match
    mpath.write_text(json.dumps(meta))
    with pytest.raises(ValueError, match="fc8"):
        FontCNNClassifier.load(wpath)
