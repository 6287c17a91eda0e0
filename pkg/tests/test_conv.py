import numpy as np
import pytest

from fontdapt.nn.ops import ConvParams, conv2d_backward, conv2d_forward

from helpers import conv2d_reference, numeric_grad, rel_err


def test_1x1_kernel_scales_input():
    x = np.array([[1, 2], [3, 4]], dtype=np.float32).reshape(1, 1, 2, 2)
    p = ConvParams(np.full((1, 1, 1, 1), 2.0), np.zeros(1))
    out = conv2d_forward(x, p)
    np.testing.assert_array_equal(out.reshape(2, 2), [[2, 4], [6, 8]])


def test_all_ones_window_sum():
    x = np.ones((1, 1, 3, 3), dtype=np.float32)
    p = ConvParams(np.ones((1, 1, 2, 2)), np.zeros(1))
    out = conv2d_forward(x, p)
    assert out.shape == (1, 1, 2, 2)
    np.testing.assert_array_equal(out, np.full((1, 1, 2, 2), 4.0))


def test_matches_nested_loop_reference():
    rng = np.random.default_rng(7)
    x = rng.standard_normal((2, 3, 8, 8)).astype(np.float32)
    p = ConvParams(rng.standard_normal((4, 3, 3, 3)).astype(np.float32),
                   rng.standard_normal(4).astype(np.float32), stride=2, pad=1)
    out = conv2d_forward(x, p)
    ref = conv2d_reference(x, p)
    assert out.shape == ref.shape
    np.testing.assert_allclose(out, ref, atol=1e-5)


@pytest.mark.parametrize("stride,pad,k", [(1, 0, 1), (1, 1, 3), (2, 1, 3), (2, 2, 5), (3, 0, 2)])
def test_reference_equivalence_shapes(stride, pad, k):
    rng = np.random.default_rng(stride * 100 + pad * 10 + k)
    x = rng.standard_normal((2, 2, 7, 9)).astype(np.float32)
    p = ConvParams(rng.standard_normal((3, 2, k, k)).astype(np.float32),
                   rng.standard_normal(3).astype(np.float32), stride=stride, pad=pad)
    np.testing.assert_allclose(conv2d_forward(x, p), conv2d_reference(x, p), atol=1e-5)


def test_channel_mismatch_raises():
    x = np.zeros((1, 2, 4, 4), dtype=np.float32)
    p = ConvParams(np.zeros((1, 3, 3, 3)), np.zeros(1))
    with pytest.raises(ValueError, match="channels"):
        conv2d_forward(x, p)


def test_no_placement_raises():
    x = np.zeros((1, 1, 2, 2), dtype=np.float32)
    p = ConvParams(np.zeros((1, 1, 5, 5)), np.zeros(1))
    with pytest.raises(ValueError, match="placement"):
        conv2d_forward(x, p)


def test_backward_zero_cotangent():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((1, 2, 5, 5)).astype(np.float32)
    p = ConvParams(rng.standard_normal((3, 2, 3, 3)).astype(np.float32),
                   np.zeros(3), pad=1)
    gx, gw, gb = conv2d_backward(x, p, np.zeros((1, 3, 5, 5), dtype=np.float32))
    assert not gx.any() and not gw.any() and not gb.any()


def test_backward_linear_case_by_hand():
    x = np.arange(4, dtype=np.float32).reshape(1, 1, 2, 2)
    p = ConvParams(np.full((1, 1, 1, 1), 2.0), np.zeros(1))
    gx, gw, gb = conv2d_backward(x, p, np.ones((1, 1, 2, 2), dtype=np.float32))
    np.testing.assert_array_equal(gx, np.full((1, 1, 2, 2), 2.0))
    assert gw.reshape(()) == x.sum()
    assert gb[0] == 4.0


def test_backward_shape_mismatch_raises():
    x = np.zeros((1, 1, 4, 4), dtype=np.float32)
    p = ConvParams(np.zeros((1, 1, 3, 3)), np.zeros(1))
    with pytest.raises(ValueError, match="grad_out"):
        conv2d_backward(x, p, np.zeros((1, 1, 4, 4), dtype=np.float32))


@pytest.mark.parametrize("seed", range(5))
def test_backward_finite_differences(seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((2, 2, 5, 6)).astype(np.float32)
    w = rng.standard_normal((3, 2, 3, 3)).astype(np.float32)
    b = rng.standard_normal(3).astype(np.float32)
    cot = rng.standard_normal((2, 3, 3, 3)).astype(np.float32)
    stride, pad = 2, 1

    def loss_x(xx):
        return float((conv2d_forward(xx, ConvParams(w, b, stride, pad)) * cot).sum(dtype=np.float64))

    def loss_w(ww):
        return float((conv2d_forward(x, ConvParams(ww, b, stride, pad)) * cot).sum(dtype=np.float64))

    def loss_b(bb):
        return float((conv2d_forward(x, ConvParams(w, bb, stride, pad)) * cot).sum(dtype=np.float64))

    gx, gw, gb = conv2d_backward(x, ConvParams(w, b, stride, pad), cot)
    assert rel_err(gx, numeric_grad(loss_x, x)) < 1e-2
    assert rel_err(gw, numeric_grad(loss_w, w)) < 1e-2
    assert rel_err(gb, numeric_grad(loss_b, b)) < 1e-2


def test_forward_deterministic():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((1, 2, 6, 6)).astype(np.float32)
    p = ConvParams(rng.standard_normal((2, 2, 3, 3)).astype(np.float32), np.zeros(2), pad=1)
    a = conv2d_forward(x, p)
    b = conv2d_forward(x, p)
    assert a.tobytes() == b.tobytes()
