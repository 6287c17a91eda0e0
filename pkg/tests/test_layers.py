import numpy as np
import pytest

from fontdapt.nn.ops import (
    FCParams,
    fc_backward,
    fc_forward,
    maxpool_backward,
    maxpool_forward,
    relu_backward,
    relu_forward,
    upsample_nearest,
    upsample_nearest_backward,
)

from helpers import maxpool_reference, numeric_grad, rel_err


class TestMaxPool:
    def test_single_window(self):
        x = np.array([[1, 2], [3, 4]], dtype=np.float32).reshape(1, 1, 2, 2)
        out, idx = maxpool_forward(x, 2, 2)
        assert out.reshape(()) == 4.0
        assert idx.reshape(()) == 3  # flat index into the 2x2 plane

    def test_constant_input_first_index_tiebreak(self):
        x = np.ones((1, 1, 4, 4), dtype=np.float32)
        out, idx = maxpool_forward(x, 2, 2)
        np.testing.assert_array_equal(out, np.ones((1, 1, 2, 2)))
        np.testing.assert_array_equal(idx.reshape(2, 2), [[0, 2], [8, 10]])

    def test_matches_bruteforce(self):
        rng = np.random.default_rng(11)
        x = rng.standard_normal((1, 2, 6, 6)).astype(np.float32)
        out, _ = maxpool_forward(x, 2, 2)
        np.testing.assert_array_equal(out, maxpool_reference(x, 2, 2))

    def test_overlapping_windows_match_bruteforce(self):
        rng = np.random.default_rng(12)
        x = rng.standard_normal((2, 3, 7, 5)).astype(np.float32)
        out, _ = maxpool_forward(x, 3, 2)
        np.testing.assert_array_equal(out, maxpool_reference(x, 3, 2))

    def test_window_too_large_raises(self):
        with pytest.raises(ValueError, match="window"):
            maxpool_forward(np.zeros((1, 1, 2, 2), dtype=np.float32), 3, 1)

    def test_backward_zeros(self):
        x = np.random.default_rng(0).standard_normal((1, 1, 4, 4)).astype(np.float32)
        _, idx = maxpool_forward(x, 2, 2)
        g = maxpool_backward(idx, np.zeros((1, 1, 2, 2), dtype=np.float32), (4, 4))
        assert not g.any()

    def test_backward_routes_to_argmax(self):
        x = np.array([[1, 2], [3, 4]], dtype=np.float32).reshape(1, 1, 2, 2)
        _, idx = maxpool_forward(x, 2, 2)
        g = maxpool_backward(idx, np.full((1, 1, 1, 1), 5.0, dtype=np.float32), (2, 2))
        np.testing.assert_array_equal(g.reshape(2, 2), [[0, 0], [0, 5]])

    def test_backward_index_out_of_range(self):
        idx = np.full((1, 1, 1, 1), 99, dtype=np.int64)
        with pytest.raises(IndexError):
            maxpool_backward(idx, np.ones((1, 1, 1, 1), dtype=np.float32), (2, 2))

    def test_grad_sum_equals_output_count(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal((2, 3, 8, 8)).astype(np.float32)
        out, idx = maxpool_forward(x, 2, 2)
        g = maxpool_backward(idx, np.ones_like(out), (8, 8))
        assert g.sum() == out.size

    @pytest.mark.parametrize("seed", range(3))
    def test_backward_finite_differences(self, seed):
        rng = np.random.default_rng(seed + 40)
        # spread values far apart so the eps perturbation cannot flip a tie
        x = (rng.permutation(36).reshape(1, 1, 6, 6) * 0.5).astype(np.float32)
        cot = rng.standard_normal((1, 1, 3, 3)).astype(np.float32)

        def loss(xx):
            out, _ = maxpool_forward(xx, 2, 2)
            return float((out * cot).sum(dtype=np.float64))

        _, idx = maxpool_forward(x, 2, 2)
        g = maxpool_backward(idx, cot, (6, 6))
        assert rel_err(g, numeric_grad(loss, x)) < 1e-2


class TestReLU:
    def test_basic(self):
        x = np.array([-1.0, 0.0, 2.0], dtype=np.float32)
        np.testing.assert_array_equal(relu_forward(x), [0, 0, 2])

    def test_positive_identity(self):
        x = np.abs(np.random.default_rng(1).standard_normal(10)).astype(np.float32) + 0.1
        np.testing.assert_array_equal(relu_forward(x), x)

    def test_backward_masks(self):
        x = np.array([-2.0, 3.0], dtype=np.float32)
        g = relu_backward(x, np.array([5.0, 7.0], dtype=np.float32))
        np.testing.assert_array_equal(g, [0, 7])

    def test_backward_finite_differences(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal(50).astype(np.float32)
        x[np.abs(x) < 0.05] = 0.5  # keep away from the kink
        cot = rng.standard_normal(50).astype(np.float32)

        def loss(xx):
            return float((relu_forward(xx) * cot).sum(dtype=np.float64))

        assert rel_err(relu_backward(x, cot), numeric_grad(loss, x)) < 1e-2


class TestFC:
    def test_identity(self):
        p = FCParams(np.eye(3), np.zeros(3))
        x = np.array([[1.0, 2.0, 3.0]], dtype=np.float32)
        np.testing.assert_array_equal(fc_forward(x, p), x)

    def test_by_hand(self):
        p = FCParams(np.array([[1.0, 1.0]]), np.array([1.0]))
        out = fc_forward(np.array([[2.0, 3.0]], dtype=np.float32), p)
        assert out.reshape(()) == 6.0

    def test_dim_mismatch_raises(self):
        p = FCParams(np.zeros((2, 3)), np.zeros(2))
        with pytest.raises(ValueError, match="in_dim"):
            fc_forward(np.zeros((1, 4), dtype=np.float32), p)

    @pytest.mark.parametrize("seed", range(3))
    def test_backward_finite_differences(self, seed):
        rng = np.random.default_rng(seed + 20)
        x = rng.standard_normal((3, 5)).astype(np.float32)
        w = rng.standard_normal((4, 5)).astype(np.float32)
        b = rng.standard_normal(4).astype(np.float32)
        cot = rng.standard_normal((3, 4)).astype(np.float32)

        gx, gw, gb = fc_backward(x, FCParams(w, b), cot)
        assert rel_err(gx, numeric_grad(
            lambda xx: float((fc_forward(xx, FCParams(w, b)) * cot).sum(dtype=np.float64)), x)) < 1e-2
        assert rel_err(gw, numeric_grad(
            lambda ww: float((fc_forward(x, FCParams(ww, b)) * cot).sum(dtype=np.float64)), w)) < 1e-2
        assert rel_err(gb, numeric_grad(
            lambda bb: float((fc_forward(x, FCParams(w, bb)) * cot).sum(dtype=np.float64)), b)) < 1e-2


class TestUpsample:
    def test_factor_one_identity(self):
        x = np.random.default_rng(0).standard_normal((1, 1, 3, 3)).astype(np.float32)
        np.testing.assert_array_equal(upsample_nearest(x, 1), x)

    def test_block_replication(self):
        x = np.array([[1, 2], [3, 4]], dtype=np.float32).reshape(1, 1, 2, 2)
        out = upsample_nearest(x, 2)
        expected = np.array([[1, 1, 2, 2], [1, 1, 2, 2], [3, 3, 4, 4], [3, 3, 4, 4]])
        np.testing.assert_array_equal(out.reshape(4, 4), expected)

    def test_backward_finite_differences(self):
        rng = np.random.default_rng(9)
        x = rng.standard_normal((1, 2, 3, 3)).astype(np.float32)
        cot = rng.standard_normal((1, 2, 6, 6)).astype(np.float32)

        def loss(xx):
            return float((upsample_nearest(xx, 2) * cot).sum(dtype=np.float64))

        g = upsample_nearest_backward(cot, 2)
        assert rel_err(g, numeric_grad(loss, x)) < 1e-2
