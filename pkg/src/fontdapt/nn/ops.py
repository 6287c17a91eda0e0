"""Layer primitives: forward and backward passes on (n, c, h, w) float32 arrays.

Convolution is cross-correlation (no kernel flip). Internally it is lowered
to a strided-window tensordot, which BLAS turns into a single GEMM; the
result is elementwise identical to the direct nested-loop definition and
the tests pin that equivalence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rng import SplitMix64
from ..validation import as_f32, check_tensor4

try:
    from numba import njit as _njit
    _HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency, but keep a fallback
    _HAS_NUMBA = False

if _HAS_NUMBA:
    # Hand-written data-movement kernels. These are exact (no fastmath):
    # every one is a pure copy/compare/add, so outputs are bit-identical to
    # the numpy fallback paths below.

    @_njit(cache=True)
    def _im2col_s1_nb(xp, kh, kw, oh, ow, cols):
        n, c, hp, wp = xp.shape
        for ch in range(c):
            for b in range(n):
                for y in range(oh):
                    for i in range(kh):
                        srow = xp[b, ch, i + y]
                        for j in range(kw):
                            dst = cols[i, j, ch, b, y]
                            for x in range(ow):
                                dst[x] = srow[j + x]

    @_njit(cache=True)
    def _detranspose_bias_nb(gemm, bias, out):
        n, oc, oh, ow = out.shape
        s = oh * ow
        for b in range(n):
            for o in range(oc):
                bb = bias[o]
                src = gemm[o]
                for y in range(oh):
                    base = b * s + y * ow
                    for x in range(ow):
                        out[b, o, y, x] = src[base + x] + bb

    @_njit(cache=True)
    def _pool2_fwd_nb(x, out, local):
        n, c, h, w = x.shape
        for b in range(n):
            for ch in range(c):
                for y in range(h // 2):
                    for xx in range(w // 2):
                        v0 = x[b, ch, 2 * y, 2 * xx]
                        v1 = x[b, ch, 2 * y, 2 * xx + 1]
                        v2 = x[b, ch, 2 * y + 1, 2 * xx]
                        v3 = x[b, ch, 2 * y + 1, 2 * xx + 1]
                        m = v0
                        k = 0
                        if v1 > m:
                            m = v1
                            k = 1
                        if v2 > m:
                            m = v2
                            k = 2
                        if v3 > m:
                            m = v3
                            k = 3
                        out[b, ch, y, xx] = m
                        local[b, ch, y, xx] = k

    @_njit(cache=True)
    def _pool2_bwd_nb(local, g, grad_in):
        n, c, oh, ow = g.shape
        for b in range(n):
            for ch in range(c):
                for y in range(oh):
                    for xx in range(ow):
                        k = local[b, ch, y, xx]
                        gv = g[b, ch, y, xx]
                        grad_in[b, ch, 2 * y, 2 * xx] = gv if k == 0 else 0.0
                        grad_in[b, ch, 2 * y, 2 * xx + 1] = gv if k == 1 else 0.0
                        grad_in[b, ch, 2 * y + 1, 2 * xx] = gv if k == 2 else 0.0
                        grad_in[b, ch, 2 * y + 1, 2 * xx + 1] = gv if k == 3 else 0.0

    @_njit(cache=True)
    def _upsample2_fwd_nb(x, out):
        n, c, h, w = x.shape
        for b in range(n):
            for ch in range(c):
                for y in range(h):
                    for xx in range(w):
                        v = x[b, ch, y, xx]
                        out[b, ch, 2 * y, 2 * xx] = v
                        out[b, ch, 2 * y, 2 * xx + 1] = v
                        out[b, ch, 2 * y + 1, 2 * xx] = v
                        out[b, ch, 2 * y + 1, 2 * xx + 1] = v

    @_njit(cache=True)
    def _upsample2_bwd_nb(g, out):
        n, c, h, w = out.shape
        for b in range(n):
            for ch in range(c):
                for y in range(h):
                    for xx in range(w):
                        out[b, ch, y, xx] = (g[b, ch, 2 * y, 2 * xx]
                                             + g[b, ch, 2 * y, 2 * xx + 1]
                                             + g[b, ch, 2 * y + 1, 2 * xx]
                                             + g[b, ch, 2 * y + 1, 2 * xx + 1])


@dataclass
class ConvParams:
    weights: np.ndarray  # (out_channels, in_channels, kh, kw)
    bias: np.ndarray     # (out_channels,)
    stride: int = 1
    pad: int = 0

    def __post_init__(self):
        self.weights = as_f32(self.weights)
        self.bias = as_f32(self.bias)
        if self.weights.ndim != 4:
            raise ValueError(f"conv weights must be 4-D, got {self.weights.shape}")
        if self.bias.shape != (self.weights.shape[0],):
            raise ValueError(
                f"bias shape {self.bias.shape} does not match out_channels "
                f"{self.weights.shape[0]}"
            )
        if self.stride < 1 or self.pad < 0:
            raise ValueError(f"bad stride/pad: {self.stride}/{self.pad}")


@dataclass
class FCParams:
    weights: np.ndarray  # (out_dim, in_dim)
    bias: np.ndarray     # (out_dim,)

    def __post_init__(self):
        self.weights = as_f32(self.weights)
        self.bias = as_f32(self.bias)
        if self.weights.ndim != 2:
            raise ValueError(f"fc weights must be 2-D, got {self.weights.shape}")
        if self.bias.shape != (self.weights.shape[0],):
            raise ValueError(
                f"bias shape {self.bias.shape} does not match out_dim "
                f"{self.weights.shape[0]}"
            )


def glorot_uniform(shape, fan_in: int, fan_out: int, rng: SplitMix64) -> np.ndarray:
    s = np.sqrt(6.0 / (fan_in + fan_out))
    n = int(np.prod(shape))
    return rng.uniform_array(n, -s, s).astype(np.float32).reshape(shape)


def _pad_input(x: np.ndarray, pad: int) -> np.ndarray:
    if pad == 0:
        return x
    return np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))


def _windows(xp: np.ndarray, kh: int, kw: int, stride: int, oh: int, ow: int):
    n, c, _, _ = xp.shape
    sn, sc, sh, sw = xp.strides
    return np.lib.stride_tricks.as_strided(
        xp,
        (n, c, oh, ow, kh, kw),
        (sn, sc, sh * stride, sw * stride, sh, sw),
        writeable=False,
    )


def conv_output_shape(in_h: int, in_w: int, p: ConvParams) -> tuple[int, int]:
    kh, kw = p.weights.shape[2], p.weights.shape[3]
    oh = (in_h + 2 * p.pad - kh) // p.stride + 1
    ow = (in_w + 2 * p.pad - kw) // p.stride + 1
    return oh, ow


# convs with at most this many output channels use the shift-matmul path,
# which avoids the kh*kw im2col blowup that dominates when the GEMM is thin
_FEW_CHANNELS = 4


def _ws_buf(ws: dict | None, tag: str, shape, zeroed: bool = False):
    """Reusable scratch array; falls back to a fresh allocation without ws."""
    if ws is None:
        return np.zeros(shape, np.float32) if zeroed else np.empty(shape, np.float32)
    buf = ws.get(tag)
    if buf is None or buf.shape != shape:
        buf = np.zeros(shape, np.float32) if zeroed else np.empty(shape, np.float32)
        ws[tag] = buf
    return buf


def _pad_input_ws(x: np.ndarray, pad: int, ws: dict | None, tag: str) -> np.ndarray:
    if pad == 0:
        return x
    if ws is None:
        return _pad_input(x, pad)
    n, c, h, w = x.shape
    # zeroed on (re)allocation; border stays zero across reuses
    buf = _ws_buf(ws, tag, (n, c, h + 2 * pad, w + 2 * pad), zeroed=True)
    buf[:, :, pad:pad + h, pad:pad + w] = x
    return buf


def _im2col(xp: np.ndarray, kh: int, kw: int, stride: int, oh: int, ow: int,
            ws: dict | None = None, tag: str = "cols"):
    """Patch matrix (kh*kw*c, n*oh*ow) built from contiguous row copies."""
    n, c = xp.shape[:2]
    cols = _ws_buf(ws, tag, (kh, kw, c, n, oh, ow))
    if _HAS_NUMBA and stride == 1:
        _im2col_s1_nb(xp, kh, kw, oh, ow, cols)
        return cols.reshape(kh * kw * c, n * oh * ow)
    for i in range(kh):
        for j in range(kw):
            cols[i, j] = xp[:, :, i:i + (oh - 1) * stride + 1:stride,
                            j:j + (ow - 1) * stride + 1:stride].transpose(1, 0, 2, 3)
    return cols.reshape(kh * kw * c, n * oh * ow)


def _conv_forward(x, p: ConvParams, cache: dict | None = None,
                  ws: dict | None = None, wtag: str = "f") -> np.ndarray:
    oc, ic, kh, kw = p.weights.shape
    n, c, h, w = x.shape
    oh, ow = conv_output_shape(h, w, p)
    xp = _pad_input_ws(x, p.pad, ws, wtag + ".xp")
    if p.stride == 1 and oc <= _FEW_CHANNELS:
        xn = _ws_buf(ws, wtag + ".xn", (n,) + xp.shape[2:] + (ic,))
        xn[...] = xp.transpose(0, 2, 3, 1)                   # nhwc
        wm = p.weights.transpose(2, 3, 1, 0)                 # (kh, kw, c, oc)
        out_nhwc = np.zeros((n, oh, ow, oc), dtype=np.float32)
        for i in range(kh):
            for j in range(kw):
                out_nhwc += xn[:, i:i + oh, j:j + ow, :] @ wm[i, j]
        if cache is not None:
            cache["xn"] = xn
        out = np.ascontiguousarray(out_nhwc.transpose(0, 3, 1, 2))
    else:
        cols = _im2col(xp, kh, kw, p.stride, oh, ow, ws, wtag + ".cols")
        wm = p.weights.transpose(2, 3, 1, 0).reshape(kh * kw * ic, oc)
        gemm = wm.T @ cols  # (oc, n*oh*ow)
        if cache is not None:
            cache["cols"] = cols
        if _HAS_NUMBA:
            out = np.empty((n, oc, oh, ow), dtype=np.float32)
            _detranspose_bias_nb(gemm, p.bias, out)
            return out
        out = np.ascontiguousarray(gemm.reshape(oc, n, oh, ow).transpose(1, 0, 2, 3))
    out += p.bias[None, :, None, None]
    return out


def conv2d_forward(x, p: ConvParams) -> np.ndarray:
    x = check_tensor4(x)
    oc, ic, kh, kw = p.weights.shape
    n, c, h, w = x.shape
    if c != ic:
        raise ValueError(f"input has {c} channels but kernel expects {ic} "
                         f"(input {x.shape}, weights {p.weights.shape})")
    oh, ow = conv_output_shape(h, w, p)
    if oh < 1 or ow < 1:
        raise ValueError(f"no kernel placement fits: input {x.shape}, "
                         f"kernel {p.weights.shape}, stride {p.stride}, pad {p.pad}")
    return _conv_forward(x, p)


def _conv_grad_w(x, p: ConvParams, grad_out, cache: dict | None,
                 ws: dict | None = None):
    oc, ic, kh, kw = p.weights.shape
    n, c, h, w = x.shape
    oh, ow = grad_out.shape[2:]
    if cache is not None and "cols" in cache:
        cols = cache["cols"]
    elif cache is not None and "xn" in cache:
        xn = cache["xn"]
        gn = np.ascontiguousarray(grad_out.transpose(0, 2, 1, 3))  # (n, oh, oc, ow)
        gw = np.empty((oc, ic, kh, kw), dtype=np.float32)
        for i in range(kh):
            for j in range(kw):
                # (n, oh, oc, ow) @ (n, oh, ow, c) -> (n, oh, oc, c), then reduce
                t = np.matmul(gn, xn[:, i:i + oh, j:j + ow, :])
                gw[:, :, i, j] = t.sum(axis=(0, 1))
        return gw
    else:
        cols = _im2col(_pad_input_ws(x, p.pad, ws, "gw.xp"), kh, kw, p.stride,
                       oh, ow, ws, "gw.cols")
    gm = np.ascontiguousarray(grad_out.transpose(1, 0, 2, 3)).reshape(oc, -1)
    gw = (gm @ cols.T).reshape(oc, kh, kw, ic)
    return np.ascontiguousarray(gw.transpose(0, 3, 1, 2))


def _conv_backward(x, p: ConvParams, grad_out, cache: dict | None = None,
                   need_input_grad: bool = True, ws: dict | None = None):
    oc, ic, kh, kw = p.weights.shape
    n, c, h, w = x.shape
    oh, ow = conv_output_shape(h, w, p)

    grad_bias = grad_out.sum(axis=(0, 2, 3), dtype=np.float64).astype(np.float32)
    grad_w = _conv_grad_w(x, p, grad_out, cache, ws)

    if not need_input_grad:
        return None, grad_w, grad_bias

    if p.stride == 1 and kh == kw:
        # input gradient is a full correlation of grad_out with the kernel
        # flipped spatially and transposed in channels — just another conv
        w_t = np.ascontiguousarray(p.weights[:, :, ::-1, ::-1].transpose(1, 0, 2, 3))
        back = ConvParams(w_t, np.zeros(ic, dtype=np.float32), stride=1, pad=kh - 1)
        gxp = _conv_forward(grad_out, back, ws=ws, wtag="b")
        grad_x = gxp[:, :, p.pad:p.pad + h, p.pad:p.pad + w] if p.pad else gxp
    else:
        # general stride: scatter grad through the windows onto the padded input
        g_win = np.tensordot(grad_out, p.weights, axes=([1], [0]))  # (n, oh, ow, c, kh, kw)
        gxp = np.zeros_like(_pad_input(x, p.pad))
        for i in range(kh):
            for j in range(kw):
                gxp[:, :, i:i + oh * p.stride:p.stride, j:j + ow * p.stride:p.stride] += \
                    g_win[:, :, :, :, i, j].transpose(0, 3, 1, 2)
        grad_x = gxp[:, :, p.pad:p.pad + h, p.pad:p.pad + w] if p.pad else gxp
    return np.ascontiguousarray(grad_x), grad_w, grad_bias


def conv2d_backward(x, p: ConvParams, grad_out):
    x = check_tensor4(x)
    grad_out = check_tensor4(grad_out, "grad_out")
    oc, ic, kh, kw = p.weights.shape
    n, c, h, w = x.shape
    if c != ic:
        raise ValueError(f"input has {c} channels but kernel expects {ic}")
    oh, ow = conv_output_shape(h, w, p)
    if grad_out.shape != (n, oc, oh, ow):
        raise ValueError(f"grad_out shape {grad_out.shape} does not match forward "
                         f"output shape {(n, oc, oh, ow)}")
    return _conv_backward(x, p, grad_out)


def maxpool_forward(x, window: int, stride: int):
    x = check_tensor4(x)
    n, c, h, w = x.shape
    if window < 1 or window > min(h, w):
        raise ValueError(f"pool window {window} does not fit input {x.shape}")
    oh = (h - window) // stride + 1
    ow = (w - window) // stride + 1
    if window == 2 and stride == 2 and h % 2 == 0 and w % 2 == 0:
        out, local = _maxpool2x2_forward(x)
        rows = np.arange(oh, dtype=np.int32)[:, None] * 2 + (local >> 1)
        cols = np.arange(ow, dtype=np.int32)[None, :] * 2 + (local & 1)
        return out, (rows.astype(np.int64) * w + cols)
    win = _windows(x, window, window, stride, oh, ow)
    flat = win.reshape(n, c, oh, ow, window * window)
    local = flat.argmax(axis=-1)  # first max in row-major window order: lowest flat index
    out = np.take_along_axis(flat, local[..., None], axis=-1)[..., 0]
    rows = (np.arange(oh)[:, None] * stride + (local // window))
    cols = (np.arange(ow)[None, :] * stride + (local % window))
    argmax = (rows * w + cols).astype(np.int64)  # flat index into the (h, w) plane
    return np.ascontiguousarray(out), argmax


def _maxpool2x2_forward(x):
    """2x2/stride-2 pooling with window-local argmax (int8, row-major order).

    Same first-max tie-break as the generic path; used internally by the
    layer objects to skip global flat-index bookkeeping.
    """
    if _HAS_NUMBA:
        n, c, h, w = x.shape
        out = np.empty((n, c, h // 2, w // 2), dtype=np.float32)
        local = np.empty(out.shape, dtype=np.int8)
        _pool2_fwd_nb(x, out, local)
        return out, local
    out = np.ascontiguousarray(x[:, :, 0::2, 0::2])
    local = np.zeros(out.shape, dtype=np.int8)
    for idx, cand in ((1, x[:, :, 0::2, 1::2]),
                      (2, x[:, :, 1::2, 0::2]),
                      (3, x[:, :, 1::2, 1::2])):
        mask = cand > out
        out = np.where(mask, cand, out)
        local = np.where(mask, np.int8(idx), local)
    return out, local


def _maxpool2x2_backward(local, grad_out, input_hw):
    n, c = grad_out.shape[:2]
    h, w = input_hw
    grad_in = np.empty((n, c, h, w), dtype=np.float32)
    if _HAS_NUMBA:
        _pool2_bwd_nb(local, grad_out, grad_in)
        return grad_in
    zero = np.float32(0.0)
    for idx, (i, j) in enumerate(((0, 0), (0, 1), (1, 0), (1, 1))):
        grad_in[:, :, i::2, j::2] = np.where(local == idx, grad_out, zero)
    return grad_in


def maxpool_backward(argmax: np.ndarray, grad_out, input_hw: tuple[int, int]) -> np.ndarray:
    grad_out = check_tensor4(grad_out, "grad_out")
    if argmax.shape != grad_out.shape:
        raise ValueError(f"argmax shape {argmax.shape} vs grad_out {grad_out.shape}")
    h, w = input_hw
    if argmax.min() < 0 or argmax.max() >= h * w:
        raise IndexError(f"argmax index out of range for {h}x{w} plane")
    n, c = grad_out.shape[:2]
    grad_in = np.zeros((n * c, h * w), dtype=np.float32)
    rows = np.repeat(np.arange(n * c), argmax.shape[2] * argmax.shape[3])
    np.add.at(grad_in, (rows, argmax.reshape(n * c, -1).ravel()),
              grad_out.reshape(n * c, -1).ravel())
    return grad_in.reshape(n, c, h, w)


def relu_forward(x) -> np.ndarray:
    return np.maximum(np.asarray(x, dtype=np.float32), np.float32(0.0))


def relu_backward(x, grad_out) -> np.ndarray:
    x = np.asarray(x, dtype=np.float32)
    grad_out = np.asarray(grad_out, dtype=np.float32)
    if x.shape != grad_out.shape:
        raise ValueError(f"relu shapes differ: {x.shape} vs {grad_out.shape}")
    return np.where(x > 0, grad_out, np.float32(0.0))


def fc_forward(x, p: FCParams) -> np.ndarray:
    x = as_f32(x)
    if x.ndim != 2 or x.shape[1] != p.weights.shape[1]:
        raise ValueError(f"fc input {x.shape} incompatible with weights "
                         f"{p.weights.shape} (expects in_dim {p.weights.shape[1]})")
    return x @ p.weights.T + p.bias


def fc_backward(x, p: FCParams, grad_out):
    x = as_f32(x)
    grad_out = as_f32(grad_out)
    if grad_out.shape != (x.shape[0], p.weights.shape[0]):
        raise ValueError(f"fc grad_out {grad_out.shape} incompatible with "
                         f"batch {x.shape[0]} x out_dim {p.weights.shape[0]}")
    grad_x = grad_out @ p.weights
    grad_w = grad_out.T @ x
    grad_b = grad_out.sum(axis=0, dtype=np.float64).astype(np.float32)
    return grad_x, grad_w, grad_b


def upsample_nearest(x, factor: int) -> np.ndarray:
    x = check_tensor4(x)
    if factor < 1:
        raise ValueError(f"upsample factor must be >= 1, got {factor}")
    if factor == 1:
        return x.copy()
    if factor == 2 and _HAS_NUMBA:
        n, c, h, w = x.shape
        out = np.empty((n, c, 2 * h, 2 * w), dtype=np.float32)
        _upsample2_fwd_nb(x, out)
        return out
    return np.ascontiguousarray(x.repeat(factor, axis=2).repeat(factor, axis=3))


def upsample_nearest_backward(grad_out, factor: int) -> np.ndarray:
    grad_out = check_tensor4(grad_out, "grad_out")
    if factor == 1:
        return grad_out.copy()
    n, c, h, w = grad_out.shape
    if h % factor or w % factor:
        raise ValueError(f"grad_out spatial dims {h}x{w} not divisible by {factor}")
    if factor == 2:
        if _HAS_NUMBA:
            out = np.empty((n, c, h // 2, w // 2), dtype=np.float32)
            _upsample2_bwd_nb(grad_out, out)
            return out
        return (grad_out[:, :, 0::2, 0::2] + grad_out[:, :, 0::2, 1::2]
                + grad_out[:, :, 1::2, 0::2] + grad_out[:, :, 1::2, 1::2])
    g = grad_out.reshape(n, c, h // factor, factor, w // factor, factor)
    return np.ascontiguousarray(g.sum(axis=(3, 5), dtype=np.float64).astype(np.float32))
