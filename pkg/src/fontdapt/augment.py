"""Label-preserving degradations and the two-domain profile mechanism.

A DomainProfile is a named distribution over degradation parameters. The
built-in `synthetic_train` and `pseudo_real` profiles use disjoint ranges,
manufacturing a measurable gap between the training domain and the held-out
test domain. Ops apply in the fixed order squeeze, rotate, blur, noise,
shade so that an AugRecord replays bit-exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .rng import SplitMix64
from .validation import check_image

try:
    from numba import njit as _njit
    _HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency, but keep a fallback
    _HAS_NUMBA = False

MAX_ROTATION = math.pi / 6

Range = tuple[float, float]


@dataclass(frozen=True)
class DomainProfile:
    name: str
    noise_sigma: Range = (0.0, 0.0)
    blur_sigma: Range = (0.0, 0.0)
    rotation: Range = (0.0, 0.0)
    shading_strength: Range = (0.0, 0.0)
    spacing: Range = (2.0, 2.0)
    squeeze_ratio: Range = (0.0, 0.0)
    per_op_probability: float = 1.0

    def __post_init__(self):
        for fname in ("noise_sigma", "blur_sigma", "rotation",
                      "shading_strength", "spacing", "squeeze_ratio"):
            lo, hi = getattr(self, fname)
            if lo > hi:
                raise ValueError(f"{self.name}.{fname}: lo {lo} > hi {hi}")
        if not 0.0 <= self.per_op_probability <= 1.0:
            raise ValueError(f"per_op_probability must be in [0,1]")

    def to_dict(self):
        return asdict(self)

    @property
    def domain_tag(self) -> str:
        return "pseudo_real" if self.name == "pseudo_real" else "synthetic"


CLEAN = DomainProfile(name="clean", per_op_probability=0.0)

SYNTHETIC_TRAIN = DomainProfile(
    name="synthetic_train",
    noise_sigma=(0.0, 0.05),
    blur_sigma=(0.0, 1.0),
    rotation=(-math.radians(3), math.radians(3)),
    shading_strength=(0.0, 0.3),
    spacing=(1.0, 4.0),
    squeeze_ratio=(0.9, 1.1),
    per_op_probability=0.8,
)

PSEUDO_REAL = DomainProfile(
    name="pseudo_real",
    noise_sigma=(0.05, 0.12),
    blur_sigma=(1.0, 2.5),
    rotation=(-math.radians(8), math.radians(8)),
    shading_strength=(0.3, 0.6),
    spacing=(0.0, 8.0),
    squeeze_ratio=(0.7, 1.4),
    per_op_probability=1.0,
)

BUILTIN_PROFILES = {p.name: p for p in (CLEAN, SYNTHETIC_TRAIN, PSEUDO_REAL)}


@dataclass
class AugRecord:
    """Ordered (op name, parameters) pairs; replaying reproduces the image."""
    steps: list = field(default_factory=list)

    def to_json(self):
        return [[name, *params] for name, params in self.steps]

    @classmethod
    def from_json(cls, data):
        return cls(steps=[(entry[0], tuple(entry[1:])) for entry in data])


def add_gaussian_noise(img, sigma: float, seed: int) -> np.ndarray:
    img = check_image(img)
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return img.copy()
    noise = SplitMix64(seed).normal_array(img.size, sigma).astype(np.float32)
    return np.clip(img + noise.reshape(img.shape), 0.0, 1.0)


def _gauss_kernel(sigma: float) -> np.ndarray:
    radius = int(math.ceil(3 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return (k / k.sum()).astype(np.float32)


if _HAS_NUMBA:
    # Exact per-pixel kernels (no fastmath): same float64 operation order as
    # the numpy fallbacks below, so outputs are bit-identical either way.

    @_njit(cache=True)
    def _conv1d_reflect_nb(img, kernel, axis, out):
        # the fallback's per-tap product w * padded is a float32 multiply
        # that only then accumulates in float64; mirror that exactly
        h, w = img.shape
        radius = len(kernel) // 2
        n = h if axis == 0 else w
        for y in range(h):
            for x in range(w):
                acc = 0.0
                for i in range(len(kernel)):
                    p = (y if axis == 0 else x) + i - radius
                    if p < 0:
                        p = -p
                    elif p >= n:
                        p = 2 * n - 2 - p
                    v = img[p, x] if axis == 0 else img[y, p]
                    acc += np.float64(kernel[i] * v)
                out[y, x] = np.float32(acc)

    @_njit(cache=True)
    def _bilinear_nb(img, sy, sx, out):
        h, w = img.shape
        oh, ow = out.shape
        for y in range(oh):
            for x in range(ow):
                syv = sy[y, x]
                sxv = sx[y, x]
                y0 = int(math.floor(syv))
                x0 = int(math.floor(sxv))
                fy = syv - y0
                fx = sxv - x0
                v00 = img[y0, x0] if 0 <= y0 < h and 0 <= x0 < w else 1.0
                v01 = img[y0, x0 + 1] if 0 <= y0 < h and 0 <= x0 + 1 < w else 1.0
                v10 = img[y0 + 1, x0] if 0 <= y0 + 1 < h and 0 <= x0 < w else 1.0
                v11 = (img[y0 + 1, x0 + 1]
                       if 0 <= y0 + 1 < h and 0 <= x0 + 1 < w else 1.0)
                top = v00 * (1 - fx) + v01 * fx
                bot = v10 * (1 - fx) + v11 * fx
                out[y, x] = np.float32(top * (1 - fy) + bot * fy)


def _conv1d_reflect(img: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    if _HAS_NUMBA:
        out = np.empty(img.shape, dtype=np.float32)
        _conv1d_reflect_nb(np.ascontiguousarray(img),
                           np.ascontiguousarray(kernel, dtype=np.float32),
                           axis, out)
        return out
    radius = len(kernel) // 2
    pad = [(0, 0), (0, 0)]
    pad[axis] = (radius, radius)
    padded = np.pad(img, pad, mode="reflect")
    out = np.zeros_like(img, dtype=np.float64)
    for i, w in enumerate(kernel):
        sl = [slice(None), slice(None)]
        sl[axis] = slice(i, i + img.shape[axis])
        out += w * padded[tuple(sl)]
    return out.astype(np.float32)


def gaussian_blur(img, sigma: float) -> np.ndarray:
    img = check_image(img)
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return img.copy()
    k = _gauss_kernel(sigma)
    return _conv1d_reflect(_conv1d_reflect(img, k, 0), k, 1)


def rotate(img, theta: float) -> np.ndarray:
    """Rotation about the image center, bilinear, background fill 1.0."""
    img = check_image(img)
    if abs(theta) > MAX_ROTATION + 1e-12:
        raise ValueError(f"|theta| must be <= pi/6, got {theta}")
    if theta == 0:
        return img.copy()
    h, w = img.shape
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64),
                         np.arange(w, dtype=np.float64), indexing="ij")
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    # inverse mapping: rotate output coords by -theta
    sx = cos_t * (xx - cx) + sin_t * (yy - cy) + cx
    sy = -sin_t * (xx - cx) + cos_t * (yy - cy) + cy
    return _bilinear_sample(img, sy, sx)


def _bilinear_sample(img: np.ndarray, sy: np.ndarray, sx: np.ndarray) -> np.ndarray:
    if _HAS_NUMBA:
        out = np.empty(sy.shape, dtype=np.float32)
        _bilinear_nb(np.ascontiguousarray(img), np.ascontiguousarray(sy),
                     np.ascontiguousarray(sx), out)
        return out
    h, w = img.shape
    x0 = np.floor(sx).astype(np.int64)
    y0 = np.floor(sy).astype(np.int64)
    fx = sx - x0
    fy = sy - y0

    def sample(yi, xi):
        inside = (yi >= 0) & (yi < h) & (xi >= 0) & (xi < w)
        vals = np.ones(yi.shape, dtype=np.float64)
        vals[inside] = img[yi[inside], xi[inside]]
        return vals

    v00 = sample(y0, x0)
    v01 = sample(y0, x0 + 1)
    v10 = sample(y0 + 1, x0)
    v11 = sample(y0 + 1, x0 + 1)
    top = v00 * (1 - fx) + v01 * fx
    bot = v10 * (1 - fx) + v11 * fx
    return (top * (1 - fy) + bot * fy).astype(np.float32)


def shade(img, strength: float, angle: float, seed: int = 0) -> np.ndarray:
    """Linear illumination ramp along `angle`; darkest edge scaled by
    (1 - strength), then renormalized to preserve the max pixel."""
    img = check_image(img)
    if not 0.0 <= strength <= 1.0:
        raise ValueError(f"strength must be in [0,1], got {strength}")
    if strength == 0:
        return img.copy()
    h, w = img.shape
    yy, xx = np.meshgrid(np.linspace(0, 1, h), np.linspace(0, 1, w), indexing="ij")
    t = math.cos(angle) * xx + math.sin(angle) * yy
    t = (t - t.min()) / max(t.max() - t.min(), 1e-12)
    out = img * ((1.0 - strength) + strength * t)
    peak = out.max()
    if peak > 0:
        out = out * (img.max() / peak)
    return np.clip(out, 0.0, 1.0).astype(np.float32)


def squeeze(img, ratio: float) -> np.ndarray:
    """Horizontal aspect-ratio change; result padded/cropped back to the
    original width, centered."""
    img = check_image(img)
    if not 0.5 <= ratio <= 2.0:
        raise ValueError(f"squeeze ratio must be in [0.5, 2.0], got {ratio}")
    h, w = img.shape
    new_w = max(1, int(round(w * ratio)))
    if new_w != w:
        actual = new_w / w
        xs = (np.arange(new_w, dtype=np.float64) + 0.5) / actual - 0.5
        ys = np.broadcast_to(np.arange(h, dtype=np.float64)[:, None], (h, new_w))
        resampled = _bilinear_sample(img, ys, np.broadcast_to(xs, (h, new_w)))
    else:
        resampled = img.copy()
    if new_w == w:
        return resampled
    out = np.ones((h, w), dtype=np.float32)
    if new_w < w:
        left = (w - new_w) // 2
        out[:, left:left + new_w] = resampled
    else:
        crop = (new_w - w) // 2
        out = resampled[:, crop:crop + w]
    return np.ascontiguousarray(out)


def apply_profile(img, profile: DomainProfile, seed: int):
    """Sample and apply the profile's ops in fixed order; returns
    (image, AugRecord). Ops whose sampled parameter is the identity are
    skipped and not recorded."""
    img = check_image(img)
    rng = SplitMix64(seed)
    record = AugRecord()
    p = profile.per_op_probability

    def coin():
        return rng.uniform() < p

    u = coin()
    ratio = rng.uniform(*profile.squeeze_ratio)
    if u and ratio > 0 and abs(ratio - 1.0) > 1e-9:
        img = squeeze(img, ratio)
        record.steps.append(("squeeze", (ratio,)))

    u = coin()
    theta = rng.uniform(*profile.rotation)
    if u and theta != 0.0:
        img = rotate(img, theta)
        record.steps.append(("rotate", (theta,)))

    u = coin()
    sigma = rng.uniform(*profile.blur_sigma)
    if u and sigma > 0:
        img = gaussian_blur(img, sigma)
        record.steps.append(("blur", (sigma,)))

    u = coin()
    sigma = rng.uniform(*profile.noise_sigma)
    noise_seed = rng.next_u64()
    if u and sigma > 0:
        img = add_gaussian_noise(img, sigma, noise_seed)
        record.steps.append(("noise", (sigma, noise_seed)))

    u = coin()
    strength = rng.uniform(*profile.shading_strength)
    angle = rng.uniform(0.0, 2 * math.pi)
    if u and strength > 0:
        img = shade(img, strength, angle)
        record.steps.append(("shade", (strength, angle)))

    return img, record


def replay_record(img, record: AugRecord) -> np.ndarray:
    img = check_image(img)
    for name, params in record.steps:
        if name == "squeeze":
            img = squeeze(img, params[0])
        elif name == "rotate":
            img = rotate(img, params[0])
        elif name == "blur":
            img = gaussian_blur(img, params[0])
        elif name == "noise":
            img = add_gaussian_noise(img, params[0], int(params[1]))
        elif name == "shade":
            img = shade(img, params[0], params[1])
        else:
            raise ValueError(f"unknown augmentation op {name!r}")
    return img


def crop_patches(img, patch: int, count: int, seed: int,
                 min_ink: float = 0.05, max_tries: int = 10) -> np.ndarray:
    """`count` seeded square crops as a (count, 1, patch, patch) stack.

    Crops with less than `min_ink` ink fraction are resampled up to
    `max_tries` times, then accepted regardless.
    """
    img = check_image(img)
    h, w = img.shape
    if patch > h or patch > w:
        raise ValueError(f"patch {patch} exceeds image dims {img.shape}")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    rng = SplitMix64(seed)
    out = np.empty((count, 1, patch, patch), dtype=np.float32)
    for k in range(count):
        crop = None
        for _ in range(max_tries):
            y = rng.randint(h - patch + 1)
            x = rng.randint(w - patch + 1)
            crop = img[y:y + patch, x:x + patch]
            if float(np.mean(1.0 - crop)) >= min_ink:
                break
        out[k, 0] = crop
    return out
