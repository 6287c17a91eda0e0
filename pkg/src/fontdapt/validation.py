"""Shape and range checks shared across the package.

Kept tiny on purpose: every public entry point funnels its inputs through
these helpers so error messages always name the offending shapes.
"""

from __future__ import annotations

import numpy as np


def as_f32(x) -> np.ndarray:
    return np.ascontiguousarray(x, dtype=np.float32)


def check_tensor4(x, name: str = "input") -> np.ndarray:
    x = np.asarray(x)
    if x.ndim != 4:
        raise ValueError(f"{name} must be 4-D (n, c, h, w), got shape {x.shape}")
    return as_f32(x)


def check_same_shape(a: np.ndarray, b: np.ndarray, what: str) -> None:
    if a.shape != b.shape:
        raise ValueError(f"{what}: shape mismatch {a.shape} vs {b.shape}")


def check_image(img, name: str = "image") -> np.ndarray:
    img = np.asarray(img, dtype=np.float32)
    if img.ndim != 2:
        raise ValueError(f"{name} must be a 2-D grayscale array, got shape {img.shape}")
    return img


def check_finite(x: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(x)):
        raise FloatingPointError(f"{what} contains non-finite values")
