"""Binary PGM (P5, 8-bit) encode/decode for dataset images."""

from __future__ import annotations

from pathlib import Path

import numpy as np


def encode_pgm(img: np.ndarray) -> bytes:
    """Quantize a [0,1] grayscale array to 8-bit P5 bytes."""
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError(f"PGM expects a 2-D array, got shape {img.shape}")
    q = np.clip(np.round(img * 255.0), 0, 255).astype(np.uint8)
    h, w = q.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + q.tobytes()


def decode_pgm(data: bytes) -> np.ndarray:
    """P5 bytes back to float32 in [0,1]."""
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    if fields[0] != b"P5":
        raise ValueError(f"not a binary PGM: magic {fields[0]!r}")
    w, h, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval != 255:
        raise ValueError(f"only 8-bit PGM supported, maxval {maxval}")
    pos += 1  # single whitespace after maxval
    pixels = np.frombuffer(data, dtype=np.uint8, count=w * h, offset=pos)
    return (pixels.reshape(h, w).astype(np.float32) / 255.0)


def write_pgm(path, img: np.ndarray) -> None:
    Path(path).write_bytes(encode_pgm(img))


def read_pgm(path) -> np.ndarray:
    return decode_pgm(Path(path).read_bytes())
