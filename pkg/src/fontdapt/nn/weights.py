"""FDW1 weight bundle format.

Little-endian binary: magic b"FDW1", u32 tensor count, then per tensor:
u16 name length, UTF-8 name, u8 dtype tag (0 = f32), u8 ndim,
u32 dims[ndim], raw f32 payload. Order-preserving on round trip.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"FDW1"
DTYPE_F32 = 0


class BundleFormatError(ValueError):
    pass


def write_bundle(tensors: dict[str, np.ndarray]) -> bytes:
    parts = [MAGIC, struct.pack("<I", len(tensors))]
    for name, arr in tensors.items():
        arr = np.ascontiguousarray(arr, dtype=np.float32)
        name_bytes = name.encode("utf-8")
        parts.append(struct.pack("<H", len(name_bytes)))
        parts.append(name_bytes)
        parts.append(struct.pack("<BB", DTYPE_F32, arr.ndim))
        parts.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        parts.append(arr.tobytes(order="C"))
    return b"".join(parts)


def read_bundle(data: bytes) -> dict[str, np.ndarray]:
    if data[:4] != MAGIC:
        raise BundleFormatError(f"bad magic {data[:4]!r}, expected {MAGIC!r}")
    (count,) = struct.unpack_from("<I", data, 4)
    off = 8
    out: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = struct.unpack_from("<H", data, off)
        off += 2
        name = data[off:off + name_len].decode("utf-8")
        off += name_len
        dtype_tag, ndim = struct.unpack_from("<BB", data, off)
        off += 2
        if dtype_tag != DTYPE_F32:
            raise BundleFormatError(f"unknown dtype tag {dtype_tag} for tensor {name!r}")
        dims = struct.unpack_from(f"<{ndim}I", data, off)
        off += 4 * ndim
        size = int(np.prod(dims, dtype=np.int64)) if ndim else 1
        arr = np.frombuffer(data, dtype="<f4", count=size, offset=off).reshape(dims)
        off += 4 * size
        out[name] = arr.copy()
    if off != len(data):
        raise BundleFormatError(f"{len(data) - off} trailing bytes after last tensor")
    return out


def write_bundle_file(path, tensors: dict[str, np.ndarray]) -> None:
    Path(path).write_bytes(write_bundle(tensors))


def read_bundle_file(path) -> dict[str, np.ndarray]:
    return read_bundle(Path(path).read_bytes())
