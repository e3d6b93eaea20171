"""GPBT tensor file format.

Layout (all little-endian):

    bytes 0..3    magic "GPBT"
    u32           version (= 1)
    u32           rank (>= 1)
    u64 * rank    dims
    f32 * prod    payload, row-major

Round trips are bit-exact; non-RGB modalities (signed normals, world-unit
depth, inverse-covariance maps) survive unchanged, unlike image containers.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"GPBT"
VERSION = 1


class TensorFormatError(ValueError):
    pass


def write_tensor(path: str | Path, tensor: np.ndarray) -> None:
    if np.asarray(tensor).ndim == 0:
        raise TensorFormatError("rank-0 tensors are not representable; reshape to rank >= 1")
    arr = np.ascontiguousarray(tensor, dtype=np.float32)
    header = MAGIC + struct.pack("<II", VERSION, arr.ndim)
    header += struct.pack(f"<{arr.ndim}Q", *arr.shape)
    with open(path, "wb") as f:
        f.write(header)
        f.write(arr.astype("<f4", copy=False).tobytes())


def read_tensor(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise TensorFormatError(f"{path}: bad magic {data[:4]!r}, expected {MAGIC!r}")
    if len(data) < 12:
        raise TensorFormatError(f"{path}: truncated header")
    version, rank = struct.unpack_from("<II", data, 4)
    if version != VERSION:
        raise TensorFormatError(f"{path}: unsupported version {version}")
    if rank < 1:
        raise TensorFormatError(f"{path}: invalid rank {rank}")
    dims_end = 12 + 8 * rank
    if len(data) < dims_end:
        raise TensorFormatError(f"{path}: truncated dims")
    dims = struct.unpack_from(f"<{rank}Q", data, 12)
    count = int(np.prod(dims, dtype=np.int64)) if rank else 0
    payload = data[dims_end:]
    if len(payload) != 4 * count:
        raise TensorFormatError(
            f"{path}: payload has {len(payload)} bytes, expected {4 * count} for dims {dims}"
        )
    arr = np.frombuffer(payload, dtype="<f4", count=count).reshape(dims)
    return arr.astype(np.float32, copy=True)
