"""Deterministic seed derivation.

Every random stream in the pipeline is derived from one master seed via
SHA-256 over (master, *labels), so adding workers or reordering stages
never changes a stream's draws.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(master: int, *labels: object) -> int:
    """63-bit child seed for the stream identified by labels."""
    h = hashlib.sha256(repr((int(master),) + tuple(str(x) for x in labels)).encode())
    return int.from_bytes(h.digest()[:8], "little") & 0x7FFF_FFFF_FFFF_FFFF


def rng(master: int, *labels: object) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, *labels))
