"""Deterministic test embedder: token feature hashing plus normalization.

Real deployments plug in an external embedding model behind the same
``embed(text) -> vector`` surface; this one exists so retrieval behavior is
exactly reproducible in tests (the built-in ``hash`` is salted per process,
hence md5).
"""

from __future__ import annotations

import hashlib

import numpy as np


class HashingEmbedder:
    """Bag-of-tokens hashing into a fixed dimension, L2-normalized."""

    def __init__(self, dimension: int = 64):
        if dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {dimension}")
        self.dimension = dimension

    def embed(self, text: str) -> np.ndarray:
        vector = np.zeros(self.dimension, dtype=float)
        for token in text.lower().split():
            digest = hashlib.md5(token.encode("utf-8")).digest()
            bucket = int.from_bytes(digest[:8], "big") % self.dimension
            sign = 1.0 if digest[8] % 2 == 0 else -1.0
            vector[bucket] += sign
        norm = np.linalg.norm(vector)
        return vector / norm if norm else vector
