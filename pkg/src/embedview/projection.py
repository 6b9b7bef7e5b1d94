"""Deterministic fallback embeddings for test fixtures.

Real deployments supply precomputed high-dimensional vectors and/or 2D
coordinates; these helpers exist so fixtures and demos can run without any
model dependency. The text embedder is feature hashing (stable blake2b),
the projection is plain PCA with a deterministic sign convention.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .cluster import tokenize


def hash_embed(texts, dim: int = 64) -> np.ndarray:
    """Feature-hashing bag-of-words embedding, L2-normalized per row."""
    out = np.zeros((len(texts), dim))
    for i, text in enumerate(texts):
        if not text:
            continue
        for tok in tokenize(text):
            h = hashlib.blake2b(tok.encode(), digest_size=8).digest()
            v = int.from_bytes(h, "little")
            out[i, v % dim] += 1.0 if (v >> 63) & 1 else -1.0
    norms = np.linalg.norm(out, axis=1)
    out[norms > 0] /= norms[norms > 0, None]
    return out


def pca2d(vectors) -> np.ndarray:
    """Project rows to their top-2 principal components.

    Component signs are fixed so the largest-magnitude loading is positive,
    making the output independent of SVD sign ambiguity.
    """
    X = np.asarray(vectors, dtype=np.float64)
    if len(X) < 2:
        return np.zeros((len(X), 2))
    Xc = X - X.mean(axis=0)
    _, _, vt = np.linalg.svd(Xc, full_matrices=False)
    comps = vt[:2]
    if comps.shape[0] < 2:
        comps = np.vstack([comps, np.zeros_like(comps[0])])
    for r in range(2):
        j = np.argmax(np.abs(comps[r]))
        if comps[r, j] < 0:
            comps[r] = -comps[r]
    return Xc @ comps.T
