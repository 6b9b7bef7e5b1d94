"""Seeded synthetic datasets for benchmarks, fixtures, and tests.

The point generator is a mixture of isotropic Gaussians with uniform
category assignment; given the same seed it reproduces bit-identical data.
"""

from __future__ import annotations

import io
import csv

import numpy as np

_WORD_POOLS = [
    ["cherry", "berry", "oak", "tannin", "plum"],
    ["citrus", "apple", "mineral", "crisp", "lemon"],
    ["spice", "pepper", "smoke", "leather", "earthy"],
    ["floral", "honey", "apricot", "sweet", "peach"],
]


def make_points(n: int, k_categories: int = 1, seed: int = 0,
                n_components: int | None = None):
    """Gaussian-mixture points in [0, 1]^2 with uniform category codes.

    Returns (points (n, 2) float64, codes (n,) int32).
    """
    rng = np.random.default_rng(seed)
    m = n_components if n_components is not None else max(4, min(12, k_categories * 2))
    centers = rng.uniform(0.15, 0.85, size=(m, 2))
    stds = rng.uniform(0.015, 0.06, size=m)
    comp = rng.integers(0, m, size=n)
    pts = centers[comp] + rng.standard_normal((n, 2)) * stds[comp, None]
    codes = rng.integers(0, max(1, k_categories), size=n).astype(np.int32)
    return pts, codes


def separated_mixture(n: int, n_components: int, seed: int, std: float = 0.02):
    """Mixture with guaranteed component separation (jittered 3x3 grid).

    Component centers sit on a 0.3-pitch grid jittered by at most 0.02, so
    pairwise center distance is >= 0.26 - far beyond 4 component sigmas.
    Returns (points, component_labels, centers).
    """
    if not 1 <= n_components <= 9:
        raise ValueError("n_components must be in 1..9")
    rng = np.random.default_rng(seed)
    cells = rng.permutation(9)[:n_components]
    gx, gy = cells % 3, cells // 3
    centers = np.stack([0.2 + 0.3 * gx, 0.2 + 0.3 * gy], axis=1)
    centers += rng.uniform(-0.02, 0.02, size=centers.shape)
    labels = rng.integers(0, n_components, size=n)
    pts = centers[labels] + rng.standard_normal((n, 2)) * std
    return pts, labels, centers


def fixture_csv(n: int, seed: int = 0) -> bytes:
    """Small tabular fixture with x/y projection, metadata, and text."""
    rng = np.random.default_rng(seed)
    pts, _ = make_points(n, 1, seed, n_components=4)
    # word pool follows the point's quadrant so cluster labels have signal
    comp = (pts[:, 0] > 0.5).astype(int) + 2 * (pts[:, 1] > 0.5).astype(int)
    countries = ["US", "Italy", "France", "Spain", "Chile"]
    country = rng.choice(countries, size=n, p=[0.4, 0.2, 0.2, 0.1, 0.1])
    score = np.round(rng.normal(88, 3, size=n), 1)
    price = np.round(np.exp(rng.normal(3.2, 0.6, size=n)), 2)

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "country", "score", "price", "description"])
    for i in range(n):
        pool = _WORD_POOLS[comp[i]]
        words = rng.choice(pool, size=4)
        # lot number keeps descriptions high-cardinality, like real review text
        desc = (
            f"notes of {words[0]} and {words[1]} with {words[2]} {words[3]}"
            f" finish, lot {i}"
        )
        price_cell = "" if rng.random() < 0.02 else repr(float(price[i]))
        w.writerow([
            repr(float(pts[i, 0])), repr(float(pts[i, 1])),
            country[i], repr(float(score[i])), price_cell, desc,
        ])
    return buf.getvalue().encode()
