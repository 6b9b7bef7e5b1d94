"""Point picking, exact k-nearest neighbors (2D and vector space), text search.

2D queries go through a kd-tree but re-rank candidates with locally computed
distances so results are exact with ties broken by ascending row id,
independent of tree layout. Vector search is an exact scan over
unit-normalized embeddings with cosine distance (1 - dot).
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from .data import VALID, ColumnTable
from .errors import QueryError


class SpatialIndex2D:
    """Exact Euclidean kNN over the finite projected points."""

    def __init__(self, points, leaf_size: int = 32):
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
        finite = np.isfinite(pts).all(axis=1)
        self.row_ids = np.flatnonzero(finite)
        self.points = pts[finite]
        self._tree = (
            cKDTree(self.points, leafsize=leaf_size) if len(self.points) else None
        )

    def __len__(self):
        return len(self.points)

    def knn(self, query, k: int):
        """k nearest (row_id, distance) pairs, distance then row id ascending."""
        if k < 1:
            raise QueryError(f"k must be >= 1, got {k}")
        if self._tree is None:
            return []
        q = np.asarray(query, dtype=np.float64)
        k_eff = min(int(k), len(self.points))
        d, _ = self._tree.query(q, k=k_eff)
        dk = float(np.max(d))
        # re-rank every candidate within the kth shell (plus a whisker for
        # metric rounding differences) so ties resolve by row id
        cand = self._tree.query_ball_point(q, r=dk * (1 + 1e-9) + 1e-12)
        cand = np.asarray(cand, dtype=np.int64)
        diff = self.points[cand] - q
        dist = np.sqrt(diff[:, 0] ** 2 + diff[:, 1] ** 2)
        ids = self.row_ids[cand]
        order = np.lexsort((ids, dist))[:k_eff]
        return [(int(ids[i]), float(dist[i])) for i in order]

    def pick(self, screen_xy, radius_px: float, viewport):
        """Nearest point within ``radius_px`` on screen, else None."""
        if radius_px <= 0:
            raise QueryError("pick radius must be > 0")
        if self._tree is None:
            return None
        qx, qy = viewport.screen_to_data(screen_xy[0], screen_xy[1])
        hits = self.knn((qx, qy), 1)
        if not hits:
            return None
        row, dist = hits[0]
        return row if dist * viewport.zoom <= radius_px else None


class VectorIndex:
    """Exact cosine kNN over unit-normalized vectors.

    Rows with null/non-finite vectors or zero norm are excluded and listed
    in ``skipped_rows``.
    """

    def __init__(self, vectors, validity=None):
        mat = np.asarray(vectors, dtype=np.float64)
        n = len(mat)
        ok = np.isfinite(mat).all(axis=1)
        if validity is not None:
            ok &= np.asarray(validity) == VALID
        norms = np.linalg.norm(mat, axis=1)
        ok &= norms > 0
        self.row_ids = np.flatnonzero(ok)
        self.skipped_rows = np.flatnonzero(~ok)
        self.matrix = mat[ok] / norms[ok, None]
        self._pos = {int(r): i for i, r in enumerate(self.row_ids)}

    def __len__(self):
        return len(self.matrix)

    def knn(self, query_row: int, k: int):
        """k nearest (row_id, cosine_distance), excluding the query row."""
        if k < 1:
            raise QueryError(f"k must be >= 1, got {k}")
        pos = self._pos.get(int(query_row))
        if pos is None:
            raise QueryError(f"row {query_row} has no valid vector")
        dist = 1.0 - self.matrix @ self.matrix[pos]
        ids = self.row_ids
        order = np.lexsort((ids, dist))
        out = []
        for i in order:
            if ids[i] == query_row:
                continue
            out.append((int(ids[i]), float(dist[i])))
            if len(out) == k:
                break
        return out


def text_search(
    table: ColumnTable, column: str, query: str, limit: int = 100
) -> list:
    """Case-insensitive substring match, ordered by row id."""
    col = table.column(column)
    if col.dtype not in ("text", "categorical"):
        raise QueryError(
            f"text_search needs a text or categorical column, {column!r} is {col.dtype}"
        )
    needle = query.lower()
    out = []
    if col.dtype == "categorical":
        hit_codes = {
            i for i, s in enumerate(col.dictionary) if needle in s.lower()
        }
        for i in range(table.row_count):
            if col.validity[i] == VALID and int(col.values[i]) in hit_codes:
                out.append(i)
                if len(out) >= limit:
                    break
        return out
    for i in range(table.row_count):
        if col.validity[i] == VALID and needle in col.values[i].lower():
            out.append(i)
            if len(out) >= limit:
                break
    return out
