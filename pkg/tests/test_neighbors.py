"""Neighbor search vs linear-scan oracles."""

import numpy as np
import pytest

from embedview.data import ColumnTable, build_column
from embedview.errors import QueryError
from embedview.neighbors import SpatialIndex2D, VectorIndex, text_search
from embedview.render import Viewport


def brute_knn2d(points, q, k):
    d = np.sqrt((points[:, 0] - q[0]) ** 2 + (points[:, 1] - q[1]) ** 2)
    order = np.lexsort((np.arange(len(points)), d))[:k]
    return [(int(i), float(d[i])) for i in order]


class TestKnn2d:
    def test_self_is_nearest(self, rng):
        pts = rng.uniform(0, 1, (50, 2))
        idx = SpatialIndex2D(pts)
        row, dist = idx.knn(pts[17], 1)[0]
        assert row == 17 and dist == 0.0

    def test_collinear_order(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]])
        idx = SpatialIndex2D(pts)
        got = idx.knn((0.0, 0.0), 2)
        assert [r for r, _ in got] == [0, 1]

    def test_matches_bruteforce(self, rng):
        pts = rng.uniform(-10, 10, (10_000, 2))
        idx = SpatialIndex2D(pts)
        for _ in range(25):
            q = rng.uniform(-12, 12, 2)
            k = int(rng.integers(1, 20))
            assert idx.knn(q, k) == brute_knn2d(pts, q, k)

    def test_duplicate_points_tie_by_row(self, rng):
        pts = np.tile(rng.uniform(0, 1, (5, 2)), (3, 1))
        idx = SpatialIndex2D(pts)
        got = idx.knn(pts[2], 3)
        assert [r for r, _ in got] == [2, 7, 12]
        assert all(d == 0 for _, d in got)

    def test_nonfinite_rows_excluded(self):
        pts = np.array([[0.0, 0.0], [np.nan, 1.0], [2.0, np.inf], [1.0, 1.0]])
        idx = SpatialIndex2D(pts)
        assert len(idx) == 2
        got = idx.knn((0.9, 0.9), 5)
        assert {r for r, _ in got} == {0, 3}

    def test_empty_index(self):
        idx = SpatialIndex2D(np.zeros((0, 2)))
        assert idx.knn((0, 0), 3) == []

    def test_symmetric_distance(self, rng):
        pts = rng.uniform(0, 1, (500, 2))
        idx = SpatialIndex2D(pts)
        a = 7
        b, d_ab = idx.knn(pts[a], 2)[1]
        d_back = dict(
            (r, d) for r, d in idx.knn(pts[b], len(pts))
        )[a]
        assert d_back == d_ab


class TestPick:
    def test_exact_hit(self, rng):
        pts = rng.uniform(0, 1, (200, 2))
        idx = SpatialIndex2D(pts)
        vp = Viewport((0.5, 0.5), 400.0, 400, 400)
        sx, sy = vp.data_to_screen(pts[42, 0], pts[42, 1])
        assert idx.pick((float(sx), float(sy)), 4.0, vp) == 42

    def test_empty_space_returns_none(self):
        pts = np.array([[0.0, 0.0]])
        idx = SpatialIndex2D(pts)
        vp = Viewport((0.0, 0.0), 100.0, 400, 400)
        assert idx.pick((390.0, 390.0), 5.0, vp) is None

    def test_matches_bruteforce_screen_scan(self, rng):
        pts = rng.uniform(-2, 2, (1000, 2))
        idx = SpatialIndex2D(pts)
        for _ in range(20):
            vp = Viewport(
                (float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1))),
                float(rng.uniform(50, 400)),
                640, 480,
            )
            click = (float(rng.uniform(0, 640)), float(rng.uniform(0, 480)))
            radius = float(rng.uniform(2, 12))
            got = idx.pick(click, radius, vp)
            sx, sy = vp.data_to_screen(pts[:, 0], pts[:, 1])
            d = np.sqrt((sx - click[0]) ** 2 + (sy - click[1]) ** 2)
            best = int(np.lexsort((np.arange(len(pts)), d))[0])
            want = best if d[best] <= radius else None
            assert got == want


def brute_knnvec(mat, ids, query_pos, query_row, k):
    dist = 1.0 - mat @ mat[query_pos]
    order = np.lexsort((ids, dist))
    out = []
    for i in order:
        if ids[i] == query_row:
            continue
        out.append((int(ids[i]), float(dist[i])))
        if len(out) == k:
            break
    return out


class TestKnnVec:
    def test_duplicate_vector_first(self, rng):
        base = rng.normal(0, 1, (10, 8))
        base[7] = base[3]
        idx = VectorIndex(base)
        got = idx.knn(3, 1)
        assert got[0][0] == 7
        assert got[0][1] <= 1e-12

    def test_orthonormal_basis(self):
        idx = VectorIndex(np.eye(5))
        got = idx.knn(0, 1)
        assert got[0][0] == 1   # all distance 1, lowest row id wins
        assert np.isclose(got[0][1], 1.0)

    def test_matches_bruteforce(self, rng):
        vecs = rng.normal(0, 1, (5000, 64))
        idx = VectorIndex(vecs)
        norm = vecs / np.linalg.norm(vecs, axis=1)[:, None]
        for _ in range(10):
            row = int(rng.integers(0, 5000))
            k = int(rng.integers(1, 16))
            want = brute_knnvec(norm, np.arange(5000), row, row, k)
            got = idx.knn(row, k)
            assert [r for r, _ in got] == [r for r, _ in want]
            np.testing.assert_allclose(
                [d for _, d in got], [d for _, d in want], rtol=1e-12, atol=1e-12
            )

    def test_zero_and_invalid_vectors_excluded(self):
        vecs = np.array([[1.0, 0.0], [0.0, 0.0], [np.nan, 1.0], [0.0, 2.0]])
        idx = VectorIndex(vecs)
        assert list(idx.skipped_rows) == [1, 2]
        with pytest.raises(QueryError):
            idx.knn(1, 1)

    def test_unit_norms(self, rng):
        idx = VectorIndex(rng.normal(0, 3, (100, 16)))
        norms = np.linalg.norm(idx.matrix, axis=1)
        assert np.abs(norms - 1).max() <= 1e-6


class TestTextSearch:
    def _table(self, texts):
        return ColumnTable([build_column("t", texts, "text")])

    def test_empty_needle_matches_nonnull(self):
        t = self._table(["a", None, "b", "c"])
        assert text_search(t, "t", "", limit=2) == [0, 2]

    def test_no_occurrence(self):
        t = self._table(["alpha", "beta"])
        assert text_search(t, "t", "zzz") == []

    def test_case_insensitive_substring(self):
        t = self._table(["Hello World", "other", "WORLDLY"])
        assert text_search(t, "t", "world") == [0, 2]

    def test_categorical_column(self):
        t = ColumnTable([build_column("c", ["Red", "Green", "Red"], "categorical")])
        assert text_search(t, "c", "red") == [0, 2]

    def test_matches_naive_scan(self, rng):
        words = ["wine", "oak", "berry", "crisp", "smoke"]
        texts = [
            " ".join(rng.choice(words, size=3)) if rng.random() > 0.1 else None
            for _ in range(500)
        ]
        t = self._table(texts)
        for needle in ["oak", "ber", "q", ""]:
            want = [
                i for i, s in enumerate(texts) if s is not None and needle in s
            ][:40]
            assert text_search(t, "t", needle, limit=40) == want

    def test_dtype_guard(self):
        t = ColumnTable([build_column("v", [1.0, 2.0])])
        with pytest.raises(QueryError):
            text_search(t, "v", "x")
