"""HTTP/WS service contract tests over a small synthetic workspace."""

import json
import struct

import numpy as np
import pytest
from fastapi.testclient import TestClient

from embedview.density import DensityField
from embedview.query import evaluate, predicate_from_json, resolve
from embedview.service import create_app
from embedview.session import DatasetConfig, Session, ingest_to_workspace
from embedview.synth import fixture_csv


@pytest.fixture(scope="module")
def session(tmp_path_factory):
    cache = tmp_path_factory.mktemp("cache")
    csv_path = cache / "fixture.csv"
    csv_path.write_bytes(fixture_csv(600, seed=3))
    ws = ingest_to_workspace(str(csv_path), cache_dir=str(cache))
    s = Session.from_workspace(ws)
    s.compute(grid=128, sigmas=(16.0, 8.0))
    return s


@pytest.fixture()
def client(session):
    # reset selection state between tests
    session.selection.entries.clear()
    with TestClient(create_app(session)) as c:
        yield c


def set_sel(client, view, predicate):
    r = client.post("/selection", json={"view": view, "predicate": predicate})
    assert r.status_code == 200, r.text
    return r.json()["revision"]


COUNTRY_SEL = {"type": "member", "column": "country", "values": ["US", "Italy"]}


class TestSchemaStats:
    def test_schema(self, client, session):
        r = client.get("/schema")
        assert r.status_code == 200
        body = r.json()
        assert body["row_count"] == 600
        names = {c["name"]: c["dtype"] for c in body["columns"]}
        assert names["country"] == "categorical"
        assert names["score"] == "numerical"
        assert body["config"]["x"] == "x"

    def test_stats(self, client):
        r = client.get("/stats/price")
        assert r.status_code == 200
        s = r.json()["stats"]
        assert s["valid_count"] + s["null_count"] + s["nan_count"] + s["inf_count"] == 600

    def test_unknown_column_404(self, client):
        assert client.get("/stats/nope").status_code == 404


class TestSelectionAndQueries:
    def test_cross_filter_excludes_own_view(self, client, session):
        h_before = client.post(
            "/query/histogram", json={"column": "country", "view": "country-chart"}
        ).json()["histogram"]
        set_sel(client, "country-chart", COUNTRY_SEL)
        h_after = client.post(
            "/query/histogram", json={"column": "country", "view": "country-chart"}
        ).json()["histogram"]
        # own predicate never filters its own chart
        assert h_after["counts"] == h_before["counts"]
        # but another view sees the filter
        h_other = client.post(
            "/query/histogram", json={"column": "country", "view": "other"}
        ).json()["histogram"]
        assert sum(h_other["counts"]) < sum(h_after["counts"])
        assert h_other["totals"] == h_after["totals"]

    def test_selection_roundtrip_identical(self, client):
        set_sel(client, "chart", COUNTRY_SEL)
        got = client.get("/selection").json()["selection"]
        assert got["entries"]["chart"] == {
            "type": "member", "column": "country", "values": ["Italy", "US"]
        }

    def test_repeat_reads_byte_identical(self, client):
        set_sel(client, "chart", COUNTRY_SEL)
        a = client.post("/query/histogram", json={"column": "score"})
        b = client.post("/query/histogram", json={"column": "score"})
        assert a.content == b.content

    def test_malformed_predicate_400(self, client):
        r = client.post("/selection", json={"view": "v", "predicate": {"type": "nope"}})
        assert r.status_code == 400

    def test_unknown_predicate_column_404(self, client):
        r = client.post(
            "/selection",
            json={"view": "v", "predicate": {"type": "validity", "column": "zzz", "class": "null"}},
        )
        assert r.status_code == 404

    def test_revision_mismatch_409(self, client, session):
        rev = set_sel(client, "a", COUNTRY_SEL)
        r = client.post(
            "/query/histogram",
            json={"column": "score", "revision": rev - 1},
        )
        assert r.status_code == 409

    def test_heatmap_and_boxplot(self, client):
        r = client.post("/query/heatmap", json={"x": "score", "y": "price", "nx": 8, "ny": 8})
        assert r.status_code == 200
        hm = r.json()["heatmap"]
        assert len(hm["counts"]) == 8 and len(hm["counts"][0]) == 8
        r = client.post("/query/boxplot", json={"value": "score", "group": "country"})
        groups = {b["group"] for b in r.json()["boxes"]}
        assert "US" in groups

    def test_clear_selection(self, client):
        set_sel(client, "chart", COUNTRY_SEL)
        set_sel(client, "chart", None)
        assert client.get("/selection").json()["selection"]["entries"] == {}


class TestRevisionStream:
    def test_ws_monotone_revisions(self, client):
        with client.websocket_connect("/updates") as ws:
            first = json.loads(ws.receive_text())["revision"]
            seen = [first]
            for i in range(3):
                set_sel(client, f"v{i}", COUNTRY_SEL)
                seen.append(json.loads(ws.receive_text())["revision"])
            assert all(b > a for a, b in zip(seen, seen[1:]))


class TestBinaryEndpoints:
    def test_density_tile(self, client, session):
        r = client.post("/density", json={"nx": 64, "ny": 64, "sigma": 4.0})
        assert r.status_code == 200
        fld = DensityField.from_bytes(r.content)
        assert fld.nx == 64 and fld.ny == 64
        finite = np.isfinite(session.points).all(axis=1)
        assert abs(fld.total_weight - finite.sum()) < 1e-9

    def test_density_respects_cross_filter(self, client, session):
        set_sel(client, "country-chart", {"type": "member", "column": "country", "values": ["US"]})
        r = client.post("/density", json={"nx": 32, "ny": 32, "sigma": 2.0})
        fld = DensityField.from_bytes(r.content)
        col = session.table.column("country")
        us_code = col.dictionary.index("US")
        want = ((col.values == us_code) & (col.validity == 0)).sum()
        assert fld.total_weight == want

    def test_points_layout_and_limit(self, client, session):
        r = client.get("/points", params={"limit": 50})
        assert r.status_code == 200
        rec = np.frombuffer(
            r.content,
            dtype=[("id", "<u4"), ("x", "<f4"), ("y", "<f4"), ("cat", "<i4")],
        )
        assert len(rec) <= 50
        i = int(rec["id"][0])
        assert np.isclose(rec["x"][0], session.points[i, 0], rtol=1e-6)
        cat_col = session.table.column("country")
        assert rec["cat"][0] == cat_col.values[i]

    def test_points_bbox(self, client, session):
        r = client.get("/points", params={"minx": 0.5, "limit": 100000})
        rec = np.frombuffer(
            r.content,
            dtype=[("id", "<u4"), ("x", "<f4"), ("y", "<f4"), ("cat", "<i4")],
        )
        assert (rec["x"] >= 0.5 - 1e-6).all()


class TestRowsAndExport:
    def test_rows_window(self, client):
        r = client.get("/rows", params={"offset": 5, "limit": 10})
        body = r.json()
        assert body["total"] == 600
        assert len(body["rows"]) == 10
        assert body["rows"][0]["_id"] == 5
        assert "country" in body["rows"][0]

    def test_rows_respect_filter(self, client):
        set_sel(client, "chart", {"type": "member", "column": "country", "values": ["US"]})
        body = client.get("/rows", params={"limit": 5}).json()
        assert all(row["country"] == "US" for row in body["rows"])
        assert body["total"] < 600

    def test_export_counts_match_resolved_predicate(self, client, session):
        set_sel(client, "chart", COUNTRY_SEL)
        r = client.get("/export", params={"format": "csv"})
        assert r.status_code == 200
        n_lines = len(r.content.decode().strip().splitlines()) - 1
        mask = evaluate(session.table, resolve(session.selection, None))
        assert n_lines == mask.sum() == int(r.headers["X-Row-Count"])

    def test_export_parquet_roundtrip(self, client, session):
        from embedview.data import ingest

        r = client.get("/export", params={"format": "parquet"})
        t = ingest(r.content, "parquet")
        assert t.row_count == session.table.row_count  # no selection set


class TestNeighborsEndpoints:
    def test_knn2d(self, client, session):
        i = int(np.flatnonzero(np.isfinite(session.points).all(axis=1))[0])
        x, y = session.points[i]
        r = client.post("/knn2d", json={"x": float(x), "y": float(y), "k": 3})
        hits = r.json()["neighbors"]
        assert hits[0]["row"] == i and hits[0]["distance"] == 0.0
        assert len(hits) == 3

    def test_knnvec_unconfigured(self, client):
        r = client.post("/knnvec", json={"row": 0, "k": 3})
        assert r.status_code == 400

    def test_search(self, client, session):
        r = client.post("/search", json={"query": "cherry", "limit": 10})
        rows = r.json()["rows"]
        col = session.table.column("description")
        assert all("cherry" in col.cell(i) for i in rows)

    def test_labels_zoom_filter(self, client, session):
        plan = session.label_plan
        r_all = client.get("/labels").json()
        assert len(r_all["labels"]) == len(plan.labels)
        r_lo = client.get("/labels", params={"zoom": plan.z_lo}).json()
        want = [l for l in plan.labels if l.min_zoom == plan.z_lo]
        assert len(r_lo["labels"]) == len(want)
        assert all(l["min_zoom"] == plan.z_lo for l in r_lo["labels"])

    def test_clusters_json(self, client):
        r = client.get("/clusters")
        assert r.status_code == 200
        levels = r.json()["clusters"]["levels"]
        assert len(levels) == 2
        assert all(len(l["clusters"]) >= 1 for l in levels)
